"""Deciding whether a newly arrived observer can identify the active norm.

A :class:`NormFamily` bundles a system, the candidate norm automata the
arriving agent knows about (each identified by its position), the index of
the one actually in force, and the new agent's observation function over
environment states.  Two questions are decided:

* "always recognized" (:func:`decide_nc1`): does every long-enough run of the
  active structure pin down the active index, no matter how the system moves?
  Decided in polynomial time by synchronizing the active structure with every
  rival structure on the new agent's observations and checking for a
  reachable cycle: an infinite observation-matched pair of runs with
  different indices is exactly a reachable nontrivial strongly connected
  component of that synchronized product.

* "recognizable" (:func:`decide_nc2`): does some finite run of the active
  structure have an observation sequence matched only inside the active
  structure?  Decided by an on-the-fly subset reachability: pair each active
  path with the set of all states (across the whole family) reachable under
  the same observation sequence, and look for a pair whose set is pure.

Both deciders emit replayable witnesses, and both have deliberately naive
path-enumeration counterparts (:func:`nc1_bruteforce`, :func:`nc2_bruteforce`)
used as differential oracles in tests.

The module also builds hard recognition instances from nondeterministic
finite automata: the emitted single-agent system offers a guarded choice
between a subsystem tracing the automaton's runs and one tracing all words,
and recognizing the active norm amounts to exhibiting a word without a run
(:func:`nfa_run_universal` is the independent subset-construction oracle for
that correspondence).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .model import (
    MAS,
    KripkeStructure,
    NormativeSystem,
    ProductState,
    ValidationError,
    apply_norm,
    validate_mas,
    validate_norm,
)

# A state of some family member's product structure, tagged with the index of
# the member it belongs to.
TaggedState = tuple[int, ProductState]


@dataclass
class NormFamily:
    """A system with candidate norms and the new agent's observation map.

    ``members[active]`` is the norm actually in force.  ``new_agent_obs``
    assigns the arriving agent's observation value to every environment
    state; the arriving agent is not part of the system's roster, so this map
    is independent of the per-agent observations inside ``mas``.
    """

    mas: MAS
    members: tuple[NormativeSystem, ...]
    active: int = 0
    new_agent_obs: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.members = tuple(self.members)
        if not self.members:
            raise ValueError("a norm family needs at least one member")
        if not 0 <= self.active < len(self.members):
            raise ValueError(f"active index {self.active} out of range")
        report = validate_mas(self.mas)
        if not report.ok:
            raise ValidationError("invalid multiagent system", report)
        for i, member in enumerate(self.members):
            report = validate_norm(self.mas, member)
            if not report.ok:
                raise ValidationError(f"invalid family member {i}", report)
        missing = sorted(self.mas.states - self.new_agent_obs.keys())
        if missing:
            raise ValueError(f"new-agent observation missing for states: {missing[:3]}")
        self._kripkes: tuple[KripkeStructure, ...] | None = None

    def kripkes(self) -> tuple[KripkeStructure, ...]:
        """The reachable product structure of every member, built lazily."""
        if self._kripkes is None:
            self._kripkes = tuple(
                apply_norm(self.mas, member, validate=False) for member in self.members
            )
        return self._kripkes

    def obs(self, state: ProductState) -> str:
        """The new agent's observation of a product state (its projection)."""
        return self.new_agent_obs[state[0]]


def extend_observation(family: NormFamily, path) -> tuple[str, ...]:
    """The new agent's observation sequence along a path of product states."""
    return tuple(family.obs(state) for state in path)


@dataclass(frozen=True)
class Lasso:
    """A finite stem plus a cycle: states[loop_start:] repeats forever."""

    states: tuple[ProductState, ...]
    loop_start: int

    def unroll(self, length: int) -> tuple[ProductState, ...]:
        out = list(self.states)
        cycle = self.states[self.loop_start :]
        while len(out) < length:
            out.extend(cycle)
        return tuple(out[:length])


@dataclass(frozen=True)
class RecognitionVerdict:
    """Outcome of one recognition problem.

    For the "always recognized" problem an unsuccessful verdict carries a
    pair of observation-matched lassos with different indices; for the
    "recognizable" problem a successful verdict carries the distinguishing
    finite path of the active structure.
    """

    problem: str
    successful: bool
    witness: object = None


@dataclass
class SyncProduct:
    """Active structure synchronized with every rival on observations."""

    states: frozenset[tuple[TaggedState, TaggedState]]
    initial: frozenset[tuple[TaggedState, TaggedState]]
    edges: dict[tuple[TaggedState, TaggedState], tuple]
    safe: frozenset[tuple[TaggedState, TaggedState]]


def build_sync_product(family: NormFamily) -> SyncProduct:
    """Synchronize the active structure with each rival structure.

    States pair an active-structure state with a rival-structure state whose
    new-agent observations agree; edges require component edges on both sides
    and agreeing observations of the two destinations.  Every state is marked
    safe, because the pairing always combines different indices.
    """
    if len(family.members) < 2:
        raise ValueError("synchronized product needs at least one rival member")
    kripkes = family.kripkes()
    active = family.active

    initial = set()
    for s in sorted(kripkes[active].initial):
        for j, rival in enumerate(kripkes):
            if j == active:
                continue
            for t in sorted(rival.initial):
                if family.obs(s) == family.obs(t):
                    initial.add(((active, s), (j, t)))

    edges: dict[tuple[TaggedState, TaggedState], tuple] = {}
    queue = deque(sorted(initial))
    seen = set(initial)
    while queue:
        pair = queue.popleft()
        (_, s), (j, t) = pair
        succs = []
        for s2 in kripkes[active].successors(s):
            for t2 in kripkes[j].successors(t):
                if family.obs(s2) == family.obs(t2):
                    succs.append(((active, s2), (j, t2)))
        edges[pair] = tuple(sorted(set(succs)))
        for nxt in edges[pair]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    states = frozenset(seen)
    return SyncProduct(states, frozenset(initial), edges, states)


def _tarjan_sccs(nodes, successors) -> list[list]:
    """Strongly connected components, iteratively, in deterministic order."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    sccs: list[list] = []
    counter = 0

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(successors(nxt))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                sccs.append(component)
    return sccs


def decide_nc1(family: NormFamily) -> RecognitionVerdict:
    """Will the observer always, eventually, pin down the active norm?

    Unsuccessful iff the synchronized product has a reachable cycle (a
    nontrivial strongly connected component or a self-loop), i.e. an infinite
    observation-matched pair of runs with different indices; the witness is
    that pair as two aligned lassos.  A family without rivals is successful
    by convention.
    """
    if len(family.members) < 2:
        return RecognitionVerdict("nc1", True)
    product = build_sync_product(family)
    sccs = _tarjan_sccs(sorted(product.states), lambda n: product.edges.get(n, ()))
    cyclic = set()
    for component in sccs:
        if len(component) > 1 or component[0] in product.edges.get(component[0], ()):
            cyclic.update(component)
    if not cyclic:
        return RecognitionVerdict("nc1", True)

    # Stem: breadth-first from the initial pairs to the first cyclic pair.
    parent: dict = {}
    entry = None
    queue = deque(sorted(product.initial))
    seenp = set(product.initial)
    for node in sorted(product.initial):
        if node in cyclic:
            entry = node
            break
    while entry is None and queue:
        node = queue.popleft()
        for nxt in product.edges.get(node, ()):
            if nxt in seenp:
                continue
            seenp.add(nxt)
            parent[nxt] = node
            if nxt in cyclic:
                entry = nxt
                break
            queue.append(nxt)
    assert entry is not None
    stem = [entry]
    while stem[-1] in parent:
        stem.append(parent[stem[-1]])
    stem.reverse()

    # Cycle: shortest loop from the entry back to itself inside its component.
    component = next(set(c) for c in sccs if entry in c)
    back: dict = {}
    cq = deque()
    for nxt in product.edges.get(entry, ()):
        if nxt in component and nxt not in back:
            back[nxt] = entry
            cq.append(nxt)
    cycle_tail: list = []
    if entry in back:  # self-loop
        cycle_tail = []
    else:
        found = None
        visited = set(back)
        while cq:
            node = cq.popleft()
            if node == entry:
                found = node
                break
            for nxt in product.edges.get(node, ()):
                if nxt in component and nxt not in visited:
                    visited.add(nxt)
                    back[nxt] = node
                    cq.append(nxt)
        assert found is not None
        walk = [found]
        while walk[-1] != entry or len(walk) == 1:
            walk.append(back[walk[-1]])
            if walk[-1] == entry:
                break
        walk.reverse()  # entry .. last-before-entry, then wraps to entry
        cycle_tail = walk[1:-1] if walk[-1] == entry else walk[1:]

    pairs = stem + cycle_tail
    loop_start = len(stem) - 1
    member = pairs[0][1][0]
    active_lasso = Lasso(tuple(p[0][1] for p in pairs), loop_start)
    rival_lasso = Lasso(tuple(p[1][1] for p in pairs), loop_start)
    return RecognitionVerdict("nc1", False, (active_lasso, member, rival_lasso))


def replay_nc1_witness(family: NormFamily, witness) -> bool:
    """Check an unsuccessful-verdict witness directly against the definition:
    two aligned lassos, each a real run of its structure, with pointwise equal
    observations and different member indices."""
    try:
        active_lasso, member, rival_lasso = witness
    except (TypeError, ValueError):
        return False
    if not isinstance(active_lasso, Lasso) or not isinstance(rival_lasso, Lasso):
        return False
    if member == family.active or not 0 <= member < len(family.members):
        return False
    if len(active_lasso.states) != len(rival_lasso.states):
        return False
    if active_lasso.loop_start != rival_lasso.loop_start:
        return False
    if not 0 <= active_lasso.loop_start < len(active_lasso.states):
        return False
    kripkes = family.kripkes()

    def valid_lasso(lasso: Lasso, structure: KripkeStructure) -> bool:
        states = lasso.states
        if states[0] not in structure.initial:
            return False
        for a, b in zip(states, states[1:]):
            if b not in structure.successors(a):
                return False
        return states[lasso.loop_start] in structure.successors(states[-1])

    if not valid_lasso(active_lasso, kripkes[family.active]):
        return False
    if not valid_lasso(rival_lasso, kripkes[member]):
        return False
    return extend_observation(family, active_lasso.states) == extend_observation(
        family, rival_lasso.states
    )


def _subset_successors(family: NormFamily, kripkes, subset, observation: str):
    """Observation-matched one-step successors of a tagged state set."""
    out = set()
    for j, t in subset:
        for t2 in kripkes[j].successors(t):
            if family.obs(t2) == observation:
                out.add((j, t2))
    return frozenset(out)


def decide_nc2(family: NormFamily) -> RecognitionVerdict:
    """Can the observer reach a situation that pins down the active norm?

    Explores, breadth-first and memoized, the pairs (active state, set of all
    family states reachable under the same observation sequence).  Successful
    iff some reachable pair's set contains only active-member states; the
    witness is the active path leading there.
    """
    kripkes = family.kripkes()
    active = family.active

    def initial_subset(observation: str):
        out = set()
        for j, k in enumerate(kripkes):
            for t in k.initial:
                if family.obs(t) == observation:
                    out.add((j, t))
        return frozenset(out)

    def pure(subset) -> bool:
        return all(j == active for j, _ in subset)

    parent: dict = {}
    start_states = sorted(kripkes[active].initial)
    frontier = deque()
    seen = set()
    for s in start_states:
        node = (s, initial_subset(family.obs(s)))
        if node in seen:
            continue
        seen.add(node)
        parent[node] = None
        if pure(node[1]):
            return RecognitionVerdict("nc2", True, (s,))
        frontier.append(node)

    while frontier:
        node = frontier.popleft()
        s, subset = node
        for s2 in kripkes[active].successors(s):
            nxt = (s2, _subset_successors(family, kripkes, subset, family.obs(s2)))
            if nxt in seen:
                continue
            seen.add(nxt)
            parent[nxt] = node
            if pure(nxt[1]):
                path = [nxt]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                path.reverse()
                return RecognitionVerdict("nc2", True, tuple(p[0] for p in path))
            frontier.append(nxt)
    return RecognitionVerdict("nc2", False)


def explored_subset_states(family: NormFamily):
    """All (active state, matched set) pairs the decider can reach; the
    exploration order matches :func:`decide_nc2`.  Exposed for invariant
    checks in tests."""
    kripkes = family.kripkes()
    out = []
    seen = set()
    frontier = deque()
    for s in sorted(kripkes[family.active].initial):
        subset = set()
        for j, k in enumerate(kripkes):
            for t in k.initial:
                if family.obs(t) == family.obs(s):
                    subset.add((j, t))
        node = (s, frozenset(subset))
        if node not in seen:
            seen.add(node)
            out.append(node)
            frontier.append(node)
    while frontier:
        s, subset = frontier.popleft()
        for s2 in kripkes[family.active].successors(s):
            nxt = (s2, _subset_successors(family, kripkes, subset, family.obs(s2)))
            if nxt not in seen:
                seen.add(nxt)
                out.append(nxt)
                frontier.append(nxt)
    return out


def replay_nc2_witness(family: NormFamily, path) -> bool:
    """Check a successful-verdict witness against the definition: the path is
    a real active run whose observation sequence is matched by no rival run."""
    path = tuple(path)
    if not path:
        return False
    kripkes = family.kripkes()
    active = kripkes[family.active]
    if path[0] not in active.initial:
        return False
    for a, b in zip(path, path[1:]):
        if b not in active.successors(a):
            return False
    rivals = {
        j: {t for t in kripkes[j].initial if family.obs(t) == family.obs(path[0])}
        for j in range(len(kripkes))
        if j != family.active
    }
    for state in path[1:]:
        observation = family.obs(state)
        for j in rivals:
            rivals[j] = {
                t2
                for t in rivals[j]
                for t2 in kripkes[j].successors(t)
                if family.obs(t2) == observation
            }
    return all(not matched for matched in rivals.values())


def nc1_bruteforce(family: NormFamily, depth: int):
    """Depth-first enumeration of observation-matched run pairs.

    Walks pairs (active run, rival run) step by step, extending only when the
    destination observations agree; the first pair state repeated along the
    current pair path closes a differing-index lasso, which is returned.  A
    depth of |synchronized product| + 1 guarantees the search is exhaustive.
    Independent of :func:`decide_nc1`; for tiny instances only.
    """
    if len(family.members) < 2:
        return None
    kripkes = family.kripkes()
    active = family.active

    starts = []
    for s in sorted(kripkes[active].initial):
        for j in range(len(kripkes)):
            if j == active:
                continue
            for t in sorted(kripkes[j].initial):
                if family.obs(s) == family.obs(t):
                    starts.append((s, j, t))

    def decode(path, loop_start):
        active_lasso = Lasso(tuple(p[0] for p in path), loop_start)
        rival_lasso = Lasso(tuple(p[2] for p in path), loop_start)
        return (active_lasso, path[0][1], rival_lasso)

    def dfs(path, positions):
        s, j, t = path[-1]
        if len(path) > depth:
            return None
        for s2 in kripkes[active].successors(s):
            for t2 in kripkes[j].successors(t):
                if family.obs(s2) != family.obs(t2):
                    continue
                step = (s2, j, t2)
                if step in positions:
                    return decode(list(path), positions[step])
                positions[step] = len(path)
                path.append(step)
                found = dfs(path, positions)
                if found is not None:
                    return found
                path.pop()
                del positions[step]
        return None

    for start in starts:
        found = dfs([start], {start: 0})
        if found is not None:
            return found
    return None


def nc2_bruteforce(family: NormFamily, depth: int):
    """Breadth-first enumeration of finite active runs up to ``depth`` states.

    For each run, materializes the set of rival states reachable under the
    same observation sequence; returns the first run whose set is empty (its
    observation class is index-pure).  No memoization; tiny instances only.
    """
    kripkes = family.kripkes()
    active = family.active

    def rivals_for(observation: str):
        out = {}
        for j, k in enumerate(kripkes):
            if j == active:
                continue
            out[j] = frozenset(t for t in k.initial if family.obs(t) == observation)
        return out

    queue = deque()
    for s in sorted(kripkes[active].initial):
        rivals = rivals_for(family.obs(s))
        if all(not matched for matched in rivals.values()):
            return (s,)
        queue.append(((s,), rivals))

    while queue:
        path, rivals = queue.popleft()
        if len(path) >= depth:
            continue
        for s2 in kripkes[active].successors(path[-1]):
            observation = family.obs(s2)
            stepped = {
                j: frozenset(
                    t2
                    for t in matched
                    for t2 in kripkes[j].successors(t)
                    if family.obs(t2) == observation
                )
                for j, matched in rivals.items()
            }
            new_path = path + (s2,)
            if all(not matched for matched in stepped.values()):
                return new_path
            queue.append((new_path, stepped))
    return None


# ---------------------------------------------------------------------------
# Hard recognition instances from nondeterministic finite automata


@dataclass(frozen=True)
class NFA:
    """A nondeterministic finite automaton (one initial state, no epsilons)."""

    states: frozenset[str]
    initial: str
    transitions: dict[tuple[str, str], frozenset[str]]
    finals: frozenset[str]
    alphabet: frozenset[str]

    def step(self, state: str, symbol: str) -> frozenset[str]:
        return self.transitions.get((state, symbol), frozenset())


_RUN_CHOICE = "choose-run"
_WORD_CHOICE = "choose-word"


def build_nfa_recognition_instance(nfa: NFA) -> tuple[MAS, NormFamily]:
    """Package an automaton as a norm-recognition instance.

    The single-agent system starts in a choice state: one action enters a
    subsystem whose states trace the automaton's runs (dead steps fall into an
    absorbing sink), the other enters a subsystem freely tracing every word.
    The active norm forbids the run side, its rival forbids the word side, and
    the observer sees the last symbol, so identifying the active norm is
    exactly exhibiting a word the automaton cannot run on.
    """
    if not nfa.alphabet:
        raise ValueError("the automaton needs a nonempty alphabet")
    if {_RUN_CHOICE, _WORD_CHOICE} & nfa.alphabet:
        raise ValueError("alphabet collides with the branch action names")

    sigma = sorted(nfa.alphabet)
    sigma_bot = ["bot"] + sigma
    if "bot" in nfa.alphabet:
        raise ValueError("'bot' is reserved for the padding symbol")

    start, sink = "start", "sink"
    run_state = lambda sym, q: f"run|{sym}|{q}"
    word_state = lambda sym: f"word|{sym}"

    states = {start, sink}
    states.update(run_state(a, q) for a in sigma_bot for q in sorted(nfa.states))
    states.update(word_state(a) for a in sigma_bot)

    transitions: set[tuple[str, tuple[str, ...], str]] = set()
    transitions.add((start, (_RUN_CHOICE,), run_state("bot", nfa.initial)))
    transitions.add((start, (_WORD_CHOICE,), word_state("bot")))
    for a in sigma_bot:
        for q in sorted(nfa.states):
            for sym in sigma:
                dests = nfa.step(q, sym)
                if dests:
                    for q2 in sorted(dests):
                        transitions.add((run_state(a, q), (sym,), run_state(sym, q2)))
                else:
                    transitions.add((run_state(a, q), (sym,), sink))
        for sym in sigma:
            transitions.add((word_state(a), (sym,), word_state(sym)))
    for sym in sigma:
        transitions.add((sink, (sym,), sink))

    observation = {start: "init", sink: "bot"}
    for a in sigma_bot:
        observation[word_state(a)] = a
        for q in sorted(nfa.states):
            observation[run_state(a, q)] = a

    availability = {
        s: frozenset({_RUN_CHOICE, _WORD_CHOICE}) if s == start else frozenset(sigma)
        for s in states
    }
    mas = MAS(
        agents=("x",),
        states=frozenset(states),
        actions={"x": frozenset(sigma) | {_RUN_CHOICE, _WORD_CHOICE}},
        availability={"x": availability},
        initial=frozenset({start}),
        transitions=frozenset(transitions),
        observations={"x": observation},
        labels={},
    )
    block_run = NormativeSystem(
        frozenset({"t0"}), "t0", {(start, "t0"): frozenset({(_RUN_CHOICE,)})}
    )
    block_word = NormativeSystem(
        frozenset({"t1"}), "t1", {(start, "t1"): frozenset({(_WORD_CHOICE,)})}
    )
    family = NormFamily(mas, (block_run, block_word), 0, dict(observation))
    return mas, family


def nfa_run_universal(nfa: NFA) -> bool:
    """True iff every finite word admits at least one run.

    Subset construction: universal exactly when the empty subset is not
    reachable from the initial singleton.
    """
    if not nfa.alphabet:
        return True
    start = frozenset({nfa.initial})
    seen = {start}
    queue = deque([start])
    while queue:
        subset = queue.popleft()
        for sym in sorted(nfa.alphabet):
            nxt = frozenset(q2 for q in subset for q2 in nfa.step(q, sym))
            if not nxt:
                return False
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return True
