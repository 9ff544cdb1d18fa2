"""Shared builders for the test suite: pinned instances and random generators.

Random generators construct inputs that are valid by construction (seeded,
so every test run sees the same cases).  The brute-force synthesis
enumerator here is the uncanonicalized oracle: it materializes every
candidate over the full reachable state set, without any isomorphism
pruning, and reports whether any candidate verifies.
"""

from __future__ import annotations

import itertools
import random

from normbench import ctl
from normbench.ecosystem import EcoConfig, gen_ecosystem, new_agent_observation_map
from normbench.model import (
    MAS,
    KripkeStructure,
    NormativeSystem,
    apply_norm,
    available_joint_actions,
    identity_norm,
)
from normbench.recognition import NormFamily


# --- pinned ecosystem instances -------------------------------------------

def instantiation() -> EcoConfig:
    """Two producers (goods g1, g2, capacity 1 each), three consumers."""
    return EcoConfig(
        goods=("g1", "g2"),
        capacities=(1, 1),
        requirements=(("g1",), ("g2",), ("g1", "g2")),
    )


def simple_case() -> EcoConfig:
    """One producer with capacity 1, two consumers asking for its good."""
    return EcoConfig(goods=("g1",), capacities=(1,), requirements=(("g1",), ("g1",)))


def recognition_case(cancel: bool = False) -> EcoConfig:
    """One producer, three consumers all wanting g1, plus the new consumer."""
    return EcoConfig(
        goods=("g1",),
        capacities=(1,),
        requirements=(("g1",), ("g1",), ("g1",)),
        include_new_agent=True,
        cancel_rule=cancel,
    )


def eco_family(cfg: EcoConfig, members, active: int = 0) -> NormFamily:
    return NormFamily(gen_ecosystem(cfg), tuple(members), active, new_agent_observation_map(cfg))


def toy_go_stay() -> MAS:
    """One agent; 'go' moves from u to v, 'stay' self-loops; p labels v."""
    return MAS(
        agents=("a",),
        states=frozenset({"u", "v"}),
        actions={"a": frozenset({"go", "stay"})},
        availability={"a": {"u": frozenset({"go", "stay"}), "v": frozenset({"stay"})}},
        initial=frozenset({"u"}),
        transitions=frozenset(
            {("u", ("go",), "v"), ("u", ("stay",), "u"), ("v", ("stay",), "v")}
        ),
        observations={"a": {"u": "at-u", "v": "at-v"}},
        labels={"v": frozenset({"p"})},
    )


# --- random structures ------------------------------------------------------

def random_kripke(rng: random.Random, max_states: int = 50) -> KripkeStructure:
    """A random serial structure with up to three atoms per state."""
    count = rng.randint(1, max_states)
    states = [(f"s{i}", "q0") for i in range(count)]
    edges = {}
    for s in states:
        degree = rng.randint(1, min(3, count))
        edges[s] = tuple(sorted(rng.sample(states, degree)))
    labels = {}
    for s in states:
        atoms = {p for p in ("p", "q", "r") if rng.random() < 0.4}
        if atoms:
            labels[s] = frozenset(atoms)
    initial = frozenset(rng.sample(states, rng.randint(1, count)))
    return KripkeStructure(frozenset(states), initial, edges, labels)


def random_formula(rng: random.Random, depth: int, atoms=("p", "q", "r", "zz")) -> ctl.Formula:
    """A random formula over the given atoms ("zz" labels no state)."""
    if depth == 0 or rng.random() < 0.2:
        roll = rng.random()
        if roll < 0.1:
            return ctl.TRUE
        if roll < 0.2:
            return ctl.FALSE
        return ctl.Atom(rng.choice(atoms))
    unary = [ctl.Not, ctl.EX, ctl.AX, ctl.EF, ctl.AF, ctl.EG, ctl.AG]
    binary = [ctl.And, ctl.Or, ctl.Implies, ctl.EU, ctl.AU]
    if rng.random() < 0.55:
        op = rng.choice(unary)
        return op(random_formula(rng, depth - 1, atoms))
    op = rng.choice(binary)
    return op(random_formula(rng, depth - 1, atoms), random_formula(rng, depth - 1, atoms))


def random_mas(rng: random.Random, max_states: int = 4, max_agents: int = 2) -> MAS:
    """A random valid system: availability is constant per observation class
    and every available joint action gets at least one successor."""
    n_states = rng.randint(2, max_states)
    states = [f"s{i}" for i in range(n_states)]
    n_agents = rng.randint(1, max_agents)
    agents = tuple(f"a{i}" for i in range(n_agents))
    actions = {}
    availability = {}
    observations = {}
    for agent in agents:
        alphabet = [f"{agent}x{k}" for k in range(rng.randint(2, 3))]
        actions[agent] = frozenset(alphabet)
        n_classes = rng.randint(1, min(3, n_states))
        class_of = {s: rng.randrange(n_classes) for s in states}
        class_avail = {
            c: frozenset(rng.sample(alphabet, rng.randint(1, len(alphabet))))
            for c in range(n_classes)
        }
        availability[agent] = {s: class_avail[class_of[s]] for s in states}
        observations[agent] = {s: f"o{class_of[s]}" for s in states}
    transitions = set()
    for s in states:
        pools = [sorted(availability[a][s]) for a in agents]
        for action in itertools.product(*pools):
            for dest in rng.sample(states, rng.randint(1, min(2, n_states))):
                transitions.add((s, action, dest))
    labels = {}
    for s in states:
        atoms = {p for p in ("p", "q") if rng.random() < 0.5}
        if atoms:
            labels[s] = frozenset(atoms)
    initial = frozenset(rng.sample(states, rng.randint(1, n_states)))
    return MAS(
        agents=agents,
        states=frozenset(states),
        actions=actions,
        availability=availability,
        initial=initial,
        transitions=frozenset(transitions),
        observations=observations,
        labels=labels,
    )


def random_norm(rng: random.Random, mas: MAS, max_norm_states: int = 2) -> NormativeSystem:
    """A random valid norm over ``mas`` (never forbids everything)."""
    k = rng.randint(1, max_norm_states)
    norm_states = [f"n{i}" for i in range(k)]
    forbids = {}
    update = {}
    for state in sorted(mas.states):
        avail = sorted(available_joint_actions(mas, state))
        for nstate in norm_states:
            if len(avail) >= 2 and rng.random() < 0.5:
                banned = rng.sample(avail, rng.randint(1, len(avail) - 1))
                forbids[(state, nstate)] = frozenset(banned)
            if k > 1 and rng.random() < 0.6:
                update[(nstate, state)] = rng.choice(norm_states)
    return NormativeSystem(frozenset(norm_states), "n0", forbids, update)


def random_family(rng: random.Random, members: int = 2) -> NormFamily:
    mas = random_mas(rng)
    norms = tuple(random_norm(rng, mas) for _ in range(members))
    obs = {s: f"w{rng.randrange(3)}" for s in sorted(mas.states)}
    return NormFamily(mas, norms, 0, obs)


# --- automaton enumeration ---------------------------------------------------

def all_nfas(max_states: int, alphabet=("a", "b")):
    """Deduplicated transition-function enumeration of small automata.

    Enumerates every transition function over 1..max_states states (initial
    q0, all states final), restricts to the reachable part, and deduplicates
    up to renaming of the non-initial states (exact for <= 3 states, where at
    most two states can be swapped).
    """
    from normbench.recognition import NFA

    seen = set()
    for count in range(1, max_states + 1):
        keys = [(i, sym) for i in range(count) for sym in alphabet]
        subsets = [frozenset(c) for r in range(count + 1)
                   for c in itertools.combinations(range(count), r)]
        for choice in itertools.product(subsets, repeat=len(keys)):
            delta = dict(zip(keys, choice))
            reach = {0}
            frontier = [0]
            while frontier:
                i = frontier.pop()
                for sym in alphabet:
                    for j in delta[(i, sym)]:
                        if j not in reach:
                            reach.add(j)
                            frontier.append(j)
            others = sorted(reach - {0})
            best = None
            for perm in itertools.permutations(others):
                rename = {0: 0}
                rename.update({old: new + 1 for new, old in enumerate(perm)})
                fingerprint = tuple(
                    sorted(
                        (rename[i], sym, tuple(sorted(rename[j] for j in delta[(i, sym)] if j in reach)))
                        for (i, sym) in keys
                        if i in reach
                    )
                )
                if best is None or fingerprint < best:
                    best = fingerprint
            if best in seen:
                continue
            seen.add(best)
            states = frozenset(f"q{i}" for i in reach)
            transitions = {}
            for (i, sym), dests in delta.items():
                if i in reach:
                    kept = frozenset(f"q{j}" for j in dests if j in reach)
                    if kept:
                        transitions[(f"q{i}", sym)] = kept
            yield NFA(states, "q0", transitions, states, frozenset(alphabet))


# --- uncanonicalized synthesis oracle ---------------------------------------

def brute_force_exists(mas: MAS, formula: ctl.Formula, k: int) -> bool:
    """Does any norm with at most ``k`` normative states enforce the formula?

    Materializes every candidate: all survivor choices per (choice state,
    normative state) pair and all update maps over (normative state,
    destination) pairs, with no canonical numbering.  Exponential; for tiny
    instances only.
    """
    structure = apply_norm(mas, identity_norm(), validate=False)
    reach = sorted({s for s, _ in structure.states})
    avail = {s: sorted(available_joint_actions(mas, s)) for s in reach}
    choice_states = [s for s in reach if len(avail[s]) >= 2]
    norm_states = [f"q{i}" for i in range(k)]

    survivor_options = []
    forb_keys = [(s, q) for s in choice_states for q in norm_states]
    for s, _ in forb_keys:
        acts = avail[s]
        options = []
        for mask in range(1, 1 << len(acts)):
            options.append(tuple(a for b, a in enumerate(acts) if mask >> b & 1))
        survivor_options.append(options)

    upd_keys = [(q, s) for q in norm_states for s in reach]
    upd_options = [norm_states] * len(upd_keys)

    for survivors in itertools.product(*survivor_options):
        forbids = {}
        for (s, q), keep in zip(forb_keys, survivors):
            banned = frozenset(set(avail[s]) - set(keep))
            if banned:
                forbids[(s, q)] = banned
        for targets in itertools.product(*upd_options):
            update = dict(zip(upd_keys, targets))
            norm = NormativeSystem(frozenset(norm_states), "q0", forbids, update)
            if ctl.check(apply_norm(mas, norm, validate=False), formula):
                return True
    return False
