"""Multiagent systems, norm automata, and the norm-applied product structure.

A :class:`MAS` is a finite multiagent system: every agent picks one local
action per step, the environment moves on the joint action, and each agent
only sees the value of its observation function.  A :class:`NormativeSystem`
is an automaton that forbids joint actions depending on both the environment
state and its own normative state, and updates the normative state as the
environment moves.  Applying a norm to a system yields a
:class:`KripkeStructure` over (state, normative state) pairs, which is what
the temporal-logic layer checks.

All identifiers (states, actions, normative states, observation values,
atomic propositions) are plain strings; joint actions are tuples of local
action names in the system's agent order.  Everything here is treated as
immutable: operations are pure functions of their arguments.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

JointAction = tuple[str, ...]
ProductState = tuple[str, str]

_EMPTY: frozenset = frozenset()


@dataclass(frozen=True)
class Violation:
    """One broken invariant, naming the rule and the offending subject."""

    invariant: str
    subject: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"{self.invariant}: {self.subject}"
        if self.detail:
            text += f" ({self.detail})"
        return text


@dataclass
class ValidationReport:
    """Collected invariant violations; empty means the input is well formed."""

    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, invariant: str, subject: str, detail: str = "") -> None:
        self.violations.append(Violation(invariant, subject, detail))

    def summary(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(str(v) for v in self.violations[:5]) + (
            f"; and {len(self.violations) - 5} more" if len(self.violations) > 5 else ""
        )


class ValidationError(ValueError):
    """An operation required valid inputs but validation reported violations."""

    def __init__(self, what: str, report: ValidationReport):
        self.report = report
        super().__init__(f"{what}: {report.summary()}")


@dataclass(frozen=True)
class MAS:
    """A finite multiagent system with per-agent availability and observations.

    Fields:
      agents:        agent identifiers, in the order used by joint actions.
      states:        environment state identifiers.
      actions:       per agent, its full local action alphabet.
      availability:  per agent, state -> nonempty set of available actions.
      initial:       nonempty set of initial states.
      transitions:   (state, joint action, state) triples.  Only joint actions
                     that are componentwise available at the source are
                     meaningful, and every available joint action must have at
                     least one successor (seriality).
      observations:  per agent, state -> observation value.  Agents whose
                     observations coincide on two states must have identical
                     availability there.
      labels:        state -> set of atomic propositions (entries for
                     unlabeled states may be omitted).
    """

    agents: tuple[str, ...]
    states: frozenset[str]
    actions: dict[str, frozenset[str]]
    availability: dict[str, dict[str, frozenset[str]]]
    initial: frozenset[str]
    transitions: frozenset[tuple[str, JointAction, str]]
    observations: dict[str, dict[str, str]]
    labels: dict[str, frozenset[str]]

    def label(self, state: str) -> frozenset[str]:
        return self.labels.get(state, _EMPTY)


def available_joint_actions(mas: MAS, state: str) -> frozenset[JointAction]:
    """Cartesian product of the agents' available actions at ``state``."""
    if state not in mas.states:
        raise ValueError(f"unknown state id: {state!r}")
    pools = [sorted(mas.availability[agent].get(state, ())) for agent in mas.agents]
    return frozenset(itertools.product(*pools))


def transition_index(mas: MAS) -> dict[tuple[str, JointAction], tuple[str, ...]]:
    """Map (source, joint action) to the sorted tuple of successors."""
    index: dict[tuple[str, JointAction], list[str]] = {}
    for src, action, dst in mas.transitions:
        index.setdefault((src, action), []).append(dst)
    return {key: tuple(sorted(dsts)) for key, dsts in index.items()}


def validate_mas(mas: MAS) -> ValidationReport:
    """Check every MAS invariant; violations are data, not exceptions."""
    report = ValidationReport()
    if not mas.agents:
        report.add("agents-nonempty", "system", "a system needs at least one agent")
    if not mas.states:
        report.add("states-nonempty", "system", "a system needs at least one state")
    if not mas.agents or not mas.states:
        return report

    if len(set(mas.agents)) != len(mas.agents):
        report.add("agents-distinct", ",".join(mas.agents))

    if not mas.initial:
        report.add("initial-nonempty", "system")
    for state in sorted(mas.initial - mas.states):
        report.add("initial-subset", state, "initial state not declared")

    for agent in mas.agents:
        if agent not in mas.actions:
            report.add("actions-missing", agent)
        avail = mas.availability.get(agent)
        if avail is None:
            report.add("availability-missing", agent, "no availability map")
            continue
        alphabet = mas.actions.get(agent, _EMPTY)
        for state in sorted(mas.states):
            acts = avail.get(state)
            if acts is None:
                report.add("availability-missing", f"agent {agent}, state {state}")
            elif not acts:
                report.add("availability-empty", f"agent {agent}, state {state}")
            else:
                for act in sorted(acts - alphabet):
                    report.add(
                        "availability-unknown-action",
                        f"agent {agent}, state {state}",
                        f"action {act} not in the agent's alphabet",
                    )
        obs = mas.observations.get(agent)
        if obs is None:
            report.add("observation-missing", agent, "no observation map")
        else:
            for state in sorted(mas.states - obs.keys()):
                report.add("observation-missing", f"agent {agent}, state {state}")

    arity = len(mas.agents)
    for src, action, dst in sorted(mas.transitions):
        subject = f"{src} -{','.join(action)}-> {dst}"
        if len(action) != arity:
            report.add("transition-arity", subject, f"expected {arity} components")
            continue
        if src not in mas.states or dst not in mas.states:
            report.add("transition-endpoint", subject, "endpoint not declared")
            continue
        for agent, act in zip(mas.agents, action):
            if act not in mas.availability.get(agent, {}).get(src, _EMPTY):
                report.add(
                    "transition-unavailable-action",
                    subject,
                    f"{act} not available to {agent} at {src}",
                )

    # Seriality over available joint actions: every available joint action
    # must be able to fire.
    if report.ok:
        index = transition_index(mas)
        for state in sorted(mas.states):
            for action in sorted(available_joint_actions(mas, state)):
                if (state, action) not in index:
                    report.add(
                        "seriality",
                        f"state {state}, action ({','.join(action)})",
                        "available joint action has no transition",
                    )

    # Observation/availability consistency: same observation implies the same
    # set of next available actions.
    for agent in mas.agents:
        obs = mas.observations.get(agent)
        avail = mas.availability.get(agent)
        if obs is None or avail is None:
            continue
        seen: dict[str, tuple[str, frozenset[str]]] = {}
        for state in sorted(mas.states):
            if state not in obs or state not in avail:
                continue
            value = obs[state]
            if value in seen:
                other, acts = seen[value]
                if acts != avail[state]:
                    report.add(
                        "observation-availability",
                        f"agent {agent}, states {other}/{state}",
                        f"equal observation {value!r} but different availability",
                    )
            else:
                seen[value] = (state, avail[state])
    return report


@dataclass(frozen=True)
class NormativeSystem:
    """A norm automaton: forbid joint actions per (state, normative state).

    ``forbids`` maps (environment state, normative state) to the set of
    forbidden joint actions; missing entries forbid nothing.  ``update`` maps
    (normative state, destination environment state) to the next normative
    state; missing entries keep the current one, so the update function is
    total by construction.  Both tables are normalized on construction (empty
    forbid entries and self-loop updates are dropped) so that equal behaviour
    means equal value.
    """

    norm_states: frozenset[str]
    initial: str
    forbids: dict[tuple[str, str], frozenset[JointAction]] = field(default_factory=dict)
    update: dict[tuple[str, str], str] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {key: frozenset(acts) for key, acts in self.forbids.items() if acts}
        object.__setattr__(self, "forbids", cleaned)
        moves = {key: dst for key, dst in self.update.items() if dst != key[0]}
        object.__setattr__(self, "update", moves)

    def forbidden(self, state: str, norm_state: str) -> frozenset[JointAction]:
        return self.forbids.get((state, norm_state), _EMPTY)

    def next_norm(self, norm_state: str, dest: str) -> str:
        return self.update.get((norm_state, dest), norm_state)

    @property
    def is_static(self) -> bool:
        return len(self.norm_states) == 1


def identity_norm() -> NormativeSystem:
    """The single-state norm that forbids nothing anywhere."""
    return NormativeSystem(frozenset({"q0"}), "q0")


def validate_norm(mas: MAS, norm: NormativeSystem) -> ValidationReport:
    """Check a norm automaton against its system (assumes ``mas`` is valid)."""
    report = ValidationReport()
    if not norm.norm_states:
        report.add("norm-states-nonempty", "norm")
        return report
    if norm.initial not in norm.norm_states:
        report.add("initial-norm-unknown", norm.initial)

    avail_cache: dict[str, frozenset[JointAction]] = {}

    def avail(state: str) -> frozenset[JointAction]:
        if state not in avail_cache:
            avail_cache[state] = available_joint_actions(mas, state)
        return avail_cache[state]

    for (state, nstate), acts in sorted(norm.forbids.items()):
        subject = f"state {state}, normative state {nstate}"
        if state not in mas.states:
            report.add("forbids-unknown-state", subject)
            continue
        if nstate not in norm.norm_states:
            report.add("forbids-unknown-norm-state", subject)
            continue
        allowed = avail(state)
        stray = acts - allowed
        if stray:
            report.add(
                "forbids-unavailable-action",
                subject,
                f"{len(stray)} forbidden joint action(s) are not available there",
            )
        if acts >= allowed:
            report.add(
                "forbids-eliminates-all",
                subject,
                "no available joint action survives",
            )

    for (nstate, state), target in sorted(norm.update.items()):
        subject = f"normative state {nstate}, state {state}"
        if nstate not in norm.norm_states:
            report.add("update-unknown-norm-state", subject)
        if state not in mas.states:
            report.add("update-unknown-state", subject)
        if target not in norm.norm_states:
            report.add("update-unknown-target", f"{subject} -> {target}")
    return report


def make_static(mas: MAS, delta: dict[str, frozenset[JointAction]]) -> NormativeSystem:
    """Build the single-state norm forbidding ``delta[s]`` at each state ``s``.

    States outside the map forbid nothing.  Raises ValidationError when some
    entry would eliminate all available joint actions (or refers to unknown
    states/actions).
    """
    norm = NormativeSystem(
        frozenset({"q0"}),
        "q0",
        {(state, "q0"): frozenset(acts) for state, acts in delta.items()},
    )
    report = validate_norm(mas, norm)
    if not report.ok:
        raise ValidationError("invalid static norm", report)
    return norm


@dataclass
class KripkeStructure:
    """The norm-applied product: states are (environment, normative) pairs.

    ``edges`` maps each state to its sorted successor tuple; labels project
    the environment state's atomic propositions.  ``apply_norm`` only builds
    the part reachable from the initial states, which is the fragment all
    later analyses work on.
    """

    states: frozenset[ProductState]
    initial: frozenset[ProductState]
    edges: dict[ProductState, tuple[ProductState, ...]]
    labels: dict[ProductState, frozenset[str]]
    mas: MAS | None = None
    norm: NormativeSystem | None = None

    def successors(self, state: ProductState) -> tuple[ProductState, ...]:
        return self.edges.get(state, ())

    def label(self, state: ProductState) -> frozenset[str]:
        return self.labels.get(state, _EMPTY)


def apply_norm(mas: MAS, norm: NormativeSystem, validate: bool = True) -> KripkeStructure:
    """Product of a system and a norm, restricted to the reachable part.

    An edge (s1,q1) -> (s2,q2) exists iff some joint action available at s1
    and not forbidden at (s1,q1) moves the system to s2, and q2 is the norm's
    update for destination s2.
    """
    if validate:
        report = validate_mas(mas)
        if not report.ok:
            raise ValidationError("invalid multiagent system", report)
        report = validate_norm(mas, norm)
        if not report.ok:
            raise ValidationError("invalid normative system", report)

    index = transition_index(mas)
    avail_cache: dict[str, list[JointAction]] = {}
    initial = frozenset((s, norm.initial) for s in mas.initial)
    edges: dict[ProductState, tuple[ProductState, ...]] = {}
    labels: dict[ProductState, frozenset[str]] = {}
    queue: deque[ProductState] = deque(sorted(initial))
    seen: set[ProductState] = set(initial)
    while queue:
        state, nstate = queue.popleft()
        if state not in avail_cache:
            avail_cache[state] = sorted(available_joint_actions(mas, state))
        banned = norm.forbidden(state, nstate)
        succs: set[ProductState] = set()
        for action in avail_cache[state]:
            if action in banned:
                continue
            for dest in index.get((state, action), ()):
                succs.add((dest, norm.next_norm(nstate, dest)))
        edges[(state, nstate)] = tuple(sorted(succs))
        labels[(state, nstate)] = mas.label(state)
        for nxt in sorted(succs):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return KripkeStructure(frozenset(seen), initial, edges, labels, mas, norm)


def reachable(structure: KripkeStructure) -> frozenset[ProductState]:
    """Least set containing the initial states and closed under the edges."""
    seen: set[ProductState] = set(structure.initial)
    queue: deque[ProductState] = deque(sorted(structure.initial))
    while queue:
        state = queue.popleft()
        for nxt in structure.successors(state):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return frozenset(seen)
