"""Deciding norm existence by sound bounded enumeration.

Static (single-state) norms are enumerated exactly: a candidate picks, for
every reachable state with at least two available joint actions, the
nonempty subset of actions that survive.  Dynamic norms are searched by
iterative deepening over the number of normative states: candidates are
grown depth-first along the reachable (state, normative state) frontier,
choosing per frontier pair the surviving action subset and per
(normative state, destination) pair the update target.  Normative states are
numbered in order of first use, which prunes renamings of the same candidate;
behaviour on pairs never reached is fixed to forbid-nothing/keep-state, so
emitted norms are total.  Every completed candidate is model checked, and the
first verifying one is returned.

A bound that exhausts without a hit answers "none exists" for that bound
only; the caller picks the bound, and outcomes report how many candidates
were tried so wall-clock or candidate budgets can cut searches short.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

from .ctl import Formula, check
from .model import (
    MAS,
    JointAction,
    NormativeSystem,
    ValidationError,
    apply_norm,
    available_joint_actions,
    transition_index,
    validate_mas,
)

FOUND = "found"
NONE_EXISTS = "none-exists"
BUDGET_EXCEEDED = "budget-exceeded"


@dataclass(frozen=True)
class SynthesisBudget:
    """Limits on a synthesis run; ``None`` means unlimited.

    A candidate budget of 0 is allowed and makes any search report budget
    exhaustion immediately.
    """

    max_candidates: int | None = None
    max_seconds: float | None = None

    def __post_init__(self):
        if self.max_candidates is not None and self.max_candidates < 0:
            raise ValueError("max_candidates must be nonnegative")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise ValueError("max_seconds must be positive")


@dataclass(frozen=True)
class SynthesisOutcome:
    """Found(norm), none-exists up to the searched bound, or budget exceeded."""

    status: str
    norm: NormativeSystem | None = None
    bound: int | None = None
    candidates_tried: int = 0

    @property
    def found(self) -> bool:
        return self.status == FOUND


def verify(mas: MAS, norm: NormativeSystem, formula: Formula) -> bool:
    """Model check the objective on the norm-applied product (validating)."""
    return check(apply_norm(mas, norm), formula)


def _validated(mas: MAS) -> None:
    report = validate_mas(mas)
    if not report.ok:
        raise ValidationError("invalid multiagent system", report)


class _BudgetExceeded(Exception):
    pass


class _Counter:
    def __init__(self, budget: SynthesisBudget):
        self.tried = 0
        self.max_candidates = budget.max_candidates
        self.deadline = (
            time.monotonic() + budget.max_seconds if budget.max_seconds else None
        )

    def charge(self) -> None:
        if self.max_candidates is not None and self.tried >= self.max_candidates:
            raise _BudgetExceeded
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _BudgetExceeded
        self.tried += 1


def _nonempty_subsets(actions: list[JointAction]):
    """All nonempty subsets of ``actions`` in deterministic bitmask order."""
    for mask in range(1, 1 << len(actions)):
        yield tuple(a for bit, a in enumerate(actions) if mask >> bit & 1)


def synthesize_static(
    mas: MAS, formula: Formula, budget: SynthesisBudget | None = None
) -> SynthesisOutcome:
    """Exhaustive search over single-state norms.

    Restrictions are only placed on reachable states offering at least two
    joint actions; other states cannot be restricted (at least one action
    must survive) or cannot matter (a norm never makes new states reachable).
    """
    budget = budget or SynthesisBudget()
    _validated(mas)
    counter = _Counter(budget)

    structure = apply_norm(mas, NormativeSystem(frozenset({"q0"}), "q0"), validate=False)
    reach = sorted({s for s, _ in structure.states})
    avail = {s: sorted(available_joint_actions(mas, s)) for s in reach}
    choice_states = [s for s in reach if len(avail[s]) >= 2]
    options = [list(_nonempty_subsets(avail[s])) for s in choice_states]

    try:
        for combo in itertools.product(*options):
            counter.charge()
            forbids = {}
            for state, survivors in zip(choice_states, combo):
                banned = frozenset(set(avail[state]) - set(survivors))
                if banned:
                    forbids[(state, "q0")] = banned
            candidate = NormativeSystem(frozenset({"q0"}), "q0", forbids)
            if check(apply_norm(mas, candidate, validate=False), formula):
                return SynthesisOutcome(FOUND, candidate, 1, counter.tried)
    except _BudgetExceeded:
        return SynthesisOutcome(BUDGET_EXCEEDED, None, 1, counter.tried)
    return SynthesisOutcome(NONE_EXISTS, None, 1, counter.tried)


class _DynamicSearch:
    """Depth-first construction of dynamic candidates at a fixed state bound."""

    def __init__(self, mas: MAS, formula: Formula, k: int, counter: _Counter):
        self.mas = mas
        self.formula = formula
        self.k = k
        self.counter = counter
        self.tindex = transition_index(mas)
        self.avail: dict[str, list[JointAction]] = {}
        self.survive: dict[tuple[str, int], tuple[JointAction, ...]] = {}
        self.upd: dict[tuple[int, str], int] = {}
        self.agenda: list[tuple[str, int]] = []
        self.seen: set[tuple[str, int]] = set()
        self.used = 1

    def actions_at(self, state: str) -> list[JointAction]:
        if state not in self.avail:
            self.avail[state] = sorted(available_joint_actions(self.mas, state))
        return self.avail[state]

    def run(self) -> NormativeSystem | None:
        self.agenda = [(s, 0) for s in sorted(self.mas.initial)]
        self.seen = set(self.agenda)
        return self._expand(0)

    def _expand(self, idx: int) -> NormativeSystem | None:
        if idx == len(self.agenda):
            return self._complete()
        state, nstate = self.agenda[idx]
        actions = self.actions_at(state)
        for survivors in _nonempty_subsets(actions):
            dests = sorted({d for a in survivors for d in self.tindex.get((state, a), ())})
            self.survive[(state, nstate)] = survivors
            found = self._assign(dests, 0, nstate, idx)
            del self.survive[(state, nstate)]
            if found is not None:
                return found
        return None

    def _assign(self, dests, di: int, nstate: int, idx: int) -> NormativeSystem | None:
        if di == len(dests):
            added = []
            for dest in dests:
                pair = (dest, self.upd[(nstate, dest)])
                if pair not in self.seen:
                    self.seen.add(pair)
                    self.agenda.append(pair)
                    added.append(pair)
            found = self._expand(idx + 1)
            for pair in reversed(added):
                self.agenda.pop()
                self.seen.discard(pair)
            return found
        key = (nstate, dests[di])
        if key in self.upd:
            return self._assign(dests, di + 1, nstate, idx)
        # Existing normative states first, then at most one fresh one: fresh
        # states are numbered in order of first use, so renamings of the same
        # candidate are never revisited.
        ceiling = self.used + 1 if self.used < self.k else self.used
        for target in range(ceiling):
            fresh = target == self.used
            if fresh:
                self.used += 1
            self.upd[key] = target
            found = self._assign(dests, di + 1, nstate, idx)
            del self.upd[key]
            if fresh:
                self.used -= 1
            if found is not None:
                return found
        return None

    def _complete(self) -> NormativeSystem | None:
        self.counter.charge()
        candidate = self._build()
        structure = apply_norm(self.mas, candidate, validate=False)
        if check(structure, self.formula):
            return candidate
        return None

    def _build(self) -> NormativeSystem:
        norm_states = frozenset(f"q{i}" for i in range(self.used))
        forbids = {}
        for (state, nstate), survivors in self.survive.items():
            banned = frozenset(set(self.actions_at(state)) - set(survivors))
            if banned:
                forbids[(state, f"q{nstate}")] = banned
        update = {
            (f"q{src}", state): f"q{dst}"
            for (src, state), dst in self.upd.items()
            if src != dst
        }
        return NormativeSystem(norm_states, "q0", forbids, update)


def synthesize_dynamic(
    mas: MAS, formula: Formula, k_max: int, budget: SynthesisBudget | None = None
) -> SynthesisOutcome:
    """Iterative deepening over the number of normative states, 1..k_max.

    At bound 1 the candidate space coincides with the static one.  Raising
    the bound only adds candidates, so a hit at some bound stays a hit at any
    larger bound.
    """
    if k_max < 1:
        raise ValueError("k_max must be positive")
    budget = budget or SynthesisBudget()
    _validated(mas)
    counter = _Counter(budget)
    for k in range(1, k_max + 1):
        search = _DynamicSearch(mas, formula, k, counter)
        try:
            found = search.run()
        except _BudgetExceeded:
            return SynthesisOutcome(BUDGET_EXCEEDED, None, k, counter.tried)
        if found is not None:
            return SynthesisOutcome(FOUND, found, k, counter.tried)
    return SynthesisOutcome(NONE_EXISTS, None, k_max, counter.tried)
