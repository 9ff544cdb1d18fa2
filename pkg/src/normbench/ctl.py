"""CTL syntax and an explicit-state model checker over product structures.

Formulas are immutable trees.  The checker works on the core fragment
{atom, true, not, or, EX, EU, EG}; every other operator is rewritten into it
by :func:`normalize` using the standard identities

    EF f        = E[true U f]
    AG f        = !E[true U !f]
    AF f        = !EG !f
    AX f        = !EX !f
    A[f U g]    = !E[!g U (!f & !g)] & !EG !g

Satisfaction sets are computed over the reachable states only: formulas are
evaluated at initial states, and unreachable states never influence those.
Atoms that label no state simply evaluate to false, so formulas may mention
propositions outside a structure's labeling without erroring.

:func:`naive_sat_set` recomputes the same sets by chaotic full-scan fixpoint
iteration straight from the semantic clauses.  It exists as a differential
oracle for the optimized :func:`sat_set` and should only be used in tests.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import reduce

from .model import KripkeStructure, ProductState, reachable


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class EX(Formula):
    child: Formula


@dataclass(frozen=True)
class AX(Formula):
    child: Formula


@dataclass(frozen=True)
class EF(Formula):
    child: Formula


@dataclass(frozen=True)
class AF(Formula):
    child: Formula


@dataclass(frozen=True)
class EG(Formula):
    child: Formula


@dataclass(frozen=True)
class AG(Formula):
    child: Formula


@dataclass(frozen=True)
class EU(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class AU(Formula):
    left: Formula
    right: Formula


TRUE = Const(True)
FALSE = Const(False)


def conjoin(parts) -> Formula:
    """Left-associated conjunction of the given formulas (true if empty)."""
    parts = list(parts)
    if not parts:
        return TRUE
    return reduce(And, parts)


def normalize(formula: Formula) -> Formula:
    """Rewrite into the core fragment {Atom, Const(True), Not, Or, EX, EU, EG}.

    Idempotent: normalizing a normal form returns it unchanged.
    """
    if isinstance(formula, Atom):
        return formula
    if isinstance(formula, Const):
        return TRUE if formula.value else Not(TRUE)
    if isinstance(formula, Not):
        return Not(normalize(formula.child))
    if isinstance(formula, Or):
        return Or(normalize(formula.left), normalize(formula.right))
    if isinstance(formula, And):
        return Not(Or(Not(normalize(formula.left)), Not(normalize(formula.right))))
    if isinstance(formula, Implies):
        return Or(Not(normalize(formula.left)), normalize(formula.right))
    if isinstance(formula, EX):
        return EX(normalize(formula.child))
    if isinstance(formula, AX):
        return Not(EX(Not(normalize(formula.child))))
    if isinstance(formula, EF):
        return EU(TRUE, normalize(formula.child))
    if isinstance(formula, AG):
        return Not(EU(TRUE, Not(normalize(formula.child))))
    if isinstance(formula, AF):
        return Not(EG(Not(normalize(formula.child))))
    if isinstance(formula, EG):
        return EG(normalize(formula.child))
    if isinstance(formula, EU):
        return EU(normalize(formula.left), normalize(formula.right))
    if isinstance(formula, AU):
        left = normalize(formula.left)
        right = normalize(formula.right)
        no_right = Not(right)
        neither = Not(Or(left, right))
        return Not(Or(EU(no_right, neither), EG(no_right)))
    raise TypeError(f"not a formula: {formula!r}")


def atoms(formula: Formula) -> frozenset[str]:
    """All atomic proposition names mentioned in a formula."""
    if isinstance(formula, Atom):
        return frozenset({formula.name})
    if isinstance(formula, Const):
        return frozenset()
    if isinstance(formula, (Not, EX, AX, EF, AF, EG, AG)):
        return atoms(formula.child)
    if isinstance(formula, (And, Or, Implies, EU, AU)):
        return atoms(formula.left) | atoms(formula.right)
    raise TypeError(f"not a formula: {formula!r}")


def sat_set(structure: KripkeStructure, formula: Formula) -> frozenset[ProductState]:
    """States (among the reachable ones) satisfying ``formula``.

    EX is computed by a successor scan, EU by a backward least-fixpoint
    worklist over the predecessor relation, and EG by the greatest fixpoint
    (iteratively delete states that lost all successors inside the candidate
    set).
    """
    reach = reachable(structure)
    succs = {s: structure.successors(s) for s in reach}
    preds: dict[ProductState, list[ProductState]] = {s: [] for s in reach}
    for s, targets in succs.items():
        for t in targets:
            preds[t].append(s)

    memo: dict[Formula, frozenset[ProductState]] = {}

    def ev(f: Formula) -> frozenset[ProductState]:
        if f in memo:
            return memo[f]
        if isinstance(f, Atom):
            result = frozenset(s for s in reach if f.name in structure.label(s))
        elif isinstance(f, Const):
            result = reach
        elif isinstance(f, Not):
            result = reach - ev(f.child)
        elif isinstance(f, Or):
            result = ev(f.left) | ev(f.right)
        elif isinstance(f, EX):
            target = ev(f.child)
            result = frozenset(s for s in reach if any(t in target for t in succs[s]))
        elif isinstance(f, EU):
            hold = ev(f.left)
            result_set = set(ev(f.right))
            queue = deque(sorted(result_set))
            while queue:
                t = queue.popleft()
                for p in preds[t]:
                    if p in hold and p not in result_set:
                        result_set.add(p)
                        queue.append(p)
            result = frozenset(result_set)
        elif isinstance(f, EG):
            alive = set(ev(f.child))
            count = {s: sum(1 for t in succs[s] if t in alive) for s in alive}
            queue = deque(sorted(s for s in alive if count[s] == 0))
            while queue:
                s = queue.popleft()
                alive.discard(s)
                for p in preds[s]:
                    if p in alive:
                        count[p] -= 1
                        if count[p] == 0:
                            queue.append(p)
            result = frozenset(alive)
        else:
            raise TypeError(f"not in normal form: {f!r}")
        memo[f] = result
        return result

    return ev(normalize(formula))


def check(structure: KripkeStructure, formula: Formula) -> bool:
    """True iff every initial state satisfies the formula."""
    sat = sat_set(structure, formula)
    return all(s in sat for s in structure.initial)


def naive_sat_set(structure: KripkeStructure, formula: Formula) -> frozenset[ProductState]:
    """Same contract as :func:`sat_set`, by unoptimized chaotic iteration."""
    reach = reachable(structure)

    def image(target: frozenset[ProductState]) -> frozenset[ProductState]:
        return frozenset(
            s for s in reach if any(t in target for t in structure.successors(s))
        )

    def ev(f: Formula) -> frozenset[ProductState]:
        if isinstance(f, Atom):
            return frozenset(s for s in reach if f.name in structure.label(s))
        if isinstance(f, Const):
            return reach
        if isinstance(f, Not):
            return reach - ev(f.child)
        if isinstance(f, Or):
            return ev(f.left) | ev(f.right)
        if isinstance(f, EX):
            return image(ev(f.child))
        if isinstance(f, EU):
            hold, goal = ev(f.left), ev(f.right)
            current = goal
            while True:
                nxt = goal | (hold & image(current))
                if nxt == current:
                    return current
                current = nxt
        if isinstance(f, EG):
            current = ev(f.child)
            while True:
                nxt = current & image(current)
                if nxt == current:
                    return current
                current = nxt
        raise TypeError(f"not in normal form: {f!r}")

    return ev(normalize(formula))
