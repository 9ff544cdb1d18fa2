"""Data-model operations: validation, joint actions, products, reachability."""

import random

import pytest

from helpers import instantiation, random_mas, random_norm, simple_case, toy_go_stay
from normbench.ecosystem import gen_ecosystem, norm_round_robin
from normbench.model import (
    MAS,
    KripkeStructure,
    NormativeSystem,
    ValidationError,
    apply_norm,
    available_joint_actions,
    identity_norm,
    make_static,
    reachable,
    transition_index,
    validate_mas,
    validate_norm,
)


def single_state_mas() -> MAS:
    return MAS(
        agents=("a",),
        states=frozenset({"s"}),
        actions={"a": frozenset({"x"})},
        availability={"a": {"s": frozenset({"x"})}},
        initial=frozenset({"s"}),
        transitions=frozenset({("s", ("x",), "s")}),
        observations={"a": {"s": "o"}},
        labels={"s": frozenset({"p"})},
    )


def test_validate_minimal_system():
    assert validate_mas(single_state_mas()).ok


def test_validate_observation_availability_conflict():
    mas = MAS(
        agents=("a",),
        states=frozenset({"u", "v"}),
        actions={"a": frozenset({"x", "y"})},
        availability={"a": {"u": frozenset({"x"}), "v": frozenset({"x", "y"})}},
        initial=frozenset({"u"}),
        transitions=frozenset(
            {("u", ("x",), "u"), ("v", ("x",), "v"), ("v", ("y",), "u")}
        ),
        observations={"a": {"u": "same", "v": "same"}},
        labels={},
    )
    report = validate_mas(mas)
    assert not report.ok
    kinds = {v.invariant for v in report.violations}
    assert "observation-availability" in kinds
    [violation] = [v for v in report.violations if v.invariant == "observation-availability"]
    assert "u" in violation.subject and "v" in violation.subject


def test_validate_generated_instantiation():
    assert validate_mas(gen_ecosystem(instantiation())).ok


def test_validate_degenerate_systems():
    empty = MAS((), frozenset(), {}, {}, frozenset(), frozenset(), {}, {})
    report = validate_mas(empty)
    kinds = {v.invariant for v in report.violations}
    assert {"agents-nonempty", "states-nonempty"} <= kinds


def test_validate_seriality_violation():
    mas = MAS(
        agents=("a",),
        states=frozenset({"u"}),
        actions={"a": frozenset({"x", "y"})},
        availability={"a": {"u": frozenset({"x", "y"})}},
        initial=frozenset({"u"}),
        transitions=frozenset({("u", ("x",), "u")}),
        observations={"a": {"u": "o"}},
        labels={},
    )
    report = validate_mas(mas)
    assert any(v.invariant == "seriality" for v in report.violations)


def test_available_joint_actions_product_cardinality():
    mas = MAS(
        agents=("a", "b"),
        states=frozenset({"s"}),
        actions={"a": frozenset({"a1", "a2"}), "b": frozenset({"b1", "b2", "b3"})},
        availability={
            "a": {"s": frozenset({"a1", "a2"})},
            "b": {"s": frozenset({"b1", "b2", "b3"})},
        },
        initial=frozenset({"s"}),
        transitions=frozenset(
            {("s", (x, y), "s") for x in ("a1", "a2") for y in ("b1", "b2", "b3")}
        ),
        observations={"a": {"s": "o"}, "b": {"s": "o"}},
        labels={},
    )
    assert len(available_joint_actions(mas, "s")) == 6


def test_available_joint_actions_singleton_availability():
    mas = toy_go_stay()
    assert available_joint_actions(mas, "v") == frozenset({("stay",)})


def test_available_joint_actions_unknown_state():
    with pytest.raises(ValueError):
        available_joint_actions(toy_go_stay(), "nowhere")


def test_validate_norm_identity_is_ok():
    assert validate_norm(toy_go_stay(), identity_norm()).ok


def test_validate_norm_rejects_total_elimination():
    mas = toy_go_stay()
    norm = NormativeSystem(
        frozenset({"q0"}),
        "q0",
        {("u", "q0"): frozenset({("go",), ("stay",)})},
    )
    report = validate_norm(mas, norm)
    assert any(v.invariant == "forbids-eliminates-all" for v in report.violations)


def test_validate_norm_round_robin_on_instantiation():
    cfg = instantiation()
    assert validate_norm(gen_ecosystem(cfg), norm_round_robin(cfg)).ok


def test_apply_norm_identity_matches_action_erased_transitions():
    mas = toy_go_stay()
    product = apply_norm(mas, identity_norm())
    erased = {(src, dst) for src, _, dst in mas.transitions}
    observed = {(s, t) for (s, _), succs in product.edges.items() for (t, _) in succs}
    assert observed == erased


def test_apply_norm_rejects_invalid_inputs():
    mas = toy_go_stay()
    bad = NormativeSystem(frozenset({"q0"}), "q1")
    with pytest.raises(ValidationError):
        apply_norm(mas, bad)


def test_reachable_single_self_loop():
    state = ("s", "q0")
    structure = KripkeStructure(
        frozenset({state}), frozenset({state}), {state: (state,)}, {}
    )
    assert reachable(structure) == frozenset({state})


def test_reachable_drops_disconnected_states():
    a, b = ("a", "q0"), ("b", "q0")
    structure = KripkeStructure(
        frozenset({a, b}), frozenset({a}), {a: (a,), b: (b,)}, {}
    )
    assert reachable(structure) == frozenset({a})


def test_reachable_product_is_serial_on_simple_case():
    cfg = simple_case()
    mas = gen_ecosystem(cfg)
    product = apply_norm(mas, norm_round_robin(cfg))
    reach = reachable(product)
    assert reach == product.states
    assert all(product.successors(state) for state in reach)


def test_make_static_empty_map_is_identity():
    mas = toy_go_stay()
    assert make_static(mas, {}) == identity_norm()


def test_make_static_with_empty_entry_restricts_nothing():
    mas = toy_go_stay()
    norm = make_static(mas, {"u": frozenset()})
    assert norm.forbids == {}


def test_make_static_valid_single_restriction():
    mas = toy_go_stay()
    norm = make_static(mas, {"u": frozenset({("go",)})})
    assert norm.forbidden("u", "q0") == frozenset({("go",)})
    assert norm.is_static


def test_make_static_rejects_strict_subset_violation():
    mas = toy_go_stay()
    with pytest.raises(ValidationError):
        make_static(mas, {"v": frozenset({("stay",)})})


def _assert_product_sound_and_complete(mas, norm):
    product = apply_norm(mas, norm, validate=False)
    index = transition_index(mas)
    assert len(product.states) <= 10_000
    for (s1, q1), succs in product.edges.items():
        # soundness: every edge has a witnessing allowed action
        for s2, q2 in succs:
            assert q2 == norm.next_norm(q1, s2)
            witnesses = [
                action
                for action in available_joint_actions(mas, s1)
                if action not in norm.forbidden(s1, q1)
                and s2 in index.get((s1, action), ())
            ]
            assert witnesses, f"edge {(s1, q1)} -> {(s2, q2)} has no witness"
        # completeness: every allowed action's successors appear
        for action in available_joint_actions(mas, s1):
            if action in norm.forbidden(s1, q1):
                continue
            for s2 in index.get((s1, action), ()):
                assert (s2, norm.next_norm(q1, s2)) in succs
        # seriality on the reachable part
        assert succs


def test_product_edges_sound_complete_and_serial_on_instantiation():
    cfg = instantiation()
    _assert_product_sound_and_complete(gen_ecosystem(cfg), norm_round_robin(cfg))


def test_product_edges_sound_complete_on_random_systems():
    rng = random.Random(7)
    for _ in range(25):
        mas = random_mas(rng)
        norm = random_norm(rng, mas)
        _assert_product_sound_and_complete(mas, norm)


def test_identity_product_matches_reachable_relation_on_random_systems():
    rng = random.Random(11)
    for _ in range(15):
        mas = random_mas(rng)
        product = apply_norm(mas, identity_norm(), validate=False)
        # action-erased reachable relation computed directly on the system
        index = transition_index(mas)
        seen = set(mas.initial)
        frontier = sorted(mas.initial)
        erased = set()
        while frontier:
            s = frontier.pop()
            for action in available_joint_actions(mas, s):
                for t in index.get((s, action), ()):
                    erased.add((s, t))
                    if t not in seen:
                        seen.add(t)
                        frontier.append(t)
        observed = {(s, t) for (s, _), succs in product.edges.items() for (t, _) in succs}
        assert observed == erased
