"""Round trips, parse errors with positions, and the formula grammar."""

import random

import pytest

from helpers import instantiation, random_formula, random_mas, random_norm, simple_case
from normbench import ctl, dsl
from normbench.ecosystem import gen_ecosystem, norm_fifo, norm_round_robin
from normbench.model import ValidationError, identity_norm
from normbench.recognition import NFA

MINIMAL_MODEL = """\
agents a
states s
actions a : x
init s
avail a s : x
obs a s o
trans s x s
"""


def test_parse_minimal_model():
    mas = dsl.parse_model(MINIMAL_MODEL)
    assert mas.agents == ("a",)
    assert mas.states == frozenset({"s"})
    assert ("s", ("x",), "s") in mas.transitions


def test_parse_model_undeclared_state_cites_position():
    text = MINIMAL_MODEL + "trans s x nowhere\n"
    with pytest.raises(dsl.ParseError) as err:
        dsl.parse_model(text)
    assert "nowhere" in str(err.value)
    assert err.value.line == 8
    assert err.value.col > 1


def test_parse_model_validation_failure_is_reported():
    # availability present but observation map missing one entry
    text = MINIMAL_MODEL.replace("obs a s o\n", "")
    with pytest.raises(ValidationError):
        dsl.parse_model(text)


def test_model_roundtrip_on_generated_instantiation():
    mas = gen_ecosystem(instantiation())
    assert dsl.parse_model(dsl.serialize_model(mas)) == mas


def test_model_roundtrip_on_random_systems():
    rng = random.Random(5)
    for _ in range(20):
        mas = random_mas(rng)
        assert dsl.parse_model(dsl.serialize_model(mas)) == mas


def test_norm_roundtrip_empty_document_is_identity():
    mas = dsl.parse_model(MINIMAL_MODEL)
    assert dsl.parse_norm("", mas) == identity_norm()


def test_norm_roundtrip_round_robin_and_fifo():
    cfg = instantiation()
    mas = gen_ecosystem(cfg)
    for norm in (norm_round_robin(cfg), norm_fifo(cfg)):
        assert dsl.parse_norm(dsl.serialize_norm(norm), mas) == norm


def test_norm_roundtrip_on_random_norms():
    rng = random.Random(9)
    for _ in range(20):
        mas = random_mas(rng)
        norm = random_norm(rng, mas)
        assert dsl.parse_norm(dsl.serialize_norm(norm), mas) == norm


def test_norm_document_forbidding_everything_fails_validation():
    mas = dsl.parse_model(MINIMAL_MODEL)
    with pytest.raises(ValidationError):
        dsl.parse_norm("forbid s q0 x\n", mas)


def test_norm_document_dangling_reference():
    mas = dsl.parse_model(MINIMAL_MODEL)
    with pytest.raises(dsl.ParseError) as err:
        dsl.parse_norm("normstates q0\ninitial q0\nupdate q0 missing q0\n", mas)
    assert err.value.line == 3


def test_parse_formula_service_objective_shape():
    formula = dsl.parse_formula("AG (t_1=p_1 -> EF d_1=bot)")
    assert formula == ctl.AG(
        ctl.Implies(ctl.Atom("t_1=p_1"), ctl.EF(ctl.Atom("d_1=bot")))
    )


def test_parse_formula_until_and_precedence():
    formula = dsl.parse_formula("E[ p U q ] | EG !p")
    assert formula == ctl.Or(
        ctl.EU(ctl.Atom("p"), ctl.Atom("q")), ctl.EG(ctl.Not(ctl.Atom("p")))
    )


def test_parse_formula_precedence_chain():
    formula = dsl.parse_formula("a -> b & c | d")
    assert formula == ctl.Implies(
        ctl.Atom("a"), ctl.Or(ctl.And(ctl.Atom("b"), ctl.Atom("c")), ctl.Atom("d"))
    )


def test_parse_formula_dangling_operator_errors():
    with pytest.raises(dsl.ParseError):
        dsl.parse_formula("AG")


def test_parse_formula_error_carries_position():
    with pytest.raises(dsl.ParseError) as err:
        dsl.parse_formula("p & (q |")
    assert err.value.line == 1
    assert err.value.col >= 1


def test_parse_formula_quoted_atom():
    formula = dsl.parse_formula('"rr_1={g1,g2}" & true')
    assert formula == ctl.And(ctl.Atom("rr_1={g1,g2}"), ctl.TRUE)


def test_formula_print_parse_roundtrip():
    rng = random.Random(13)
    for _ in range(150):
        formula = random_formula(rng, rng.randint(0, 5))
        text = dsl.format_formula(formula)
        again = dsl.parse_formula(text)
        assert ctl.normalize(again) == ctl.normalize(formula)


def test_parse_nfa_complete_one_state():
    nfa = dsl.parse_nfa("initial q0\nfinal q0\nq0 a q0\nq0 b q0\n")
    assert nfa.initial == "q0"
    assert nfa.alphabet == frozenset({"a", "b"})
    assert nfa.step("q0", "a") == frozenset({"q0"})


def test_parse_nfa_missing_initial_line():
    with pytest.raises(dsl.ParseError):
        dsl.parse_nfa("q0 a q0\n")


def test_parse_nfa_undeclared_state():
    with pytest.raises(dsl.ParseError):
        dsl.parse_nfa("states q0\ninitial q0\nq0 a q1\n")


def _random_nfa(rng: random.Random) -> NFA:
    count = rng.randint(1, 3)
    states = [f"q{i}" for i in range(count)]
    transitions = {}
    for q in states:
        for sym in ("a", "b"):
            dests = frozenset(rng.sample(states, rng.randint(0, count)))
            if dests:
                transitions[(q, sym)] = dests
    finals = frozenset(rng.sample(states, rng.randint(0, count)))
    return NFA(frozenset(states), "q0", transitions, finals, frozenset({"a", "b"}))


def test_nfa_roundtrip_on_random_automata():
    rng = random.Random(21)
    for _ in range(25):
        nfa = _random_nfa(rng)
        assert dsl.parse_nfa(dsl.serialize_nfa(nfa)) == nfa


def test_eco_config_roundtrip():
    from normbench.ecosystem import parse_eco_config, serialize_eco_config

    for cfg in (instantiation(), simple_case()):
        assert parse_eco_config(serialize_eco_config(cfg)) == cfg
