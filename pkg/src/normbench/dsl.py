"""Text formats for systems, norms, formulas, and automata.

All document formats are line oriented and UTF-8; ``#`` starts a comment and
blank lines are ignored.  Tokens are whitespace separated, so identifiers may
contain any non-space characters except ``#``; the ``:`` separator used in
some directives must be surrounded by whitespace.  Serialization is canonical
(sorted, omitting defaulted entries), so parse(serialize(x)) == x.

Model documents (``.mas``)::

    agents p1 c1 c2                # ordered, exactly once
    actions c1 : idle req-p1       # local action alphabet, cumulative
    states s0                      # one or more ids per line, cumulative
    init s0
    avail c1 s0 : req-p1           # available actions of c1 at s0
    obs c1 s0 o-token              # observation value of c1 at s0
    trans s0 idle req-p1 req-p1 s1 # source, one action per agent, destination
    label s1 : k=2 d_1=g1

Norm documents (``.norm``, resolved against a model)::

    normstates q0 q1
    initial q0
    forbid s1 q0 idle serve-c2 idle   # state, normative state, joint action
    update q0 s2 q1                   # omitted entries keep the norm state

Formulas (``.ctl``): atoms are identifiers over ``[A-Za-z0-9_=.+]`` (the
``var=val`` convention; anything else can be double-quoted), the constants
``true``/``false``, the connectives ``!``, ``&``, ``|``, ``->`` and the
temporal operators ``EX AX EF AF EG AG`` plus ``E[ f U g ]`` / ``A[ f U g ]``.
Precedence: unary/temporal, then ``&``, then ``|``, then ``->``
(right associative); parentheses group.

Automata (``.nfa``)::

    initial q0
    final q0 q2          # optional
    q0 a q1              # one transition per line: state symbol state
"""

from __future__ import annotations

import re

from .model import (
    MAS,
    JointAction,
    NormativeSystem,
    ValidationError,
    validate_mas,
    validate_norm,
)
from . import ctl
from .recognition import NFA


class ParseError(ValueError):
    """A syntax or reference error, carrying the 1-based line and column."""

    def __init__(self, message: str, line: int, col: int):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {message}")


def _document_lines(text: str):
    """Yield (lineno, [(col, token), ...]) for nonblank, non-comment lines."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", line)]
        if tokens:
            yield lineno, tokens


def _expect_colon(tokens, idx, lineno):
    if idx >= len(tokens) or tokens[idx][1] != ":":
        col = tokens[idx][0] if idx < len(tokens) else tokens[-1][0]
        raise ParseError("expected ':'", lineno, col)


# ---------------------------------------------------------------------------
# Model documents


def parse_model(text: str) -> MAS:
    """Parse a model document into a validated :class:`MAS`.

    Raises :class:`ParseError` for syntax or dangling-reference problems and
    :class:`ValidationError` when the parsed system breaks a model invariant.
    """
    lines = list(_document_lines(text))
    agents: tuple[str, ...] | None = None
    agents_pos = (1, 1)
    states: set[str] = set()
    actions: dict[str, set[str]] = {}

    # Declarations first so later sections can reference them in any order.
    for lineno, tokens in lines:
        head = tokens[0][1]
        if head == "agents":
            if agents is not None:
                raise ParseError("duplicate 'agents' line", lineno, tokens[0][0])
            if len(tokens) < 2:
                raise ParseError("'agents' needs at least one agent", lineno, tokens[0][0])
            agents = tuple(tok for _, tok in tokens[1:])
            agents_pos = (lineno, tokens[0][0])
        elif head == "states":
            states.update(tok for _, tok in tokens[1:])
        elif head == "actions":
            if len(tokens) < 4:
                raise ParseError("'actions' needs an agent, ':' and actions", lineno, tokens[0][0])
            agent = tokens[1][1]
            _expect_colon(tokens, 2, lineno)
            actions.setdefault(agent, set()).update(tok for _, tok in tokens[3:])

    if agents is None:
        raise ParseError("missing 'agents' line", 1, 1)
    for agent in actions:
        if agent not in agents:
            raise ParseError(f"unknown agent {agent!r} in 'actions'", *agents_pos)

    def known_state(col_tok, lineno):
        col, tok = col_tok
        if tok not in states:
            raise ParseError(f"unknown state {tok!r}", lineno, col)
        return tok

    def known_agent(col_tok, lineno):
        col, tok = col_tok
        if tok not in agents:
            raise ParseError(f"unknown agent {tok!r}", lineno, col)
        return tok

    availability: dict[str, dict[str, frozenset[str]]] = {a: {} for a in agents}
    observations: dict[str, dict[str, str]] = {a: {} for a in agents}
    initial: set[str] = set()
    transitions: set[tuple[str, JointAction, str]] = set()
    labels: dict[str, set[str]] = {}

    for lineno, tokens in lines:
        head = tokens[0][1]
        if head in ("agents", "states", "actions"):
            continue
        if head == "init":
            for col, tok in tokens[1:]:
                initial.add(known_state((col, tok), lineno))
        elif head == "avail":
            if len(tokens) < 5:
                raise ParseError("'avail' needs agent, state, ':' and actions", lineno, tokens[0][0])
            agent = known_agent(tokens[1], lineno)
            state = known_state(tokens[2], lineno)
            _expect_colon(tokens, 3, lineno)
            acts = set()
            for col, tok in tokens[4:]:
                if tok not in actions.get(agent, ()):
                    raise ParseError(f"unknown action {tok!r} for agent {agent!r}", lineno, col)
                acts.add(tok)
            availability[agent][state] = frozenset(acts)
        elif head == "obs":
            if len(tokens) != 4:
                raise ParseError("'obs' needs agent, state and one value", lineno, tokens[0][0])
            agent = known_agent(tokens[1], lineno)
            state = known_state(tokens[2], lineno)
            observations[agent][state] = tokens[3][1]
        elif head == "trans":
            if len(tokens) != 3 + len(agents):
                raise ParseError(
                    f"'trans' needs source, {len(agents)} actions and destination",
                    lineno,
                    tokens[0][0],
                )
            src = known_state(tokens[1], lineno)
            dst = known_state(tokens[-1], lineno)
            action = []
            for agent, (col, tok) in zip(agents, tokens[2:-1]):
                if tok not in actions.get(agent, ()):
                    raise ParseError(f"unknown action {tok!r} for agent {agent!r}", lineno, col)
                action.append(tok)
            transitions.add((src, tuple(action), dst))
        elif head == "label":
            if len(tokens) < 4:
                raise ParseError("'label' needs a state, ':' and atoms", lineno, tokens[0][0])
            state = known_state(tokens[1], lineno)
            _expect_colon(tokens, 2, lineno)
            labels.setdefault(state, set()).update(tok for _, tok in tokens[3:])
        else:
            raise ParseError(f"unknown directive {head!r}", lineno, tokens[0][0])

    mas = MAS(
        agents=agents,
        states=frozenset(states),
        actions={a: frozenset(acts) for a, acts in actions.items()},
        availability=availability,
        initial=frozenset(initial),
        transitions=frozenset(transitions),
        observations=observations,
        labels={s: frozenset(atoms) for s, atoms in labels.items() if atoms},
    )
    report = validate_mas(mas)
    if not report.ok:
        raise ValidationError("parsed model is not well formed", report)
    return mas


def serialize_model(mas: MAS) -> str:
    out = []
    out.append("agents " + " ".join(mas.agents))
    for state in sorted(mas.states):
        out.append(f"states {state}")
    for agent in mas.agents:
        out.append(f"actions {agent} : " + " ".join(sorted(mas.actions[agent])))
    out.append("init " + " ".join(sorted(mas.initial)))
    for agent in mas.agents:
        for state in sorted(mas.availability[agent]):
            acts = " ".join(sorted(mas.availability[agent][state]))
            out.append(f"avail {agent} {state} : {acts}")
    for agent in mas.agents:
        for state in sorted(mas.observations[agent]):
            out.append(f"obs {agent} {state} {mas.observations[agent][state]}")
    for src, action, dst in sorted(mas.transitions):
        out.append(f"trans {src} " + " ".join(action) + f" {dst}")
    for state in sorted(mas.labels):
        if mas.labels[state]:
            out.append(f"label {state} : " + " ".join(sorted(mas.labels[state])))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Norm documents


def parse_norm(text: str, mas: MAS) -> NormativeSystem:
    """Parse a norm document against ``mas`` into a validated norm automaton."""
    norm_states: set[str] = set()
    initial: str | None = None
    forbids: dict[tuple[str, str], set[JointAction]] = {}
    update: dict[tuple[str, str], str] = {}
    lines = list(_document_lines(text))

    for lineno, tokens in lines:
        head = tokens[0][1]
        if head == "normstates":
            norm_states.update(tok for _, tok in tokens[1:])
    if not norm_states:
        norm_states = {"q0"}

    def known_norm_state(col_tok, lineno):
        col, tok = col_tok
        if tok not in norm_states:
            raise ParseError(f"unknown normative state {tok!r}", lineno, col)
        return tok

    def known_state(col_tok, lineno):
        col, tok = col_tok
        if tok not in mas.states:
            raise ParseError(f"unknown state {tok!r}", lineno, col)
        return tok

    for lineno, tokens in lines:
        head = tokens[0][1]
        if head == "normstates":
            continue
        if head == "initial":
            if len(tokens) != 2:
                raise ParseError("'initial' needs exactly one normative state", lineno, tokens[0][0])
            initial = known_norm_state(tokens[1], lineno)
        elif head == "forbid":
            if len(tokens) != 3 + len(mas.agents):
                raise ParseError(
                    f"'forbid' needs state, normative state and {len(mas.agents)} actions",
                    lineno,
                    tokens[0][0],
                )
            state = known_state(tokens[1], lineno)
            nstate = known_norm_state(tokens[2], lineno)
            action = []
            for agent, (col, tok) in zip(mas.agents, tokens[3:]):
                if tok not in mas.actions.get(agent, ()):
                    raise ParseError(f"unknown action {tok!r} for agent {agent!r}", lineno, col)
                action.append(tok)
            forbids.setdefault((state, nstate), set()).add(tuple(action))
        elif head == "update":
            if len(tokens) != 4:
                raise ParseError("'update' needs normative state, state, normative state", lineno, tokens[0][0])
            nstate = known_norm_state(tokens[1], lineno)
            state = known_state(tokens[2], lineno)
            target = known_norm_state(tokens[3], lineno)
            update[(nstate, state)] = target
        else:
            raise ParseError(f"unknown directive {head!r}", lineno, tokens[0][0])

    if initial is None:
        if len(norm_states) == 1:
            initial = next(iter(norm_states))
        else:
            raise ParseError("missing 'initial' line", 1, 1)

    norm = NormativeSystem(
        frozenset(norm_states),
        initial,
        {key: frozenset(acts) for key, acts in forbids.items()},
        update,
    )
    report = validate_norm(mas, norm)
    if not report.ok:
        raise ValidationError("parsed norm is not well formed", report)
    return norm


def serialize_norm(norm: NormativeSystem) -> str:
    out = ["normstates " + " ".join(sorted(norm.norm_states))]
    out.append(f"initial {norm.initial}")
    for (state, nstate), acts in sorted(norm.forbids.items()):
        for action in sorted(acts):
            out.append(f"forbid {state} {nstate} " + " ".join(action))
    for (nstate, state), target in sorted(norm.update.items()):
        out.append(f"update {nstate} {state} {target}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Formulas

_ATOM_RE = re.compile(r"[A-Za-z0-9_=.+]+")
_KEYWORDS = {"EX", "AX", "EF", "AF", "EG", "AG", "E", "A", "U", "true", "false"}


def _tokenize_formula(text: str):
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if text.startswith("->", i):
            tokens.append(("->", "->", line, col))
            i += 2
            col += 2
            continue
        if ch in "()[]!&|":
            tokens.append((ch, ch, line, col))
            i += 1
            col += 1
            continue
        if ch == '"':
            end = text.find('"', i + 1)
            if end < 0:
                raise ParseError("unterminated quoted atom", line, col)
            tokens.append(("atom", text[i + 1 : end], line, col))
            col += end - i + 1
            i = end + 1
            continue
        match = _ATOM_RE.match(text, i)
        if not match:
            raise ParseError(f"unexpected character {ch!r}", line, col)
        word = match.group()
        kind = word if word in _KEYWORDS else "atom"
        tokens.append((kind, word, line, col))
        i = match.end()
        col += len(word)
    return tokens


class _FormulaParser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, kind=None):
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else (None, None, 1, 1)
            raise ParseError("unexpected end of formula", last[2], last[3])
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2], tok[3])
        self.pos += 1
        return tok

    def parse(self) -> ctl.Formula:
        formula = self.implies()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected token {tok[1]!r}", tok[2], tok[3])
        return formula

    def implies(self) -> ctl.Formula:
        left = self.disjunction()
        tok = self.peek()
        if tok and tok[0] == "->":
            self.take()
            return ctl.Implies(left, self.implies())
        return left

    def disjunction(self) -> ctl.Formula:
        left = self.conjunction()
        while True:
            tok = self.peek()
            if tok and tok[0] == "|":
                self.take()
                left = ctl.Or(left, self.conjunction())
            else:
                return left

    def conjunction(self) -> ctl.Formula:
        left = self.unary()
        while True:
            tok = self.peek()
            if tok and tok[0] == "&":
                self.take()
                left = ctl.And(left, self.unary())
            else:
                return left

    def unary(self) -> ctl.Formula:
        tok = self.take()
        kind = tok[0]
        if kind == "!":
            return ctl.Not(self.unary())
        if kind in ("EX", "AX", "EF", "AF", "EG", "AG"):
            op = {"EX": ctl.EX, "AX": ctl.AX, "EF": ctl.EF,
                  "AF": ctl.AF, "EG": ctl.EG, "AG": ctl.AG}[kind]
            return op(self.unary())
        if kind in ("E", "A"):
            self.take("[")
            left = self.implies()
            self.take("U")
            right = self.implies()
            self.take("]")
            return (ctl.EU if kind == "E" else ctl.AU)(left, right)
        if kind == "true":
            return ctl.TRUE
        if kind == "false":
            return ctl.FALSE
        if kind == "atom":
            return ctl.Atom(tok[1])
        if kind == "(":
            inner = self.implies()
            self.take(")")
            return inner
        raise ParseError(f"unexpected token {tok[1]!r}", tok[2], tok[3])


def parse_formula(text: str) -> ctl.Formula:
    """Parse a formula; raises :class:`ParseError` with its position."""
    tokens = _tokenize_formula(text)
    if not tokens:
        raise ParseError("empty formula", 1, 1)
    return _FormulaParser(tokens).parse()


_LEVEL_UNARY, _LEVEL_AND, _LEVEL_OR, _LEVEL_IMPLIES = 1, 2, 3, 4


def format_formula(formula: ctl.Formula) -> str:
    """Render a formula as text that re-parses to an equivalent tree."""

    def atom_text(name: str) -> str:
        if _ATOM_RE.fullmatch(name) and name not in _KEYWORDS:
            return name
        return f'"{name}"'

    def fmt(f: ctl.Formula, limit: int) -> str:
        if isinstance(f, ctl.Atom):
            return atom_text(f.name)
        if isinstance(f, ctl.Const):
            return "true" if f.value else "false"
        if isinstance(f, ctl.Not):
            return "!" + fmt(f.child, _LEVEL_UNARY)
        unary_ops = {ctl.EX: "EX", ctl.AX: "AX", ctl.EF: "EF",
                     ctl.AF: "AF", ctl.EG: "EG", ctl.AG: "AG"}
        for klass, name in unary_ops.items():
            if isinstance(f, klass):
                return f"{name} " + fmt(f.child, _LEVEL_UNARY)
        if isinstance(f, ctl.EU):
            return f"E[ {fmt(f.left, _LEVEL_IMPLIES)} U {fmt(f.right, _LEVEL_IMPLIES)} ]"
        if isinstance(f, ctl.AU):
            return f"A[ {fmt(f.left, _LEVEL_IMPLIES)} U {fmt(f.right, _LEVEL_IMPLIES)} ]"
        if isinstance(f, ctl.And):
            text = f"{fmt(f.left, _LEVEL_AND)} & {fmt(f.right, _LEVEL_AND - 1)}"
            level = _LEVEL_AND
        elif isinstance(f, ctl.Or):
            text = f"{fmt(f.left, _LEVEL_OR)} | {fmt(f.right, _LEVEL_OR - 1)}"
            level = _LEVEL_OR
        elif isinstance(f, ctl.Implies):
            text = f"{fmt(f.left, _LEVEL_IMPLIES - 1)} -> {fmt(f.right, _LEVEL_IMPLIES)}"
            level = _LEVEL_IMPLIES
        else:
            raise TypeError(f"not a formula: {f!r}")
        return f"({text})" if level > limit else text

    return fmt(formula, _LEVEL_IMPLIES)


# ---------------------------------------------------------------------------
# Automata


def parse_nfa(text: str) -> NFA:
    """Parse an automaton document; the alphabet is inferred when undeclared."""
    initial: str | None = None
    finals: set[str] = set()
    declared: set[str] | None = None
    alphabet: set[str] = set()
    triples: list[tuple[str, str, str, int, int]] = []

    for lineno, tokens in _document_lines(text):
        head = tokens[0][1]
        if head == "states":
            declared = set() if declared is None else declared
            declared.update(tok for _, tok in tokens[1:])
        elif head == "initial":
            if len(tokens) != 2:
                raise ParseError("'initial' needs exactly one state", lineno, tokens[0][0])
            initial = tokens[1][1]
        elif head == "final":
            finals.update(tok for _, tok in tokens[1:])
        elif head == "alphabet":
            alphabet.update(tok for _, tok in tokens[1:])
        else:
            if len(tokens) != 3:
                raise ParseError("transition lines need 'state symbol state'", lineno, tokens[0][0])
            triples.append((tokens[0][1], tokens[1][1], tokens[2][1], lineno, tokens[0][0]))

    if initial is None:
        raise ParseError("missing 'initial' line", 1, 1)

    states = set() if declared is None else set(declared)
    states.add(initial)
    if declared is None:
        states.update(finals)
        for src, _, dst, _, _ in triples:
            states.update((src, dst))
    else:
        for tok in sorted(finals - states):
            raise ParseError(f"undeclared state {tok!r} in 'final'", 1, 1)

    transitions: dict[tuple[str, str], set[str]] = {}
    for src, sym, dst, lineno, col in triples:
        if src not in states or dst not in states:
            missing = src if src not in states else dst
            raise ParseError(f"undeclared state {missing!r}", lineno, col)
        alphabet.add(sym)
        transitions.setdefault((src, sym), set()).add(dst)

    return NFA(
        states=frozenset(states),
        initial=initial,
        transitions={key: frozenset(dsts) for key, dsts in transitions.items()},
        finals=frozenset(finals),
        alphabet=frozenset(alphabet),
    )


def serialize_nfa(nfa: NFA) -> str:
    out = ["states " + " ".join(sorted(nfa.states))]
    out.append("alphabet " + " ".join(sorted(nfa.alphabet)))
    out.append(f"initial {nfa.initial}")
    if nfa.finals:
        out.append("final " + " ".join(sorted(nfa.finals)))
    for (src, sym), dsts in sorted(nfa.transitions.items()):
        for dst in sorted(dsts):
            out.append(f"{src} {sym} {dst}")
    return "\n".join(out) + "\n"
