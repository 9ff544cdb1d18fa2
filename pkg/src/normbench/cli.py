"""Command-line front end.

Subcommands: ``validate`` (model and norm files), ``check`` (model check one
objective), ``synth`` (static or dynamic norm search), ``nc1`` / ``nc2``
(norm recognition over a family of norm files, with witness replay), and
``gen`` (``eco`` writes a producer-consumer instance, ``nfa-instance`` the
automaton-based recognition instance).

Verdicts are report content, never exit codes, so scripts can tell "ran and
answered false" from "failed to run": exit status 0 means the command
completed, 1 a usage error, and 2 an input or validation error.  With
``--machine`` every command prints exactly one JSON record; ``--no-timing``
drops the timing field so identical inputs give byte-identical records.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import dsl, ecosystem
from .ctl import check
from .model import ValidationError, apply_norm
from .recognition import (
    Lasso,
    NormFamily,
    build_nfa_recognition_instance,
    decide_nc1,
    decide_nc2,
    nc1_bruteforce,
    nc2_bruteforce,
    replay_nc1_witness,
    replay_nc2_witness,
)
from .synthesis import SynthesisBudget, synthesize_dynamic, synthesize_static


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="normbench", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--machine", action="store_true", help="one JSON record on stdout")
        p.add_argument("--no-timing", action="store_true", help="omit timings from reports")

    p = sub.add_parser("validate", help="validate a model and optional norms")
    p.add_argument("--model", required=True)
    p.add_argument("--norm", action="append", default=[])
    common(p)

    p = sub.add_parser("check", help="model check an objective under a norm")
    p.add_argument("--model", required=True)
    p.add_argument("--norm", required=True)
    p.add_argument("--formula", required=True)
    common(p)

    p = sub.add_parser("synth", help="search for a norm enforcing an objective")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--mode", choices=["static", "dynamic"], default="static")
    p.add_argument("--kmax", type=int, default=1, help="normative-state bound (dynamic)")
    p.add_argument("--budget", type=int, default=None, help="max candidates to try")
    p.add_argument("--time-limit", type=float, default=None, help="seconds")
    p.add_argument("--out", default=None, help="write a found norm here")
    common(p)

    for name in ("nc1", "nc2"):
        p = sub.add_parser(name, help=f"decide the {name} recognition problem")
        p.add_argument("--model", required=True)
        p.add_argument("--norms", nargs="+", required=True)
        p.add_argument("--active", type=int, default=0)
        p.add_argument("--observer", required=True, help="agent whose observations the newcomer uses")
        p.add_argument("--replay", default=None, help="revalidate a witness record instead")
        p.add_argument(
            "--depth",
            type=int,
            default=None,
            help="also run the path-enumeration oracle to this many states and report "
            "agreement (witnesses longer than the depth are out of its reach)",
        )
        common(p)

    p = sub.add_parser("gen", help="generate instances")
    gsub = p.add_subparsers(dest="generator")
    g = gsub.add_parser("eco", help="producer-consumer instance from a config file")
    g.add_argument("--config", required=True)
    g.add_argument("--out-dir", required=True)
    common(g)
    g = gsub.add_parser("nfa-instance", help="recognition instance from an automaton")
    g.add_argument("--nfa", required=True)
    g.add_argument("--out-dir", required=True)
    common(g)
    return parser


def _emit(args, record: dict, human_lines: list[str], started: float) -> None:
    if not args.no_timing:
        record["timing_ms"] = round((time.monotonic() - started) * 1000, 1)
    if args.machine:
        print(json.dumps(record, sort_keys=True))
        return
    for line in human_lines:
        print(line)
    if not args.no_timing:
        print(f"time: {record['timing_ms']} ms")


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_family(args) -> NormFamily:
    mas = dsl.parse_model(_read(args.model))
    members = tuple(dsl.parse_norm(_read(p), mas) for p in args.norms)
    if args.observer not in mas.agents:
        raise ValueError(f"unknown observer agent {args.observer!r}")
    return NormFamily(mas, members, args.active, dict(mas.observations[args.observer]))


def _lasso_json(lasso: Lasso) -> dict:
    return {"states": [list(s) for s in lasso.states], "loop_start": lasso.loop_start}


def _lasso_from_json(data) -> Lasso:
    return Lasso(tuple(tuple(s) for s in data["states"]), data["loop_start"])


def _witness_json(verdict) -> object:
    if verdict.witness is None:
        return None
    if verdict.problem == "nc1":
        active_lasso, member, rival_lasso = verdict.witness
        return {
            "active_lasso": _lasso_json(active_lasso),
            "rival_member": member,
            "rival_lasso": _lasso_json(rival_lasso),
        }
    return {"path": [list(s) for s in verdict.witness]}


def _cmd_validate(args, started) -> int:
    mas = None
    records = []
    lines = []
    try:
        mas = dsl.parse_model(_read(args.model))
        records.append({"file": args.model, "ok": True, "violations": []})
        lines.append(f"{args.model}: ok")
    except ValidationError as err:
        records.append(
            {
                "file": args.model,
                "ok": False,
                "violations": [str(v) for v in err.report.violations],
            }
        )
        lines.append(f"{args.model}: {err.report.summary()}")
    for path in args.norm:
        if mas is None:
            records.append(
                {"file": path, "ok": False, "violations": ["model invalid; norm not checked"]}
            )
            lines.append(f"{path}: skipped (model invalid)")
            continue
        try:
            dsl.parse_norm(_read(path), mas)
            records.append({"file": path, "ok": True, "violations": []})
            lines.append(f"{path}: ok")
        except ValidationError as err:
            records.append(
                {
                    "file": path,
                    "ok": False,
                    "violations": [str(v) for v in err.report.violations],
                }
            )
            lines.append(f"{path}: {err.report.summary()}")
    _emit(args, {"command": "validate", "reports": records}, lines, started)
    return 0


def _cmd_check(args, started) -> int:
    mas = dsl.parse_model(_read(args.model))
    norm = dsl.parse_norm(_read(args.norm), mas)
    formula = dsl.parse_formula(_read(args.formula))
    structure = apply_norm(mas, norm, validate=False)
    verdict = check(structure, formula)
    record = {
        "command": "check",
        "verdict": verdict,
        "product_states": len(structure.states),
    }
    _emit(args, record, [f"verdict: {str(verdict).lower()}"], started)
    return 0


def _cmd_synth(args, started) -> int:
    mas = dsl.parse_model(_read(args.model))
    formula = dsl.parse_formula(_read(args.formula))
    budget = SynthesisBudget(args.budget, args.time_limit)
    if args.mode == "static":
        outcome = synthesize_static(mas, formula, budget)
    else:
        outcome = synthesize_dynamic(mas, formula, args.kmax, budget)
    record = {
        "command": "synth",
        "mode": args.mode,
        "outcome": outcome.status,
        "bound": outcome.bound,
        "candidates_tried": outcome.candidates_tried,
    }
    lines = [
        f"outcome: {outcome.status}",
        f"bound: {outcome.bound}",
        f"candidates tried: {outcome.candidates_tried}",
    ]
    if outcome.found:
        text = dsl.serialize_norm(outcome.norm)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
            record["norm_file"] = args.out
            lines.append(f"norm written to {args.out}")
        else:
            record["norm"] = text
            lines.append(text.rstrip("\n"))
    _emit(args, record, lines, started)
    return 0


def _cmd_recognition(args, started, problem: str) -> int:
    family = _load_family(args)
    if args.replay:
        data = json.loads(_read(args.replay))
        witness = data.get("witness")
        if data.get("command") != problem or witness is None:
            raise ValueError(f"replay file does not hold a {problem} witness")
        if problem == "nc1":
            triple = (
                _lasso_from_json(witness["active_lasso"]),
                witness["rival_member"],
                _lasso_from_json(witness["rival_lasso"]),
            )
            valid = replay_nc1_witness(family, triple)
        else:
            valid = replay_nc2_witness(family, tuple(tuple(s) for s in witness["path"]))
        record = {"command": problem, "replay": True, "valid": valid}
        _emit(args, record, [f"witness valid: {str(valid).lower()}"], started)
        return 0 if valid else 2

    verdict = decide_nc1(family) if problem == "nc1" else decide_nc2(family)
    record = {
        "command": problem,
        "successful": verdict.successful,
        "witness": _witness_json(verdict),
    }
    lines = [f"{problem}: {'successful' if verdict.successful else 'unsuccessful'}"]
    if args.depth is not None:
        if args.depth < 1:
            raise ValueError("--depth must be positive")
        if problem == "nc1":
            found = nc1_bruteforce(family, args.depth)
            agrees = verdict.successful == (found is None)
        else:
            found = nc2_bruteforce(family, args.depth)
            agrees = verdict.successful == (found is not None)
        record["oracle_depth"] = args.depth
        record["oracle_agrees"] = agrees
        lines.append(f"oracle to depth {args.depth}: {'agrees' if agrees else 'DISAGREES'}")
    if verdict.witness is not None:
        if problem == "nc1":
            active_lasso, member, rival_lasso = verdict.witness
            lines.append(f"matched run pair with rival member {member}:")
            lines.append(
                "  active: "
                + " ".join(f"({s},{q})" for s, q in active_lasso.states)
                + f" [loop from {active_lasso.loop_start}]"
            )
            lines.append(
                "  rival:  "
                + " ".join(f"({s},{q})" for s, q in rival_lasso.states)
                + f" [loop from {rival_lasso.loop_start}]"
            )
        else:
            lines.append("distinguishing run: " + " ".join(f"({s},{q})" for s, q in verdict.witness))
    _emit(args, record, lines, started)
    return 0


def _cmd_gen_eco(args, started) -> int:
    cfg = ecosystem.parse_eco_config(_read(args.config))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mas = ecosystem.gen_ecosystem(cfg)
    written = []

    def write(name: str, text: str):
        (out / name).write_text(text, encoding="utf-8")
        written.append(name)

    write("model.mas", dsl.serialize_model(mas))
    write("round-robin.norm", dsl.serialize_norm(ecosystem.norm_round_robin(cfg)))
    write("fifo.norm", dsl.serialize_norm(ecosystem.norm_fifo(cfg)))
    write("skip-two.norm", dsl.serialize_norm(ecosystem.norm_skip2(cfg)))
    try:
        trio = ecosystem.static_norms_simple(cfg)
    except ValueError:
        trio = None
    if trio is not None:
        for name, norm in zip(
            ("exclude-first.norm", "exclude-second.norm", "unrestricted.norm"), trio
        ):
            write(name, dsl.serialize_norm(norm))
    possible, inevitable = ecosystem.objectives(cfg)
    write("possible-service.ctl", dsl.format_formula(possible) + "\n")
    write("guaranteed-service.ctl", dsl.format_formula(inevitable) + "\n")
    record = {"command": "gen-eco", "out_dir": str(out), "files": written}
    _emit(args, record, [f"wrote {name}" for name in written], started)
    return 0


def _cmd_gen_nfa(args, started) -> int:
    nfa = dsl.parse_nfa(_read(args.nfa))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mas, family = build_nfa_recognition_instance(nfa)
    written = []

    def write(name: str, text: str):
        (out / name).write_text(text, encoding="utf-8")
        written.append(name)

    write("model.mas", dsl.serialize_model(mas))
    write("block-run.norm", dsl.serialize_norm(family.members[0]))
    write("block-word.norm", dsl.serialize_norm(family.members[1]))
    record = {
        "command": "gen-nfa-instance",
        "out_dir": str(out),
        "files": written,
        "active": 0,
        "observer": "x",
    }
    _emit(args, record, [f"wrote {name}" for name in written], started)
    return 0


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    if args.command is None:
        print("usage error: a subcommand is required", file=sys.stderr)
        return 1
    if args.command == "gen" and getattr(args, "generator", None) is None:
        print("usage error: gen needs a generator (eco | nfa-instance)", file=sys.stderr)
        return 1
    started = time.monotonic()
    try:
        if args.command == "validate":
            return _cmd_validate(args, started)
        if args.command == "check":
            return _cmd_check(args, started)
        if args.command == "synth":
            return _cmd_synth(args, started)
        if args.command in ("nc1", "nc2"):
            return _cmd_recognition(args, started, args.command)
        if args.command == "gen":
            if args.generator == "eco":
                return _cmd_gen_eco(args, started)
            return _cmd_gen_nfa(args, started)
    except (dsl.ParseError, ValidationError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command!r}")


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
