"""Command line entry point: classify, normalize, evaluate symbols, verify.

All output is JSON with stable key order and fixed float formatting (12
significant digits), so identical inputs give byte-identical reports.
Exit codes: 0 all good, 1 a verification check failed, 2 usage or parse
errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from importlib import resources

from .algebra import (
    assemble_matrix,
    codomain_order,
    generator_type,
    localization_stratum,
    word_order,
)
from .dsl import DslProgram, parse_dsl, print_dsl, word_text
from .errors import ParseError, StrataError, ValidationError
from .geometry import Stratum, derive_config
from .opsymbol import SymbolPoint, morphism_symbol, symbol_to_json
from . import verify as verify_mod

_DEFAULT_PROGRAM = "config n=3 S1={1,2} S2={1,3} transversal=true orders=(0,0,0)\n"


# ---------------------------------------------------------------------------
# deterministic JSON


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def dumps(obj) -> str:
    out = []
    _write(obj, out)
    return "".join(out)


def _write(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt_float(obj))
    elif isinstance(obj, Fraction):
        out.append(json.dumps(str(obj)))
    elif isinstance(obj, complex):
        out.append(f"[{_fmt_float(obj.real)}, {_fmt_float(obj.imag)}]")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)))
            out.append(": ")
            _write(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _write(v, out)
        out.append("]")
    else:
        out.append(json.dumps(str(obj)))


# ---------------------------------------------------------------------------
# fixtures


def load_fixtures(path: str | None = None) -> dict:
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    ref = resources.files("strataops").joinpath("fixtures/calibration.json")
    with ref.open("r", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# command execution


def _cmd_classify(program: DslProgram, name: str) -> dict:
    d = program.definition(name)
    words = []
    for w in d.words:
        t = generator_type(w)
        words.append(
            {
                "type": t.label,
                "stratum": localization_stratum(w).value,
                "cell": list(t.cell),
                "order": word_order(w, program.cfg),
                "domain_order": w.domain_order,
                "codomain_order": codomain_order(w, program.cfg),
                "word": word_text(w),
            }
        )
    rep = {"command": "classify", "name": name, "words": words}
    if len(words) == 1:
        rep["type"] = words[0]["type"]
        rep["stratum"] = words[0]["stratum"]
    return rep


def _cmd_normalize(program: DslProgram, name: str) -> dict:
    d = program.definition(name)
    m = assemble_matrix(d.words, program.cfg)
    cells = {}
    for k in range(3):
        for l in range(3):
            cells[f"({k},{l})"] = [
                {"type": e.gtype.label, "word": word_text(e.word)}
                for e in m.entries(k, l)
            ]
    return {
        "command": "normalize",
        "name": name,
        "domain_orders": list(m.domain_orders),
        "codomain_orders": list(m.codomain_orders),
        "total_order": m.total_order,
        "cells": cells,
    }


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(p) for p in raw.split(",") if p != "")


def _cmd_symbol(program: DslProgram, name: str, options: dict) -> dict:
    d = program.definition(name)
    m = assemble_matrix(d.words, program.cfg)
    stratum_name = options.get("stratum", "X1")
    try:
        stratum = Stratum(stratum_name)
    except ValueError:
        raise ValidationError(f"unknown stratum {stratum_name!r}") from None
    dim = program.cfg.dim(stratum)
    z = _floats(options.get("z", "")) or (0.0,) * dim
    zeta = _floats(options.get("zeta", "")) or (1.0,) * dim
    m_pts = int(options.get("M", 16))
    pt = SymbolPoint(stratum=stratum, z=z, zeta=zeta, m=m_pts)
    sym = morphism_symbol(m, pt, program.cfg)
    return {
        "command": "symbol",
        "name": name,
        "stratum": stratum.value,
        "z": list(z),
        "zeta": list(zeta),
        "M": m_pts,
        "symbol": symbol_to_json(sym),
    }


def _cmd_verify(program: DslProgram, which: str, options: dict, fixtures: dict) -> dict:
    cfg = program.cfg
    seed = int(options.get("seed", 0))
    if which == "compose":
        return verify_mod.homomorphism_check(
            cfg,
            n_pairs=int(options.get("pairs", 100)),
            n_points=int(options.get("points", 20)),
            m=int(options.get("M", 16)),
            seed=seed,
        )
    if which == "trace":
        ms = tuple(int(v) for v in options.get("M", "16,32,64").split(","))
        ns = tuple(int(v) for v in options.get("N", "16,32,64").split(","))
        sym = verify_mod.fuse_symbol_check(cfg, ms=ms)
        op = verify_mod.fuse_operator_check(
            cfg, ns=ns, n_inputs=int(options.get("inputs", 50)), seed=seed
        )
        return {
            "test": "trace-fusion",
            "parameters": {"M": list(ms), "N": list(ns)},
            "schedule": list(ns),
            "values": {"symbol": sym["values"], "operator": op["values"]},
            "cases": {"symbol": sym, "operator": op},
            "pass": bool(sym["pass"] and op["pass"]),
        }
    if which == "rlambda":
        lams = tuple(float(v) for v in options.get("lambda", "4,16,64").split(","))
        fx = fixtures.get("rlambda", {})
        suite = verify_mod.rlambda_suite(
            cfg,
            lambdas=lams,
            n_points=int(options.get("N", fx.get("n_points", 64))),
            half_width=float(options.get("L", fx.get("half_width", 10.0))),
        )
        unit = verify_mod.rlambda_unitarity_check()
        return {
            "test": "rlambda",
            "parameters": suite["parameters"],
            "schedule": list(lams),
            "values": {"cases": suite["values"], "unitarity": unit["values"]},
            "cases": {"suite": suite, "unitarity": unit},
            "pass": bool(suite["pass"] and unit["pass"]),
        }
    if which == "localization":
        fx = fixtures.get("localization", {})
        return verify_mod.localization_suite(
            cfg,
            n_points=int(options.get("N", fx.get("n_points", 64))),
            min_drop=float(options.get("drop", fx.get("min_drop", 0.7))),
            max_gap=float(options.get("gap", fx.get("max_gap", 0.1))),
        )
    if which == "census":
        return verify_mod.census_report(cfg, max_len=int(options.get("maxlen", 5)))
    raise ValidationError(f"unknown verify target {which!r}")


def execute_command(program: DslProgram, kind: str, target: str, options: dict, fixtures: dict):
    """Run one command; returns (report, passed)."""
    if kind == "classify":
        return _cmd_classify(program, target), True
    if kind == "normalize":
        return _cmd_normalize(program, target), True
    if kind == "symbol":
        return _cmd_symbol(program, target, options), True
    if kind == "verify":
        rep = _cmd_verify(program, target, options, fixtures)
        return rep, bool(rep.get("pass", True))
    raise ValidationError(f"unknown command {kind!r}")


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="strataops",
        description="morphism calculus for a pair of intersecting coordinate subspaces",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    def add_common(p, needs_file=True):
        p.add_argument("file", nargs="?", help="program file (default: stdin)")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--fixtures", help="calibration fixture path")

    p_run = sub.add_parser("run", help="execute the command list of a program")
    add_common(p_run)

    for kind in ("classify", "normalize"):
        p = sub.add_parser(kind)
        p.add_argument("name")
        add_common(p)

    p_sym = sub.add_parser("symbol", help="evaluate the block symbol of a morphism")
    p_sym.add_argument("name")
    p_sym.add_argument("--stratum", default="X1", choices=["X0", "X1", "X2", "X12"])
    p_sym.add_argument("--z", default="")
    p_sym.add_argument("--zeta", default="")
    p_sym.add_argument("--M", default="16")
    add_common(p_sym)

    p_ver = sub.add_parser("verify", help="run a verification suite")
    p_ver.add_argument(
        "which", choices=["compose", "trace", "rlambda", "localization", "census"]
    )
    p_ver.add_argument("--pairs")
    p_ver.add_argument("--points")
    p_ver.add_argument("--inputs")
    p_ver.add_argument("--M")
    p_ver.add_argument("--N")
    p_ver.add_argument("--L")
    p_ver.add_argument("--lambda", dest="lam")
    p_ver.add_argument("--seed")
    p_ver.add_argument("--drop")
    p_ver.add_argument("--gap")
    p_ver.add_argument("--maxlen")
    add_common(p_ver)
    return ap


def _read_program(args) -> DslProgram:
    if args.file:
        with open(args.file, "r", encoding="utf-8") as fh:
            text = fh.read()
    elif not sys.stdin.isatty():
        text = sys.stdin.read()
        if not text.strip():
            text = _DEFAULT_PROGRAM
    else:
        text = _DEFAULT_PROGRAM
    return parse_dsl(text)


def _emit(report, args) -> None:
    payload = dumps(report) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        program = _read_program(args)
        fixtures = load_fixtures(args.fixtures)
        if args.cmd == "run":
            reports = []
            ok = True
            for c in program.commands:
                rep, passed = execute_command(
                    program, c.kind, c.target, dict(c.options), fixtures
                )
                reports.append(rep)
                ok = ok and passed
            _emit({"command": "run", "reports": reports, "pass": ok}, args)
            return 0 if ok else 1
        if args.cmd in ("classify", "normalize"):
            rep, _ = execute_command(program, args.cmd, args.name, {}, fixtures)
            _emit(rep, args)
            return 0
        if args.cmd == "symbol":
            options = {"stratum": args.stratum, "z": args.z, "zeta": args.zeta, "M": args.M}
            rep, _ = execute_command(program, "symbol", args.name, options, fixtures)
            _emit(rep, args)
            return 0
        if args.cmd == "verify":
            options = {}
            for key, attr in (
                ("pairs", "pairs"),
                ("points", "points"),
                ("inputs", "inputs"),
                ("M", "M"),
                ("N", "N"),
                ("L", "L"),
                ("lambda", "lam"),
                ("seed", "seed"),
                ("drop", "drop"),
                ("gap", "gap"),
                ("maxlen", "maxlen"),
            ):
                val = getattr(args, attr)
                if val is not None:
                    options[key] = val
            rep, passed = execute_command(program, "verify", args.which, options, fixtures)
            _emit(rep, args)
            return 0 if passed else 1
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, StrataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
