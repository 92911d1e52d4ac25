"""Command-line interface.

Exit codes: 0 success, 1 negative mathematical verdict (canonical NO, not a
power partial isometry), 2 input error, 3 internal-consistency error.  A
negative verdict is a successful run of the tool, distinguished from a
failure.

Functional expressions for ``--functional`` use tuple symbols from
``--names``, postfix ``'`` for the adjoint, ``1`` for the unit symbol and
``[x^m]`` for the range projection of a power, e.g. ``x*y - y*x`` or
``1 - x'*x``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .engine import (
    canonical_decompose,
    combine_properties,
    max_property_projection,
    triple_decompose,
)
from .errors import BaerdecError, InputError, InternalConsistencyError
from .fixtures import (
    gen_paper_example,
    gen_power_partial_isometry,
    random_planted,
)
from .matfile import (
    load_matrix_file,
    parse_entry,
    save_matrix_file,
    serialize_matrix_file,
)
from .numeric import ToleranceProfile
from .properties import BUILTIN_NAMES, builtin_property, user_property
from .ring import Projection, TupleInstance
from .selfcheck import run_selfcheck
from .structure import defect_projection, halmos_wallen, wold, wold_slocinski

EXIT_OK = 0
EXIT_VERDICT_NEGATIVE = 1
EXIT_INPUT_ERROR = 2
EXIT_INTERNAL_ERROR = 3


def _complex_matrix_json(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _projection_json(p: Projection):
    return {
        "rank": p.rank,
        "frame": _complex_matrix_json(p.frame.cols.T),  # row vectors of the range basis
    }


def _report_json(report):
    payload = {
        "property": report.spec_name,
        "dim": report.dim,
        "projection": _projection_json(report.projection),
        "residuals": list(report.residuals),
        "commutation_residuals": list(report.commutation_residuals),
        "iterations": report.iterations,
        "constraint_rank": report.constraint_rank,
        "dimension_trace": list(report.dimension_trace),
    }
    if report.complement_audit is not None:
        payload["audit"] = {
            "rank": report.complement_audit.rank,
            "residual": report.complement_audit.residual,
        }
    return payload


def _print_projection(p: Projection, indent="  "):
    print(f"{indent}rank: {p.rank}")
    for row in p.frame.cols.T:
        print(indent + "  " + "  ".join(f"{z.real:+.6g}{z.imag:+.6g}j" for z in row))


def _emit(args, payload, human):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        human()


def _tolerance(args) -> ToleranceProfile:
    return ToleranceProfile(rank_rel=args.tol_rank, res_rel=args.tol_res)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("BAERDEC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"BAERDEC_SEED must be an integer, got {env!r}")
    return 0


def _load_tuple(args, arity_hint=None):
    mf = load_matrix_file(args.infile)
    if args.names:
        names = [s for s in args.names.split(",") if s]
    else:
        names = mf.names()
    if not names:
        raise InputError("no matrices selected; use --names or a nonempty file")
    mats = tuple(mf[name] for name in names)
    if arity_hint is not None and len(mats) != arity_hint:
        raise InputError(f"command needs {arity_hint} matrices, got {len(mats)} "
                         f"({', '.join(names)})")
    return TupleInstance(mats, labels=tuple(names))


def _resolve_spec(args, t: TupleInstance):
    functionals = getattr(args, "functional", None)
    if functionals:
        if args.property:
            raise InputError("--property and --functional are mutually exclusive")
        return user_property(functionals, t.labels, name="user")
    if not args.property:
        raise InputError("one of --property or --functional is required")
    return builtin_property(args.property, t.dim)


def cmd_decompose(args):
    tol = _tolerance(args)
    t = _load_tuple(args)
    spec = _resolve_spec(args, t)
    report = max_property_projection(t, spec, tol)
    payload = {"command": "decompose", "names": list(t.labels), **_report_json(report)}

    def human():
        print(f"property: {spec.name}")
        print(f"tuple: {', '.join(t.labels)} (dim {t.dim})")
        print("projection:")
        _print_projection(report.projection)
        print(f"residuals: {', '.join(f'{r:.3e}' for r in report.residuals[:8])}"
              + (" ..." if len(report.residuals) > 8 else ""))
        print(f"iterations: {report.iterations}  constraint rank: {report.constraint_rank}")
        audit = report.complement_audit
        print(f"audit: rank {audit.rank} (residual {audit.residual:.3e})")

    _emit(args, payload, human)
    return EXIT_OK


def _cells_json(cells):
    return [
        {"bits": list(bits), **_projection_json(p)} for bits, p in cells
    ]


def cmd_combine(args):
    tol = _tolerance(args)
    t = _load_tuple(args)
    names = [s for s in args.properties.split(",") if s]
    if not names:
        raise InputError("--properties needs a comma-separated list")
    specs = [builtin_property(n, t.dim) for n in names]
    cells = combine_properties(t, specs, tol)
    payload = {
        "command": "combine",
        "properties": list(cells.properties),
        "names": list(t.labels),
        "cells": _cells_json(cells.cells),
        "reports": [_report_json(r) for r in cells.reports],
    }

    def human():
        print(f"properties: {', '.join(cells.properties)}")
        for bits, p in cells.cells:
            print(f"cell {''.join(map(str, bits))}:")
            _print_projection(p)

    _emit(args, payload, human)
    return EXIT_OK


def cmd_triple(args):
    tol = _tolerance(args)
    t = _load_tuple(args, arity_hint=2)
    tri = triple_decompose(t.elements[0], t.elements[1], tol)
    payload = {
        "command": "triple",
        "names": list(t.labels),
        "summands": [
            {"label": label, **_projection_json(p)} for label, p in tri.summands
        ],
    }

    def human():
        for label, p in tri.summands:
            print(f"{label}:")
            _print_projection(p)

    _emit(args, payload, human)
    return EXIT_OK


def cmd_quad(args):
    tol = _tolerance(args)
    t = _load_tuple(args, arity_hint=2)
    specs = [builtin_property("commuting", t.dim), builtin_property("compatible", t.dim)]
    cells = combine_properties(t, specs, tol)
    payload = {
        "command": "quad",
        "properties": list(cells.properties),
        "names": list(t.labels),
        "cells": _cells_json(cells.cells),
    }

    def human():
        print("quaternary decomposition (commuting, compatible):")
        for bits, p in cells.cells:
            print(f"cell {''.join(map(str, bits))}: rank {p.rank}")

    _emit(args, payload, human)
    return EXIT_OK


def cmd_canonical(args):
    tol = _tolerance(args)
    t = _load_tuple(args, arity_hint=2)
    spec = _resolve_spec_arity1(args, t)
    rep = canonical_decompose(t.elements[0], t.elements[1], spec, tol)
    payload = {
        "command": "canonical",
        "property": spec.name,
        "names": list(t.labels),
        "verdict": rep.verdict,
        "commutation_residuals": {k: v for k, v in rep.commutation.items()},
        "p_x": _projection_json(rep.p_x),
        "p_y": _projection_json(rep.p_y),
        "q_x": _projection_json(rep.q_x),
        "q_y": _projection_json(rep.q_y),
    }
    if rep.cells is not None:
        payload["cells"] = _cells_json(rep.cells)

    def human():
        print(f"canonical decomposition w.r.t. {spec.name}: {rep.verdict}")
        if rep.cells is not None:
            for bits, p in rep.cells:
                print(f"cell {''.join(map(str, bits))}: rank {p.rank}")
        else:
            print(f"p_x rank {rep.p_x.rank}, joint q_x rank {rep.q_x.rank}; "
                  f"p_y rank {rep.p_y.rank}, joint q_y rank {rep.q_y.rank}")

    _emit(args, payload, human)
    return EXIT_OK if rep.exists else EXIT_VERDICT_NEGATIVE


def _resolve_spec_arity1(args, t):
    functionals = getattr(args, "functional", None)
    if functionals:
        if args.property:
            raise InputError("--property and --functional are mutually exclusive")
        return user_property(functionals, ["x"], name="user")
    if not args.property:
        raise InputError("one of --property or --functional is required")
    spec = builtin_property(args.property, t.dim)
    if spec.arity != 1:
        raise InputError("canonical decomposition needs an arity-1 property")
    return spec


def cmd_wold(args):
    tol = _tolerance(args)
    t = _load_tuple(args, arity_hint=1)
    rep = wold(t.elements[0], tol)
    payload = {
        "command": "wold",
        "names": list(t.labels),
        "unitary_projection": _projection_json(rep.unitary_projection),
        "shift_rank": rep.shift_rank,
    }

    def human():
        print(f"unitary part rank: {rep.unitary_projection.rank}")
        print(f"shift rank: {rep.shift_rank}")

    _emit(args, payload, human)
    return EXIT_OK


def cmd_halmos_wallen(args):
    tol = _tolerance(args)
    t = _load_tuple(args, arity_hint=1)
    rep = halmos_wallen(t.elements[0], tol)
    if not rep.is_power_partial_isometry:
        payload = {
            "command": "halmos-wallen",
            "names": list(t.labels),
            "verdict": "not a power partial isometry",
            "first_failing_power": rep.first_failing_power,
            "failing_residual": rep.failing_residual,
        }
        _emit(args, payload, lambda: print(
            f"not a power partial isometry: power {rep.first_failing_power} "
            f"fails with residual {rep.failing_residual:.3e}"))
        return EXIT_VERDICT_NEGATIVE
    prof = rep.profile
    payload = {
        "command": "halmos-wallen",
        "names": list(t.labels),
        "verdict": "power partial isometry",
        "unitary_projection": _projection_json(prof.unitary_projection),
        "multiplicities": {str(k): m for k, m in sorted(prof.multiplicities.items())},
        "pure_isometry_rank": prof.pure_isometry_rank,
        "pure_coisometry_rank": prof.pure_coisometry_rank,
    }

    def human():
        print(f"unitary part rank: {prof.unitary_projection.rank}")
        print(f"pure isometry rank: {prof.pure_isometry_rank}, "
              f"pure co-isometry rank: {prof.pure_coisometry_rank}")
        if prof.multiplicities:
            for k, m in sorted(prof.multiplicities.items()):
                print(f"truncated shifts of length {k}: {m}")
        else:
            print("no truncated-shift part")

    _emit(args, payload, human)
    return EXIT_OK


def cmd_defect(args):
    tol = _tolerance(args)
    t = _load_tuple(args, arity_hint=1)
    p = defect_projection(t.elements[0], args.power, tol)
    payload = {
        "command": "defect",
        "names": list(t.labels),
        "power": args.power,
        "projection": _projection_json(p),
    }
    _emit(args, payload, lambda: _print_projection(p, indent=""))
    return EXIT_OK


def cmd_wold_slocinski(args):
    tol = _tolerance(args)
    t = _load_tuple(args, arity_hint=2)
    rep = wold_slocinski(t.elements[0], t.elements[1], tol)
    payload = {
        "command": "wold-slocinski",
        "names": list(t.labels),
        "cells": _cells_json(rep.cells.cells),
        "identity_residuals": rep.identity_residuals,
        "telescoping": [
            {"entry": label, "power": m, "residual": r}
            for label, m, r in rep.telescoping
        ],
    }

    def human():
        for bits, p in rep.cells.cells:
            print(f"cell {''.join(map(str, bits))}: rank {p.rank}")
        for k, v in rep.identity_residuals.items():
            print(f"identity {k}: residual {v:.3e}")
        worst = max(r for _, _, r in rep.telescoping)
        print(f"telescoping checks (beyond the isometric setting): worst {worst:.3e}")

    _emit(args, payload, human)
    return EXIT_OK


def cmd_leftproj(args):
    tol = _tolerance(args)
    t = _load_tuple(args, arity_hint=1)
    from .ring import left_projection

    p = left_projection(t.elements[0], tol)
    payload = {
        "command": "leftproj",
        "names": list(t.labels),
        "projection": _projection_json(p),
    }
    _emit(args, payload, lambda: _print_projection(p, indent=""))
    return EXIT_OK


def cmd_lattice(args):
    from .ring import proj_inf, proj_sup

    tol = _tolerance(args)
    t = _load_tuple(args)
    ps = []
    for name, m in zip(t.labels, t.elements):
        try:
            ps.append(Projection.from_matrix(m, tol))
        except InternalConsistencyError:
            raise InputError(f"matrix {name!r} is not a projection within tolerance")
    result = proj_sup(ps, tol) if args.op == "sup" else proj_inf(ps, tol)
    payload = {
        "command": f"lattice {args.op}",
        "names": list(t.labels),
        "projection": _projection_json(result),
    }
    _emit(args, payload, lambda: _print_projection(result, indent=""))
    return EXIT_OK


def _write_blocks(args, blocks, payload):
    text = serialize_matrix_file(blocks)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        _emit(args, payload, lambda: print(f"wrote {', '.join(blocks)} to {args.out}"))
    else:
        if args.json:
            print(json.dumps(payload, indent=2, sort_keys=True))
        else:
            sys.stdout.write(text)
    return EXIT_OK


def cmd_gen_paper_example(args):
    phase = parse_entry(args.phase) if args.phase else 1j
    variant = args.variant.replace("-", "_")
    seed = args.seed  # conjugation only when a seed is given explicitly
    t = gen_paper_example(variant, phase=phase, seed=seed)
    payload = {"command": "gen paper-example", "variant": variant, "seed": seed,
               "names": ["x", "y"]}
    return _write_blocks(args, {"x": t.elements[0], "y": t.elements[1]}, payload)


def cmd_gen_planted(args):
    tol = _tolerance(args)
    seed = _seed(args)
    inst = random_planted(args.property, args.dim, seed, tol)
    blocks = {}
    labels = ("x", "y", "z", "w")
    for label, m in zip(labels, inst.tuple.elements):
        blocks[label] = m
    blocks["expected"] = inst.expected_projection.matrix
    payload = {
        "command": "gen planted",
        "property": args.property,
        "dim": args.dim,
        "seed": seed,
        "expected_rank": inst.expected_projection.rank,
        "names": list(blocks),
    }
    return _write_blocks(args, blocks, payload)


def _parse_multiplicities(text):
    mult = {}
    if not text:
        return mult
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            k, m = item.split(":")
            mult[int(k)] = int(m)
        except ValueError:
            raise InputError(f"bad multiplicity item {item!r}; expected k:m")
    return mult


def cmd_gen_ppi(args):
    tol = _tolerance(args)
    seed = _seed(args)
    mult = _parse_multiplicities(args.multiplicities)
    x, profile = gen_power_partial_isometry(mult, args.unitary_dim, seed, tol)
    payload = {
        "command": "gen ppi",
        "seed": seed,
        "multiplicities": {str(k): m for k, m in sorted(profile.multiplicities.items())},
        "unitary_rank": profile.unitary_projection.rank,
        "names": ["x"],
    }
    return _write_blocks(args, {"x": x}, payload)


def cmd_selfcheck(args):
    tol = _tolerance(args)
    results = run_selfcheck(tol, quick=args.quick, print_lines=not args.json)
    payload = {
        "command": "selfcheck",
        "suites": [
            {"name": r.name, "passed": r.passed, "detail": r.detail,
             "seconds": round(r.seconds, 3)}
            for r in results
        ],
        "passed": all(r.passed for r in results),
    }
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    # run_selfcheck already printed one line per suite
    return EXIT_OK if payload["passed"] else EXIT_INTERNAL_ERROR


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-rank", type=float, default=1e-10,
                        help="relative singular-value cutoff (default 1e-10)")
    common.add_argument("--tol-res", type=float, default=1e-8,
                        help="relative residual acceptance (default 1e-8)")
    common.add_argument("--seed", type=int, default=None,
                        help="seed for generators (default: $BAERDEC_SEED or 0)")
    common.add_argument("--json", action="store_true",
                        help="machine-readable report on stdout")

    io_args = argparse.ArgumentParser(add_help=False)
    io_args.add_argument("--in", dest="infile", required=True, help="matrix file")
    io_args.add_argument("--names", default=None,
                         help="comma-separated matrix names forming the tuple "
                              "(default: all, in file order)")

    prop_args = argparse.ArgumentParser(add_help=False)
    prop_args.add_argument("--property", default=None,
                           help="built-in property: " + ", ".join(BUILTIN_NAMES))
    prop_args.add_argument("--functional", action="append", default=None,
                           help="user functional expression (repeatable)")

    parser = argparse.ArgumentParser(
        prog="baerdec",
        description="Maximal property projections and cell decompositions "
                    "of complex matrix tuples.",
    )
    parser.add_argument("--version", action="version", version=f"baerdec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[common, io_args, prop_args],
                       help="maximal projection for one property")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("combine", parents=[common, io_args],
                       help="cell decomposition along several properties")
    p.add_argument("--properties", required=True,
                   help="comma-separated built-in property names")
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("triple", parents=[common, io_args],
                       help="doubly commuting / compatible / incompatible split of a pair")
    p.set_defaults(func=cmd_triple)

    p = sub.add_parser("quad", parents=[common, io_args],
                       help="quaternary commuting x compatible decomposition of a pair")
    p.set_defaults(func=cmd_quad)

    p = sub.add_parser("canonical", parents=[common, io_args, prop_args],
                       help="canonical quaternary decomposition of a pair by one property")
    p.set_defaults(func=cmd_canonical)

    p = sub.add_parser("wold", parents=[common, io_args],
                       help="Wold split of an isometry")
    p.set_defaults(func=cmd_wold)

    p = sub.add_parser("halmos-wallen", parents=[common, io_args],
                       help="unitary plus truncated shifts analysis")
    p.set_defaults(func=cmd_halmos_wallen)

    p = sub.add_parser("defect", parents=[common, io_args],
                       help="range projection of x^m (1 - [x])")
    p.add_argument("--power", type=int, required=True)
    p.set_defaults(func=cmd_defect)

    p = sub.add_parser("wold-slocinski", parents=[common, io_args],
                       help="four-cell Wold split of a doubly commuting isometry pair")
    p.set_defaults(func=cmd_wold_slocinski)

    p = sub.add_parser("leftproj", parents=[common, io_args],
                       help="range projection of a matrix")
    p.set_defaults(func=cmd_leftproj)

    p = sub.add_parser("lattice", parents=[common, io_args],
                       help="supremum or infimum of projections")
    p.add_argument("op", choices=("sup", "inf"))
    p.set_defaults(func=cmd_lattice)

    gen = sub.add_parser("gen", help="write generator output as a matrix file")
    gen_sub = gen.add_subparsers(dest="generator", required=True)

    p = gen_sub.add_parser("paper-example", parents=[common],
                           help="the nine-dimensional compatible noncommuting pair")
    p.add_argument("--variant", choices=("y", "y-prime", "y_prime"), default="y")
    p.add_argument("--phase", default=None, help="unimodular phase for y-prime (default 1j)")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.set_defaults(func=cmd_gen_paper_example)

    p = gen_sub.add_parser("planted", parents=[common],
                           help="seeded instance with a known maximal projection")
    p.add_argument("--property", required=True, choices=BUILTIN_NAMES)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_planted)

    p = gen_sub.add_parser("ppi", parents=[common],
                           help="seeded power partial isometry with known shift profile")
    p.add_argument("--multiplicities", default="",
                   help="comma-separated k:m block counts, e.g. 2:1,3:2")
    p.add_argument("--unitary-dim", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_ppi)

    p = sub.add_parser("selfcheck", parents=[common],
                       help="run the acceptance suites end to end")
    p.add_argument("--quick", action="store_true",
                   help="reduced instance counts (smoke test)")
    p.set_defaults(func=cmd_selfcheck)

    return parser


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, which matches the input-error code
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InternalConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except BaerdecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
