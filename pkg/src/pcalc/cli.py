"""Command-line entry point: ``pcalc analyze|approx|decompose|koszul|lift|check|gen``.

Exit codes: 0 success, 1 property failure, 2 input error, 3 precondition
failure, 4 unsupported poset.  Reports are JSON with sorted keys and no
timings, so identical invocations give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .calculus import codegree_approx, degree_approx, is_codegree, is_degree, is_injective, is_projective
from .chainhtpy import homotopy_lift_T1, lift_squares_cocartesian, verify_h0_roundtrip
from .checks import SUITES, run_suites
from .decompose import (
    _require_grid,
    an_interval_decompose,
    bidegree1_interval_decompose,
    bkc_decompose,
    cofree_structure,
    free_structure,
    middle_exact_blocks,
    middle_exact_split,
)
from .errors import InputError, NotCofree, NotFree, PcalcError, PosetUnsupported, PreconditionFailed
from .exactness import is_2_middle_exact, is_k_middle_exact, koszul
from .lattice import DEFAULT_MAX_COVERS, FinitePoset, cube_from_cover, enumerate_cubes
from .persmod import random_comodule, random_module, verify_natural_iso

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT, EXIT_PRECONDITION, EXIT_UNSUPPORTED = 0, 1, 2, 3, 4


class PropertyFailure(Exception):
    """Raised after the report is built when a checked property failed."""


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, InputError):
        return EXIT_INPUT
    if isinstance(exc, (PreconditionFailed, NotFree, NotCofree)):
        return EXIT_PRECONDITION
    if isinstance(exc, PosetUnsupported):
        return EXIT_UNSUPPORTED
    return EXIT_PROPERTY


def _verdict(v) -> dict:
    return io.to_jsonable(v.to_json())


def _max_dim(P: FinitePoset, which: str) -> int:
    prof = P.profile
    return max((getattr(prof, which) or {None: 0}).values())


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> tuple[dict, list[str]]:
    F = io.load_module(args.file)
    P = F.poset
    prof = P.profile
    report = {
        "command": "analyze",
        "input": {"poset": io.poset_to_json(P), "prime": F.p, "total_dim": int(F.total_dim())},
        "lattice": {
            "is_lattice": prof.is_lattice,
            "is_distributive": prof.is_distributive,
            "bottom": prof.bottom,
            "top": prof.top,
            "witness": prof.witness,
        },
    }
    lines = [f"lattice: {'distributive' if prof.is_distributive else 'NOT distributive'}"]
    if not prof.is_distributive:
        raise PreconditionFailed("index poset is not a distributive lattice", witness=io.to_jsonable(prof.witness))
    rank = max(_max_dim(P, "jdim"), 1)
    report["lattice"]["max_jdim"] = _max_dim(P, "jdim")
    report["lattice"]["max_mdim"] = _max_dim(P, "mdim")
    ns = range(1, rank + 1) if args.all_n else [1]
    report["codegree"] = {str(n): _verdict(is_codegree(F, n, max_covers=args.max_covers)) for n in ns}
    report["degree"] = {str(n): _verdict(is_degree(F, n, max_covers=args.max_covers)) for n in ns}
    report["middle_exact"] = {"2": _verdict(is_2_middle_exact(F))}
    for k in range(2, rank + 2):
        report["middle_exact"][f"koszul_{k}"] = _verdict(is_k_middle_exact(F, k, max_covers=args.max_covers))
    report["projective"] = _verdict(is_projective(F))
    report["injective"] = _verdict(is_injective(F))
    for n in ns:
        for side in ("codegree", "degree"):
            v = report[side][str(n)]
            extra = f"  witness {json.dumps(v['witness'])}" if not v["ok"] else ""
            lines.append(f"{side} {n}: {v['ok']}{extra}")
    lines.append(f"2-middle-exact: {report['middle_exact']['2']['ok']}")
    for k in range(2, rank + 2):
        v = report["middle_exact"][f"koszul_{k}"]
        extra = f"  witness {json.dumps(v['witness'])}" if not v["ok"] else ""
        lines.append(f"{k}-middle-exact (Koszul): {v['ok']}{extra}")
    lines.append(f"projective: {report['projective']['ok']}   injective: {report['injective']['ok']}")
    return report, lines


def cmd_approx(args) -> tuple[dict, list[str]]:
    F = io.load_module(args.file)
    if args.codegree is not None:
        res, side, n = codegree_approx(F, args.codegree, args.path), "codegree", args.codegree
    else:
        res, side, n = degree_approx(F, args.degree, args.path), "degree", args.degree
    P = F.poset
    nt_name = "counit" if side == "codegree" else "unit"
    out = io.module_to_json(res.approx)
    report = {
        "command": "approx",
        "side": side,
        "n": n,
        "module": out,
        nt_name: {io.element_key(x): io.matrix_to_json(c) for x, c in zip(P.elements, res.nt.comps) if c.size},
        "natural_iso": verify_natural_iso(res.nt),
    }
    if args.output:
        Path(args.output).write_text(io.dumps(out))
    dims = " ".join(f"{io.element_key(x)}:{int(d)}" for x, d in zip(P.elements, res.approx.dims))
    label = f"T_{n}" if side == "codegree" else f"T^{n}"
    lines = [f"{label} dims: {dims}", f"{nt_name} is an isomorphism: {report['natural_iso']}"]
    return report, lines


def _decomposition(F, mode: str):
    if mode == "blocks":
        return middle_exact_blocks(F), None
    if mode == "bkc":
        return bkc_decompose(F), None
    if mode == "bidegree1":
        return bidegree1_interval_decompose(F), None
    if mode == "intervals":
        return an_interval_decompose(F), None
    if mode == "split":
        _, _, rep = middle_exact_split(F)
        return rep, None
    if mode == "free":
        ms, rep = free_structure(F)
        return rep, ms
    if mode == "cofree":
        ms, rep = cofree_structure(F)
        return rep, ms
    raise InputError(f"unknown mode {mode!r}")


def cmd_decompose(args) -> tuple[dict, list[str]]:
    F = io.load_module(args.file)
    if args.mode in ("bkc", "bidegree1"):
        _require_grid(F.poset)
    rep, ms = _decomposition(F, args.mode)
    # re-verify the emitted isomorphism independently of the builder
    verified = rep.verified and verify_natural_iso(rep.iso)
    if not verified:
        raise PropertyFailure("emitted isomorphism failed re-verification")
    body = io.to_jsonable(rep.to_json(with_iso=args.with_iso))
    body["verified_iso"] = verified
    report = {"command": "decompose", "mode": args.mode, "decomposition": body}
    if ms is not None:
        report["multiset"] = [[io.element_key(a), m] for a, m in sorted(ms.items(), key=lambda kv: F.poset.index(kv[0]))]
    lines = [f"{len(rep.summands)} summand(s), isomorphism verified: {verified}"]
    for s in body["summands"]:
        d = dict(s["description"])
        if d.get("kind") == "block":
            (a, b), (c, e) = d["rect"]
            lines.append(f"  {d['block']} [{a},{b}]x[{c},{e}]")
        elif "elements" in d:
            lines.append(f"  interval on {len(d['elements'])} element(s): {' '.join(map(str, d['elements']))}")
        else:
            lines.append(f"  {s['label']}: {d.get('kind')} (total dim {s['total_dim']})")
    return report, lines


def _parse_element(P: FinitePoset, text: str):
    return io._parse_key(P, text)


def cmd_koszul(args) -> tuple[dict, list[str]]:
    F = io.load_module(args.file)
    P = F.poset
    if args.cover:
        if not args.top:
            raise InputError("--cover needs --top")
        cubes = [cube_from_cover(P, _parse_element(P, args.top), tuple(_parse_element(P, c) for c in args.cover))]
    else:
        cubes = enumerate_cubes(P, args.k, max_covers=args.max_covers)
    entries, lines, bad = [], [], 0
    for cube in cubes:
        H = koszul(F, cube).homology_table()
        internal = {i: h for i, h in H.items() if 0 < i < cube.k and h}
        bad += bool(internal)
        entries.append({"cube": io.to_jsonable(cube.to_json()), "homology": {str(i): h for i, h in sorted(H.items())}})
        if internal or args.cover:
            lines.append(f"cube {json.dumps(io.to_jsonable(cube.to_json()))}: homology {entries[-1]['homology']}")
    lines.append(f"{len(cubes)} cube(s), {bad} with internal homology")
    return {"command": "koszul", "k": cubes[0].k if cubes else args.k, "cubes": entries, "nonexact": bad}, lines


def cmd_lift(args) -> tuple[dict, list[str]]:
    F = io.load_module(args.file)
    _require_grid(F.poset, 2)
    lift = homotopy_lift_T1(F)
    rep = verify_h0_roundtrip(F)
    P = F.poset
    per = {}
    for x, C in zip(P.elements, lift.objects):
        per[io.element_key(x)] = {
            "complex_dims": {str(i): C.dim(i) for i in C.degrees},
            "homology": {str(i): h for i, h in C.homology_table().items()},
        }
    squares = lift_squares_cocartesian(lift)
    report = {
        "command": "lift",
        "elements": per,
        "roundtrip": rep.to_json(),
        "squares_homotopy_cocartesian": squares is None,
        "square_witness": io.to_jsonable(squares),
    }
    lines = [
        f"H_0 of the lift is T_1 F: {rep.t1_iso}",
        f"H_0 of the lift is F: {rep.lift_matches_input}",
        f"2-middle-exact: {rep.middle_exact}",
    ]
    if rep.middle_exact:
        lines.append(f"H_0 of lift(K) + colift(T^1 F) is F: {rep.main_lift_iso}")
    lines.append(f"lift squares homotopy cocartesian: {squares is None}")
    if not rep.lift_matches_input:
        diff = [io.element_key(x) for i, x in enumerate(P.elements) if rep.h0_dims[x] != F.dims[i]]
        lines.append(f"H_0 of the lift differs from F in dimension at: {' '.join(diff) or '(none)'}")
    if not bool(rep) or squares is not None:
        report_failure = PropertyFailure("homotopy round trip failed")
        report_failure.report = report
        raise report_failure
    return report, lines


def _parse_grid(text: str) -> tuple[int, ...]:
    try:
        shape = tuple(int(t) for t in text.lower().split("x"))
    except ValueError:
        raise InputError(f"bad grid {text!r}; use e.g. 4x4x3") from None
    if not shape or min(shape) < 1:
        raise InputError(f"bad grid {text!r}")
    return shape


def cmd_check(args) -> tuple[dict, list[str]]:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    shape = _parse_grid(args.grid) if args.grid else None
    results = run_suites(names, args.seed, args.trials, shape, fault=args.inject_fault)
    report = {
        "command": "check",
        "seed": args.seed,
        "trials": args.trials,
        "suites": [io.to_jsonable(r.to_json()) for r in results],
        "failures": sum(r.failures for r in results),
    }
    lines = []
    for r in results:
        total = sum(t.passed + t.failed for t in r.tallies.values())
        lines.append(f"{r.suite}: {total - r.failures}/{total} checks passed ({r.seconds:.2f} s)")
        for t in r.tallies.values():
            if t.failed:
                lines.append(f"  FAIL {t.name}: {t.failed} failure(s); first: {json.dumps(io.to_jsonable(t.witness))}")
    if report["failures"]:
        exc = PropertyFailure(f"{report['failures']} property failure(s)")
        exc.report, exc.lines = report, lines
        raise exc
    return report, lines


def cmd_gen(args) -> tuple[dict, list[str]]:
    shape = _parse_grid(args.grid)
    P = FinitePoset.grid(shape)
    try:
        from .exactla import check_prime

        p = check_prime(args.prime)
    except ValueError as e:
        raise InputError(str(e)) from None
    rng = np.random.default_rng(args.seed)
    make = random_comodule if args.kind == "comodule" else random_module
    F = make(P, None, args.dmax, p, rng=rng)
    out = io.module_to_json(F)
    if args.output:
        Path(args.output).write_text(io.dumps(out))
        return {"command": "gen", "module": out}, [f"wrote {args.output} (total dim {int(F.total_dim())})"]
    return {"command": "gen", "module": out}, [io.dumps(out).rstrip()]


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pcalc", description="Calculus approximations and decompositions of persistence modules.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, with_file=True):
        if with_file:
            p.add_argument("file", help="module file (JSON)")
        p.add_argument("--json", metavar="PATH", help="write the full report to PATH ('-' for stdout)")
        p.add_argument("--max-covers", type=int, default=DEFAULT_MAX_COVERS, help="cap on enumerated pairwise covers")
        p.add_argument("--time", action="store_true", help="print the wall-clock time")

    p = sub.add_parser("analyze", help="degree, exactness and projectivity diagnostics")
    common(p)
    p.add_argument("--all-n", action="store_true", help="test (co)degree n for every n up to the lattice rank")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("approx", help="write T_n F or T^n F")
    common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--codegree", type=int)
    g.add_argument("--degree", type=int)
    p.add_argument("-o", "--output", help="module file for the approximation")
    p.add_argument("--path", choices=["auto", "fast", "generic"], default="auto")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("decompose", help="structural decompositions")
    common(p)
    p.add_argument("--mode", required=True, choices=["blocks", "bkc", "bidegree1", "split", "free", "cofree", "intervals"])
    p.add_argument("--with-iso", action="store_true", help="include the isomorphism matrices")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("koszul", help="Koszul homology of pairwise-cover cubes")
    common(p)
    p.add_argument("--k", type=int, default=2, help="cube dimension when enumerating")
    p.add_argument("--top", help="top element of a single cube")
    p.add_argument("--cover", nargs="+", help="pairwise cover of --top")
    p.set_defaults(func=cmd_koszul)

    p = sub.add_parser("lift", help="homotopy lift of T_1 and the H_0 round trip")
    common(p)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("check", help="randomized property suites")
    common(p, with_file=False)
    p.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--grid", help="largest grid shape, e.g. 4x4x3")
    p.add_argument("--inject-fault", action="store_true", help="add a property that must fail (harness self-test)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="emit a random module file")
    common(p, with_file=False)
    p.add_argument("--grid", default="3x3")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dmax", type=int, default=3)
    p.add_argument("--prime", type=int, default=2)
    p.add_argument("--kind", choices=["module", "comodule"], default="module")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)
    return ap


def _emit(report: dict, path: str | None) -> None:
    if not path:
        return
    text = io.dumps(io.to_jsonable(report))
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        report, lines = args.func(args)
        code = EXIT_OK
    except PropertyFailure as exc:
        report = getattr(exc, "report", {"command": args.command, "error": {"type": "PropertyFailure", "message": str(exc)}})
        lines = getattr(exc, "lines", None) or [f"property failure: {exc}"]
        code = EXIT_PROPERTY
    except PcalcError as exc:
        code = exit_code(exc)
        err = {"type": type(exc).__name__, "message": str(exc), "witness": io.to_jsonable(exc.witness), "exit_code": code}
        report, lines = {"command": args.command, "error": err}, []
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
    if args.json != "-":
        for line in lines:
            print(line)
    if args.time:
        print(f"time: {time.perf_counter() - t0:.3f} s", file=sys.stderr)
    _emit(report, args.json)
    return code


if __name__ == "__main__":
    sys.exit(main())
