"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with its measurement so the
log of a full ``pytest -v`` run doubles as the acceptance report.
"""

from __future__ import annotations

import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from pcalc.calculus import is_bidegree, is_codegree, is_degree, is_injective, is_projective
from pcalc.checks import (
    SuiteResult,
    bkc_shape,
    calculus_corpus,
    check_bkc,
    check_block_roundtrip,
    check_cube,
    check_homotopy,
    check_layers,
    check_main_lift,
    check_square,
    check_theorem_ab,
    middle_exact_fixtures,
    random_bkc_sum,
    random_block_sum,
    random_cube,
    random_incomparable,
    random_instance,
    random_shape,
    random_sum,
)
from pcalc.cli import main
from pcalc.decompose import Block, block_multiset, middle_exact_blocks
from pcalc.exactness import is_k_middle_exact
from pcalc.fixtures import ex1, ex2, ex4
from pcalc.lattice import FinitePoset

DATA = Path(__file__).resolve().parents[1] / "src" / "pcalc" / "data"
GOLDEN = Path(__file__).resolve().parent / "golden"
SEED = 20260101


@pytest.fixture
def report(capsys):
    def emit(k: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[criterion {k:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return emit


def summary(R: SuiteResult) -> str:
    total = sum(t.passed + t.failed for t in R.tallies.values())
    out = f"{total - R.failures}/{total} checks"
    bad = [f"{t.name}: {t.witness}" for t in R.tallies.values() if t.failed]
    return out + (f"; first failure {bad[0]}" if bad else "")


def test_c01_ex1_end_to_end(report, capsys):
    t0 = time.perf_counter()
    F = ex1()
    codeg = bool(is_codegree(F, 1))
    rep = middle_exact_blocks(F)
    got = block_multiset(rep)
    want = sorted(
        [Block.classify((1, 2), (0, 2), (3, 3)), Block.classify((0, 2), (2, 2), (3, 3)), Block.classify((0, 1), (0, 1), (3, 3))],
        key=Block.sort_key,
    )
    code = main(["decompose", str(DATA / "ex1.json"), "--mode", "blocks", "--json", "-"])
    cli = json.loads(capsys.readouterr().out)["decomposition"]
    dt = time.perf_counter() - t0
    ok = codeg and got == want and rep.verified and code == 0 and cli["verified_iso"] and dt < 1.0
    assert report(1, ok, f"codegree-1={codeg}, blocks={[str(b) for b in got]}, iso verified={rep.verified}, {dt:.3f} s < 1 s")


def test_c02_ex2_cube(report):
    t0 = time.perf_counter()
    F = ex2()
    codeg = bool(is_codegree(F, 1))
    deg = is_degree(F, 1)
    me3 = is_k_middle_exact(F, 3)
    w = me3.witness or {}
    h2 = w.get("homology", {}).get("2")
    full = w.get("top") == (1, 1, 1)
    dt = time.perf_counter() - t0
    ok = codeg and not deg and deg.witness is not None and deg.witness.get("k") == 2 and not me3 and h2 == 1 and full and dt < 1.0
    assert report(2, ok, f"codegree-1={codeg}, degree-1={bool(deg)} (square {deg.witness}), 3-middle-exact={bool(me3)} H_2={h2}, {dt:.3f} s < 1 s")


def test_c03_ex4_n_lattice(report, capsys):
    F = ex4()
    me = {k: bool(is_k_middle_exact(F, k)) for k in (2, 3)}
    proj, inj, bideg = bool(is_projective(F)), bool(is_injective(F)), bool(is_bidegree(F, 1))
    code = main(["decompose", str(DATA / "ex4.json"), "--mode", "bkc"])
    capsys.readouterr()
    ok = all(me.values()) and not (proj or inj or bideg) and code == 4
    assert report(3, ok, f"middle-exact {me}, projective={proj}, injective={inj}, bidegree-1={bideg}, bkc exit code={code}")


def test_c04_approximation_suite(report):
    rng = np.random.default_rng([SEED, 4])
    R = SuiteResult("calculus")
    t0 = time.perf_counter()
    for F, w in calculus_corpus(rng, 200):
        check_theorem_ab(R, F, w)
    dt = time.perf_counter() - t0
    assert report(4, R.failures == 0 and dt < 60, f"200 modules over GF(2)/GF(5): {summary(R)}, {dt:.1f} s < 60 s")


def test_c05_layer_suite(report):
    rng = np.random.default_rng([SEED, 4])  # the same corpus as criterion 4
    R = SuiteResult("layers")
    threes = 0
    for F, w in calculus_corpus(rng, 200):
        check_layers(R, F, w)
        threes += len(F.poset.shape) == 3
    assert report(5, R.failures == 0, f"{summary(R)} ({threes} three-factor grids)")


def test_c06_block_roundtrip(report):
    rng = np.random.default_rng([SEED, 6])
    R = SuiteResult("blocks")
    t0 = time.perf_counter()
    for t in range(100):
        F, blocks = random_block_sum(rng, (5, 5), (2, 5)[t % 2])
        check_block_roundtrip(R, F, blocks)
    dt = time.perf_counter() - t0
    assert report(6, R.failures == 0 and dt < 60, f"100 block multisets on 5x5: {summary(R)}, {dt:.1f} s < 60 s")


def test_c07_bkc(report):
    rng = np.random.default_rng([SEED, 7])
    R = SuiteResult("bkc")
    for t in range(50):
        F, gens, cogens = random_bkc_sum(rng, FinitePoset.grid(bkc_shape(t)), (2, 5)[t % 2])
        check_bkc(R, F, gens, cogens)
    assert report(7, R.failures == 0, f"50 sums of free, cofree and bidegree-1 parts: {summary(R)}")


def test_c08_homotopy(report):
    rng = np.random.default_rng([SEED, 8])
    R = SuiteResult("homotopy")
    t0 = time.perf_counter()
    for t in range(100):
        shape = random_shape(rng, (4, 4), factors=2)
        p = (2, 5)[t % 2]
        F = random_sum(rng, FinitePoset.grid(shape), p)
        check_homotopy(R, F, rng, {"trial": t, "shape": list(shape), "prime": p})
    fixtures = middle_exact_fixtures(rng, 10)
    for k, F in enumerate(fixtures):
        check_main_lift(R, F, {"fixture": k})
    dt = time.perf_counter() - t0
    detail = f"100 modules on grids <= 4x4 plus {len(fixtures)} middle-exact fixtures: {summary(R)}, {dt:.1f} s < 60 s"
    assert report(8, R.failures == 0 and dt < 60, detail)


def test_c09_exactness_cross_checks(report):
    rng = np.random.default_rng([SEED, 9])
    cubes, squares = SuiteResult("cubes"), SuiteResult("squares")
    for _ in range(1000):
        P, F = random_instance(rng)
        check_cube(cubes, F, random_cube(rng, P))
        check_square(squares, F, *random_incomparable(rng, P))
    ok = cubes.failures == 0 and squares.failures == 0
    assert report(9, ok, f"cubes {summary(cubes)}; squares {summary(squares)}")


def test_c10_golden_reports(report, tmp_path):
    """Fresh interpreter per run, compared byte for byte with the checked-in reports."""
    same = {}
    for name in ("ex1", "ex2", "ex4"):
        runs = []
        for r in range(2):
            out = tmp_path / f"{name}_{r}.json"
            subprocess.run(
                [sys.executable, "-m", "pcalc.cli", "analyze", str(DATA / f"{name}.json"), "--json", str(out)],
                check=True,
                capture_output=True,
            )
            runs.append(out.read_bytes())
        same[name] = runs[0] == runs[1] == (GOLDEN / f"{name}_analyze.json").read_bytes()
    assert report(10, all(same.values()), f"byte-identical golden reports: {same}")
