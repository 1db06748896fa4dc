"""Randomized property suites.

Each suite draws its instances from a seeded generator and tallies pass/fail
counts per property, keeping the first failing witness.  The CLI ``check``
command and the acceptance tests both run these.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import exactla as la
from .calculus import (
    codegree_approx,
    colayer,
    cross_check_paths,
    degree_approx,
    is_bidegree,
    is_codegree,
    is_degree,
    layer,
    punctured_diagram,
)
from .chainhtpy import (
    ChainMap,
    ComplexValuedModule,
    homology_module,
    homotopy_lift_T1,
    lift_squares_cocartesian,
    verify_h0_roundtrip,
)
from .decompose import (
    Block,
    bkc_decompose,
    block_decompose,
    block_multiset,
    cofree_structure,
    free_structure,
    middle_exact_split,
)
from .errors import PcalcError
from .exactness import ChainComplex, is_2_middle_exact, koszul, middle_exact_square
from .fixtures import ex1, hook
from .lattice import FinitePoset, cube_from_cover, enumerate_cubes, stratum
from .persmod import (
    constant_module,
    direct_sum,
    down_module,
    diagram_colimit,
    diagram_limit,
    random_basis_change,
    random_comodule,
    random_module,
    up_module,
)

DEFAULT_MAX_SHAPE = (4, 4, 3)


@dataclass
class Tally:
    name: str
    passed: int = 0
    failed: int = 0
    witness: object = None

    def to_json(self) -> dict:
        return {"property": self.name, "passed": self.passed, "failed": self.failed, "first_failure": self.witness}


@dataclass
class SuiteResult:
    suite: str
    tallies: dict = field(default_factory=dict)
    seconds: float = 0.0

    def check(self, name: str, ok: bool, witness=None) -> bool:
        t = self.tallies.setdefault(name, Tally(name))
        if ok:
            t.passed += 1
        else:
            t.failed += 1
            if t.witness is None:
                t.witness = witness if witness is not None else True
        return ok

    def guarded(self, name: str, fn, witness=None) -> bool:
        """Run ``fn() -> bool`` and count a library error as a failure."""
        try:
            ok = bool(fn())
        except PcalcError as exc:
            return self.check(name, False, {"error": type(exc).__name__, "message": str(exc), "instance": witness})
        return self.check(name, ok, witness)

    @property
    def failures(self) -> int:
        return sum(t.failed for t in self.tallies.values())

    def to_json(self) -> dict:
        return {"suite": self.suite, "properties": [t.to_json() for t in self.tallies.values()], "failures": self.failures}


# ---------------------------------------------------------------------------
# generators


def random_shape(rng: np.random.Generator, max_shape=DEFAULT_MAX_SHAPE, factors: int | None = None) -> tuple[int, ...]:
    r = factors if factors is not None else int(rng.integers(2, len(max_shape) + 1))
    return tuple(int(rng.integers(2, m + 1)) for m in max_shape[:r])


def random_test_module(rng: np.random.Generator, P: FinitePoset, p: int, dmax: int = 3):
    """A random module or comodule; the comodules give interesting top behaviour."""
    if rng.random() < 0.5:
        return random_module(P, None, dmax, p, rng=rng)
    return random_comodule(P, None, dmax, p, rng=rng)


def random_sum(rng: np.random.Generator, P: FinitePoset, p: int, parts: int = 2):
    """Direct sum of random modules and comodules, in a random basis."""
    mods = [random_test_module(rng, P, p) for _ in range(parts)]
    return random_basis_change(direct_sum(*mods).module, rng)


def random_block(rng: np.random.Generator, shape: tuple[int, int]) -> Block:
    m, n = shape
    kind = int(rng.integers(4))
    a, b = sorted(int(v) for v in rng.integers(0, m, 2))
    c, d = sorted(int(v) for v in rng.integers(0, n, 2))
    if kind == 0:  # birth quadrant
        return Block.classify((a, m - 1), (c, n - 1), shape)
    if kind == 1:  # death quadrant
        return Block.classify((0, b), (0, d), shape)
    if kind == 2:  # vertical strip
        return Block.classify((a, b), (0, n - 1), shape)
    return Block.classify((0, m - 1), (c, d), shape)


def random_blocks(rng: np.random.Generator, shape: tuple[int, int], lo: int = 1, hi: int = 5) -> list[Block]:
    return sorted((random_block(rng, shape) for _ in range(int(rng.integers(lo, hi + 1)))), key=Block.sort_key)


def _ranked(P: FinitePoset, side: str) -> list[int]:
    prof = P.profile
    dims = prof.jdim if side == "join" else prof.mdim
    return [i for i, x in enumerate(P.elements) if dims[x] >= 2]


def random_bkc_sum(rng: np.random.Generator, P: FinitePoset, p: int):
    """``free (+) cofree (+) T_1 T^1 G`` in a random basis, with the generator multisets."""
    gens_at = _ranked(P, "join")
    cogens_at = _ranked(P, "meet")
    gens = sorted(int(g) for g in rng.choice(gens_at, size=int(rng.integers(0, 3))))
    cogens = sorted(int(g) for g in rng.choice(cogens_at, size=int(rng.integers(0, 3))))
    G = random_test_module(rng, P, p, dmax=2)
    B = codegree_approx(degree_approx(G, 1).approx, 1).approx
    parts = [up_module(P, P.elements[g], p) for g in gens] + [down_module(P, P.elements[g], p) for g in cogens] + [B]
    F = random_basis_change(direct_sum(*parts).module, rng)
    ms = lambda xs: {P.elements[g]: xs.count(g) for g in sorted(set(xs))}  # noqa: E731
    return F, ms(gens), ms(cogens)


# ---------------------------------------------------------------------------
# suites


def suite_lattice(rng, trials: int, max_shape=DEFAULT_MAX_SHAPE, primes=(2, 5)) -> SuiteResult:
    R = SuiteResult("lattice")
    for _ in range(trials):
        shape = random_shape(rng, max_shape)
        P = FinitePoset.grid(shape)
        w = {"shape": list(shape)}
        prof = P.profile
        R.check("grid is distributive", prof.is_distributive, w)
        R.check("jdim is the parent count", all(prof.jdim[x] == len(P.parents[i]) for i, x in enumerate(P.elements)), w)
        R.check("mdim is jdim of the opposite", prof.mdim == P.opposite().profile.jdim, w)
        x, y, z = (int(v) for v in rng.integers(0, P.n, 3))
        j, m = P.join_table, P.meet_table
        R.check("join and meet are bounds", bool(P.leq_matrix[x, j[x, y]] and P.leq_matrix[m[x, y], y]), w)
        R.check("distributive law", j[x, m[y, z]] == m[j[x, y], j[x, z]], w)
        n = int(rng.integers(0, len(shape) + 1))
        _, closed = stratum(P, n)
        R.check("grid strata are down-closed", closed, w)
        k = int(rng.integers(1, len(shape) + 1))
        cubes = enumerate_cubes(P, k)
        if cubes:
            c = cubes[int(rng.integers(len(cubes)))]
            R.check("cube re-derives its cover", tuple(c.rederived_cover()) == tuple(c.cover_elements), c.to_json())
            again = cube_from_cover(P, c.top, c.cover_elements)
            R.check("cube from cover is stable", again.assignment == c.assignment, c.to_json())
    return R


def check_theorem_ab(R: SuiteResult, F, w) -> None:
    """Approximations have the promised degree; counits and units of (co)degree-n inputs are invertible."""
    p, r = F.p, len(F.poset.shape)
    T1 = codegree_approx(F, 1).approx
    R.guarded("T_1 F is codegree 1", lambda: is_codegree(T1, 1), w)
    U1 = degree_approx(F, 1).approx
    R.guarded("T^1 F is degree 1", lambda: is_degree(U1, 1), w)
    for n in (1, 2):
        if n > r:
            continue
        for G in (F, codegree_approx(F, n).approx):
            if is_codegree(G, n):
                eps = codegree_approx(G, n).nt
                R.check(f"counit invertible on codegree-{n} input", all(la.is_invertible(c, p) for c in eps.comps), w)
        for G in (F, degree_approx(F, n).approx):
            if is_degree(G, n):
                eta = degree_approx(G, n).nt
                R.check(f"unit invertible on degree-{n} input", all(la.is_invertible(c, p) for c in eta.comps), w)
    R.guarded("grid and generic paths agree", lambda: cross_check_paths(F, 1, "co") is None and cross_check_paths(F, 1, "contra") is None, w)


def check_layers(R: SuiteResult, F, w) -> None:
    R.guarded("D_1 F is bidegree 1", lambda: is_bidegree(colayer(F, 1), 1), w)
    R.guarded("D^1 F is bidegree 1", lambda: is_bidegree(layer(F, 1), 1), w)
    if len(F.poset.shape) >= 3:
        R.guarded("D_2 F is bidegree 2", lambda: is_bidegree(colayer(F, 2), 2), w)
        R.guarded("D^2 F is bidegree 2", lambda: is_bidegree(layer(F, 2), 2), w)


def calculus_corpus(rng, trials: int, max_shape=DEFAULT_MAX_SHAPE, primes=(2, 5)):
    for t in range(trials):
        shape = random_shape(rng, max_shape)
        p = primes[t % len(primes)]
        F = random_sum(rng, FinitePoset.grid(shape), p)
        yield F, {"trial": t, "shape": list(shape), "prime": p}


def suite_calculus(rng, trials: int, max_shape=DEFAULT_MAX_SHAPE, primes=(2, 5)) -> SuiteResult:
    R = SuiteResult("calculus")
    for F, w in calculus_corpus(rng, trials, max_shape, primes):
        check_theorem_ab(R, F, w)
        check_layers(R, F, w)
    return R


def check_cube(R: SuiteResult, F, cube) -> None:
    """Colimit without the top is ``coker d_2``; limit without the bottom (degree ``k``) is ``ker d_{k-1}``."""
    K, k, p = koszul(F, cube), cube.k, F.p
    d, _ = diagram_colimit(punctured_diagram(F, cube, "top")[0])
    R.check("punctured colimit equals Koszul coker d_2", d == K.dim(1) - la.rank(K.d(2), p), cube.to_json())
    d, _ = diagram_limit(punctured_diagram(F, cube, "bottom")[0])
    R.check("punctured limit equals Koszul ker d_(k-1)", d == K.dim(k - 1) - la.rank(K.d(k - 1), p), cube.to_json())


def check_square(R: SuiteResult, F, x, y) -> None:
    """The three routes inside :func:`middle_exact_square` plus Koszul ``H_1`` of the square."""
    P = F.poset

    def routes():
        rep = middle_exact_square(F, x, y)  # raises if its own three routes disagree
        sq = cube_from_cover(P, P.elements[P.join(P.index(x), P.index(y))], (x, y))
        return rep.is_middle_exact == (koszul(F, sq).homology(1) == 0)

    R.guarded("middle-exactness routes agree", routes, {"pair": [x, y], "prime": F.p})


def random_instance(rng, max_shape=DEFAULT_MAX_SHAPE, primes=(2, 5)):
    shape = random_shape(rng, max_shape)
    p = primes[int(rng.integers(len(primes)))]
    P = FinitePoset.grid(shape)
    return P, random_sum(rng, P, p)


def random_cube(rng, P):
    k = int(rng.integers(1, len(P.shape) + 1))
    cubes = enumerate_cubes(P, k)
    return cubes[int(rng.integers(len(cubes)))]


def random_incomparable(rng, P):
    while True:
        x, y = (int(v) for v in rng.integers(0, P.n, 2))
        if not (P.leq_matrix[x, y] or P.leq_matrix[y, x]):
            return P.elements[x], P.elements[y]


def suite_exactness(rng, trials: int, max_shape=DEFAULT_MAX_SHAPE, primes=(2, 5)) -> SuiteResult:
    R = SuiteResult("exactness")
    for _ in range(trials):
        P, F = random_instance(rng, max_shape, primes)
        check_cube(R, F, random_cube(rng, P))
        check_square(R, F, *random_incomparable(rng, P))
    return R


def check_block_roundtrip(R: SuiteResult, F, blocks: list[Block]) -> None:
    w = {"blocks": [str(b) for b in blocks], "prime": F.p}
    if not R.check("block sum is 2-middle-exact", bool(is_2_middle_exact(F)), w):
        return

    def roundtrip():
        T, K, _ = middle_exact_split(F)
        got = block_multiset(block_decompose(T, "degree")) + block_multiset(block_decompose(K, "codegree"))
        return sorted(got, key=Block.sort_key) == blocks

    R.guarded("blocks recovered exactly", roundtrip, w)


def random_block_sum(rng, shape=(5, 5), p: int = 2):
    blocks = random_blocks(rng, shape)
    P = FinitePoset.grid(shape)
    return random_basis_change(direct_sum(*[b.module(P, p) for b in blocks]).module, rng), blocks


def check_bkc(R: SuiteResult, F, gens: dict, cogens: dict) -> None:
    w = {"shape": list(F.poset.shape), "prime": F.p, "generators": list(gens.items()), "cogenerators": list(cogens.items())}

    def bkc():
        rep = bkc_decompose(F)
        B, K, C = (s.module for s in rep.summands)
        ok = rep.verified and int(B.total_dim() + K.total_dim() + C.total_dim()) == int(F.total_dim())
        return ok and free_structure(C)[0] == gens and cofree_structure(K)[0] == cogens

    R.guarded("B+K+C recovers the free and cofree parts", bkc, w)


def bkc_shape(t: int) -> tuple[int, ...]:
    return ((2, 2), (3, 3), (4, 4), (3, 4), (2, 3, 2), (3, 3, 3))[t % 6]


def suite_decompose(rng, trials: int, max_shape=DEFAULT_MAX_SHAPE, primes=(2, 5)) -> SuiteResult:
    R = SuiteResult("decompose")
    for t in range(trials):
        F, blocks = random_block_sum(rng, (5, 5), primes[t % len(primes)])
        check_block_roundtrip(R, F, blocks)
    for t in range(trials):
        F, gens, cogens = random_bkc_sum(rng, FinitePoset.grid(bkc_shape(t)), primes[t % len(primes)])
        check_bkc(R, F, gens, cogens)
    return R


def perturb_lift(M: ComplexValuedModule, rng) -> ComplexValuedModule:
    """Random basis change in every degree plus a constant contractible summand ``cone(id)``."""
    P, p = M.poset, M.p
    c = int(rng.integers(0, 3))
    degs = list(M.degrees) or [0]
    lo, hi = min(degs), max(max(degs), min(degs) + 1)
    extra = {lo: c, lo + 1: c}
    objects, bases = [], []
    for C in M.objects:
        dims = {i: C.dim(i) + extra.get(i, 0) for i in range(lo, hi + 1)}
        B = {i: la.random_invertible(rng, dims[i], p) for i in dims}
        diffs = {}
        for i in range(lo + 1, hi + 1):
            e = la.eye(c) if i == lo + 1 else la.zeros(extra.get(i - 1, 0), extra.get(i, 0))
            d = la.block_diag([C.d(i), e])
            diffs[i] = la.mul(B[i - 1], la.mul(d, la.inverse(B[i], p), p), p)
        objects.append(ChainComplex(dims, diffs, p))
        bases.append(B)
    maps = {}
    for (a, b), f in M.cover_maps.items():
        comps = {}
        for i in range(lo, hi + 1):
            g = la.block_diag([f.comp(i), la.eye(extra.get(i, 0))])
            comps[i] = la.mul(bases[b][i], la.mul(g, la.inverse(bases[a][i], p), p), p)
        maps[(a, b)] = ChainMap(objects[a], objects[b], comps)
    return ComplexValuedModule(P, objects, maps, p)


def check_homotopy(R: SuiteResult, F, rng, w) -> None:
    P, p = F.poset, F.p
    rep = verify_h0_roundtrip(F)
    R.check("H_0 of the lift is T_1 F", rep.t1_iso, w)
    if rep.middle_exact:
        R.check("H_0 of the main lift is F", bool(rep.main_lift_iso), w)
    lift = homotopy_lift_T1(F)
    R.check("lift squares are homotopy cocartesian", lift_squares_cocartesian(lift) is None, w)
    o = P.index((0, 0))
    closed = all(
        lift.objects[x].homology(1)
        == F.dims[o] - la.rank(np.vstack([F.smap(o, P.index((e[0], 0))), F.smap(o, P.index((0, e[1])))]), p)
        for x, e in enumerate(P.elements)
    )
    R.check("H_1 of the lift has the closed form", closed, w)
    M = perturb_lift(lift, rng)
    if R.check("perturbed lift stays homotopy cocartesian", lift_squares_cocartesian(M) is None, w):
        R.guarded("H_0 of a cocartesian complex module is middle-exact", lambda: is_2_middle_exact(homology_module(M, 0)[0]), w)


def middle_exact_fixtures(rng, count: int = 10, primes=(2, 5)) -> list:
    out = [ex1(p) for p in primes] + [constant_module(FinitePoset.grid((3, 3)), 2, p) for p in primes]
    for t in range(count):
        out.append(random_block_sum(rng, (4, 4), primes[t % len(primes)])[0])
    return out


def check_main_lift(R: SuiteResult, F, w) -> None:
    rep = verify_h0_roundtrip(F)
    R.check("middle-exact fixture: H_0 of the main lift is F", rep.middle_exact and bool(rep.main_lift_iso), w)


def suite_homotopy(rng, trials: int, max_shape=(4, 4), primes=(2, 5)) -> SuiteResult:
    R = SuiteResult("homotopy")
    for t in range(trials):
        shape = random_shape(rng, max_shape[:2], factors=2)
        p = primes[t % len(primes)]
        F = random_sum(rng, FinitePoset.grid(shape), p)
        check_homotopy(R, F, rng, {"trial": t, "shape": list(shape), "prime": p})
    for k, F in enumerate(middle_exact_fixtures(rng, min(trials, 10), primes) if trials else []):
        check_main_lift(R, F, {"fixture": k})
    return R


SUITES = {
    "lattice": suite_lattice,
    "calculus": suite_calculus,
    "exactness": suite_exactness,
    "decompose": suite_decompose,
    "homotopy": suite_homotopy,
}


def run_suites(names, seed: int, trials: int, max_shape=None, fault: bool = False) -> list[SuiteResult]:
    """Run the named suites; ``fault`` adds a property that must fail (harness self-test)."""
    out = []
    for name in names:
        rng = np.random.default_rng([seed, list(SUITES).index(name)])
        kw = {"max_shape": tuple(max_shape)} if max_shape is not None else {}
        t0 = time.perf_counter()
        res = SUITES[name](rng, trials, **kw)
        res.seconds = time.perf_counter() - t0
        out.append(res)
    if fault:
        bad = SuiteResult("injected-fault")
        bad.guarded("hook module claimed codegree 1", lambda: is_codegree(hook(), 1), {"fixture": "hook"})
        out.append(bad)
    return out
