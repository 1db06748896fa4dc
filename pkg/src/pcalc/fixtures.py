"""Canonical example modules used by the tests, the CLI and the docs.

``ex1``  a codegree-1 module on the 3x3 grid made of a vertical, a horizontal
         and a death block, written in a non-diagonal basis.
``ex2``  an indecomposable module on the cube {0,1}^3, codegree 1 but not
         degree 1.
``ex3``  the bidegree-1 module on the N-lattice with a 2-dimensional space at
         ``d``; it is not interval decomposable.
``ex4``  the N-lattice module with a single 1-dimensional space at ``d``.
``hook`` the interval module on {(0,1),(1,0),(1,1)} in the 2x2 grid.
"""

from __future__ import annotations

from .lattice import FinitePoset
from .persmod import PersistenceModule, interval_module, module_from_ids


def n_lattice() -> FinitePoset:
    return FinitePoset.explicit(
        ["a", "b", "c", "d", "t"], [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d"), ("d", "t")]
    )


def ex1(p: int = 2) -> PersistenceModule:
    P = FinitePoset.grid([3, 3])
    dims = {
        (0, 0): 1, (1, 0): 2, (2, 0): 1,
        (0, 1): 1, (1, 1): 2, (2, 1): 1,
        (0, 2): 1, (1, 2): 2, (2, 2): 2,
    }
    col0 = [[1], [0]]
    maps = {
        ((0, 0), (1, 0)): col0,
        ((0, 1), (1, 1)): col0,
        ((0, 2), (1, 2)): col0,
        ((1, 0), (2, 0)): [[0, 1]],
        ((1, 1), (2, 1)): [[0, 1]],
        ((1, 2), (2, 2)): [[1, 0], [0, 1]],
        ((0, 0), (0, 1)): [[1]],
        ((0, 1), (0, 2)): [[0]],
        ((1, 0), (1, 1)): [[1, 0], [0, 1]],
        ((1, 1), (1, 2)): [[0, 0], [0, 1]],
        ((2, 0), (2, 1)): [[1]],
        ((2, 1), (2, 2)): [[0], [1]],
    }
    return module_from_ids(P, dims, maps, p)


def ex2(p: int = 2) -> PersistenceModule:
    P = FinitePoset.grid([2, 2, 2])
    dims = {(0, 0, 0): 2, (1, 0, 0): 1, (0, 1, 0): 1, (0, 0, 1): 1}
    maps = {
        ((0, 0, 0), (1, 0, 0)): [[1, 1]],
        ((0, 0, 0), (0, 1, 0)): [[0, 1]],
        ((0, 0, 0), (0, 0, 1)): [[1, 0]],
    }
    return module_from_ids(P, dims, maps, p)


def ex3(p: int = 2) -> PersistenceModule:
    P = n_lattice()
    dims = {"b": 1, "c": 1, "d": 2, "t": 1}
    maps = {("b", "d"): [[1], [0]], ("c", "d"): [[0], [1]], ("d", "t"): [[1, 1]]}
    return module_from_ids(P, dims, maps, p)


def ex4(p: int = 2) -> PersistenceModule:
    return module_from_ids(n_lattice(), {"d": 1}, {}, p)


def hook(p: int = 2) -> PersistenceModule:
    return interval_module(FinitePoset.grid([2, 2]), [(0, 1), (1, 0), (1, 1)], p)


FIXTURES = {"ex1": ex1, "ex2": ex2, "ex3": ex3, "ex4": ex4, "hook": hook}
