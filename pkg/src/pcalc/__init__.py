"""Calculus approximations, exactness tests and decompositions of persistence modules over finite lattices."""

from __future__ import annotations

from .calculus import (
    codegree_approx,
    colayer,
    degree_approx,
    is_bidegree,
    is_codegree,
    is_degree,
    is_injective,
    is_projective,
    latching,
    layer,
    matching,
)
from .chainhtpy import (
    ChainMap,
    ComplexValuedModule,
    cone,
    homology_module,
    homotopy_lift_T1,
    homotopy_pushout,
    is_homotopy_cocartesian,
    verify_h0_roundtrip,
)
from .decompose import (
    Block,
    an_interval_decompose,
    bidegree1_interval_decompose,
    bkc_decompose,
    block_decompose,
    cofree_structure,
    free_structure,
    middle_exact_blocks,
    middle_exact_split,
    natural_splitting,
)
from .errors import (
    InputError,
    PcalcError,
    PosetUnsupported,
    PreconditionFailed,
)
from .exactness import ChainComplex, is_2_middle_exact, is_k_middle_exact, koszul, middle_exact_square
from .io import load_module, module_to_json, parse_module
from .lattice import FinitePoset, analyze_lattice, cube_from_cover, enumerate_cubes, stratum
from .persmod import NaturalTransformation, PersistenceModule, direct_sum, interval_module, random_module

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
