"""Services package for qbailey."""

from qbailey.services.bailey import (
    BaileyPair,
    ConjugatePair,
    RhoParam,
    chained_pair,
    closed_form_pair,
    seed_pair,
    shipped_conjugate_transform,
    transform_AB,
    transform_chain_q,
    transform_lattice,
    transform_lattice2,
    verify_bailey,
    verify_conjugate,
)
from qbailey.services.hierarchy import HierarchyParams, hl_conjugate, hl_Delta, hl_Gamma
from qbailey.services.identities import IdentityCell, hl_lemma_lhs, hl_lemma_rhs, thm44_lhs, thm44_rhs
from qbailey.services.lattice import Partition, SigmaContext, inv_cartan
from qbailey.services.qtools import gauss_binom, pochhammer, q_multinomial, residue_product
from qbailey.services.series import LaurentSeries, ValuationBound, Window
from qbailey.services.string_functions import StringFunctionIndex, string_function
from qbailey.services.sweep import evaluate_cell, expand_cells, run_sweep

__all__ = [
    "BaileyPair",
    "ConjugatePair",
    "RhoParam",
    "chained_pair",
    "closed_form_pair",
    "seed_pair",
    "shipped_conjugate_transform",
    "transform_AB",
    "transform_chain_q",
    "transform_lattice",
    "transform_lattice2",
    "verify_bailey",
    "verify_conjugate",
    "HierarchyParams",
    "hl_conjugate",
    "hl_Delta",
    "hl_Gamma",
    "IdentityCell",
    "hl_lemma_lhs",
    "hl_lemma_rhs",
    "thm44_lhs",
    "thm44_rhs",
    "Partition",
    "SigmaContext",
    "inv_cartan",
    "gauss_binom",
    "pochhammer",
    "q_multinomial",
    "residue_product",
    "LaurentSeries",
    "ValuationBound",
    "Window",
    "StringFunctionIndex",
    "string_function",
    "evaluate_cell",
    "expand_cells",
    "run_sweep",
]
