"""Certified expander-backed CDO families and lemon-placement analysis."""

__version__ = "0.1.0"

from .adversary import (
    AttackResult,
    BoundReport,
    empirical_errors,
    search_worst,
    theoretical_bounds,
    valuediff_bound,
)
from .cdo_model import (
    AssetModel,
    DiscreteDist,
    Scenario,
    TrancheSpec,
    ValueProfile,
    mc_value,
    tranche_payoff,
    tv_vector,
    validate_model,
    value_profile,
)
from .estimators import ExpanderCDOFamily, TrancheValuer
from .expander import (
    BipartiteGraph,
    ExpansionCertificate,
    biregularize,
    build_cdo_graph,
    derive_guv_params,
    guv_neighbors,
    neighbor_counts,
    trim_pad,
    verify_expansion,
)
from .galois import field_make, field_mul, find_irreducible, poly_eval, poly_mod_pow

__all__ = [
    "AssetModel", "AttackResult", "BipartiteGraph", "BoundReport", "DiscreteDist",
    "ExpanderCDOFamily", "ExpansionCertificate", "Scenario", "TrancheSpec", "TrancheValuer",
    "ValueProfile", "biregularize", "build_cdo_graph", "derive_guv_params", "empirical_errors",
    "field_make", "field_mul", "find_irreducible", "guv_neighbors", "mc_value",
    "neighbor_counts", "poly_eval", "poly_mod_pow", "search_worst", "theoretical_bounds",
    "tranche_payoff", "trim_pad", "tv_vector", "validate_model", "valuediff_bound",
    "value_profile", "verify_expansion",
]
