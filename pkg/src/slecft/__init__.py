"""Exact Virasoro/Ward checks on SLE boundary correlation functions and Monte Carlo SLE."""
from .detector import DetectorConfig, hull_hits
from .exact import LaurentSeries, RatFun, laurent_expand, parse_ratfun
from .loewner import DEFAULT_SEED, SleParams, half_disk, sample_driving, trace, vertical_slit
from .restriction import (
    RestrictionParams,
    analytic_avoid_probability,
    b1_limit_check,
    boundary_exponent_fit,
    martingale_check,
    mc_avoid_probability,
    restriction_record,
)
from .virasoro import apply_L, commutator_defect, degeneracy_apply
from .ward import (
    FamilyVector,
    build_family,
    derive_constants,
    evolution_defect,
    l_mode,
    lowering_compose,
    mode_expand_check,
    stability_check,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SEED",
    "DetectorConfig",
    "FamilyVector",
    "LaurentSeries",
    "RatFun",
    "RestrictionParams",
    "SleParams",
    "analytic_avoid_probability",
    "apply_L",
    "b1_limit_check",
    "boundary_exponent_fit",
    "build_family",
    "commutator_defect",
    "degeneracy_apply",
    "derive_constants",
    "evolution_defect",
    "half_disk",
    "hull_hits",
    "l_mode",
    "laurent_expand",
    "lowering_compose",
    "martingale_check",
    "mc_avoid_probability",
    "mode_expand_check",
    "parse_ratfun",
    "restriction_record",
    "sample_driving",
    "stability_check",
    "trace",
    "vertical_slit",
]
