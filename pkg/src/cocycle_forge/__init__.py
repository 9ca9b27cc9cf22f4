"""Spectra, domination and perturbation paths of periodic matrix cocycles,
plus chain-recurrence classes of sampled low-dimensional maps."""

from .cocycle import DEFAULT_TOL, PeriodicCocycle, Tolerances, cocycle_distance
from .decomposition import InvariantDecomposition, SplittingAlongOrbit, invariant_decomposition
from .domination import (canonical_splitting, check_chain_domination, check_k_domination,
                         domination_ratios, domination_scan)
from .errors import CocycleError, Infeasible
from .paths import (CocyclePath, PathContract, blend_exponents, collapse_to_sink_or_source, concatenate,
                    realify, verify_contract, weaken_exponent)
from .properties import check_named_property, check_sectional_dissipativity
from .spectrum import SpectrumReport, lyapunov_spectrum
from .strong_connection import (CenterStableModel, check_pss_spectral_and_directional, classify_center,
                                normalized_iteration_limit)
from .two_loop import (SftCocycle, TwoLoopSpec, build_two_loop_cocycle, central_orientation_sign,
                       make_complex, sft_domination_scan)
from .chain import build_chain_graph, certify_filtrating, class_count_across_epsilon
from .maps import zoo_map

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL", "PeriodicCocycle", "Tolerances", "cocycle_distance",
    "InvariantDecomposition", "SplittingAlongOrbit", "invariant_decomposition",
    "canonical_splitting", "check_chain_domination", "check_k_domination", "domination_ratios",
    "domination_scan", "CocycleError", "Infeasible",
    "CocyclePath", "PathContract", "blend_exponents", "collapse_to_sink_or_source", "concatenate",
    "realify", "verify_contract", "weaken_exponent",
    "check_named_property", "check_sectional_dissipativity", "SpectrumReport", "lyapunov_spectrum",
    "CenterStableModel", "check_pss_spectral_and_directional", "classify_center",
    "normalized_iteration_limit", "SftCocycle", "TwoLoopSpec", "build_two_loop_cocycle",
    "central_orientation_sign", "make_complex", "sft_domination_scan",
    "build_chain_graph", "certify_filtrating", "class_count_across_epsilon", "zoo_map",
]
