"""Random utility rationalizability for stochastic choice data with unobserved alternatives."""

from .bm import bm_flow, bm_polynomial, bm_table, complete_bm, flow_to_complete
from .bounds import IdentifiedInterval, bound_certificate, naive_bounds, ru_bounds, ru_bounds_decomposed
from .flows import LatticeFlow, RankingDistribution
from .lp import LinearProgram, solve, verify
from .model import (
    CompleteDataset,
    IncompleteDataset,
    Instance,
    build_instance,
    complete_dataset,
    infer_singleton_hidden,
    validate_dataset,
)
from .mr import MRSequence, check_mr, is_redundant, mr_polynomial
from .network import build_network, decompose_flow, delta_rho, feasible_flow
from .oracle import (
    GeneratorConfig,
    brute_force_rationalizable,
    fit_logit,
    identified_set_oracle,
    sample_instance,
    vertex_dataset,
)
from .theorem import (
    RationalizabilityReport,
    TestCollection,
    check_complete_collections,
    check_theorem,
    condition_i_applies,
    enumerate_boundary_test_collections,
    enumerate_essential_test_collections,
    enumerate_upper_sets,
)
from .witness import witness_condition_i, witness_condition_ii

__version__ = "0.1.0"

__all__ = [
    "CompleteDataset",
    "GeneratorConfig",
    "IdentifiedInterval",
    "IncompleteDataset",
    "Instance",
    "LatticeFlow",
    "LinearProgram",
    "MRSequence",
    "RankingDistribution",
    "RationalizabilityReport",
    "TestCollection",
    "bm_flow",
    "bm_polynomial",
    "bm_table",
    "bound_certificate",
    "brute_force_rationalizable",
    "build_instance",
    "build_network",
    "check_complete_collections",
    "check_mr",
    "check_theorem",
    "complete_bm",
    "complete_dataset",
    "decompose_flow",
    "delta_rho",
    "condition_i_applies",
    "enumerate_boundary_test_collections",
    "enumerate_essential_test_collections",
    "enumerate_upper_sets",
    "feasible_flow",
    "fit_logit",
    "flow_to_complete",
    "identified_set_oracle",
    "infer_singleton_hidden",
    "is_redundant",
    "mr_polynomial",
    "naive_bounds",
    "ru_bounds",
    "ru_bounds_decomposed",
    "sample_instance",
    "solve",
    "validate_dataset",
    "verify",
    "vertex_dataset",
    "witness_condition_i",
    "witness_condition_ii",
]
