"""Exact algebra, minimization, reducibility and factorization of abstract storage devices."""

from .devices import (
    Device,
    classify,
    direct_product,
    k_reads,
    make_linear,
    make_perfect,
    make_projective,
    product_of,
    validate,
)
from .invariants import (
    INFINITE,
    capacity,
    invariant_report,
    perfectness_index,
    poly_signature,
    prescreen,
    sigma_capacity_bound,
    state_complexity,
)
from .factorization import (
    binary_product_reduce,
    extract_index_partition,
    factor_binary,
    factor_perfect,
)
from .graphs import (
    Graph,
    brute_clique,
    clique_via_reduction,
    complete_graph,
    gi_via_equivalence,
    graph_device,
    make_graph,
)
from .minimization import MinimizationResult, is_partition_minimal, is_state_minimal, minimize
from .partitions import (
    GroundSet,
    Join,
    LatticePoly,
    Meet,
    Partition,
    Var,
    canonicalize,
    eval_poly,
)
from .reduction import (
    IPOutcome,
    decide_equivalence,
    find_reduction,
    ip_nonequiv_sim,
    random_equivalent,
)
from .witnesses import (
    Reduction,
    compose,
    identity_reduction,
    reduction_from_dict,
    reduction_to_dict,
    verify_reduction,
)

__version__ = "0.1.0"
