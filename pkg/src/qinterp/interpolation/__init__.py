"""K-method interpolation on finite-dimensional quaternionic couples."""

from qinterp.interpolation.kfunctional import (
    KEstimate,
    KGrid,
    intermediate_constants,
    k_functional,
    k_functional_grid,
    k_swap_identity_check,
)
from qinterp.interpolation.lpstar import InterpNorm, interp_norm, interp_norm_from_k, lp_star_norm
from qinterp.interpolation.norms import (
    Couple,
    LogGrid,
    Norm,
    graph_couple,
    graph_norm,
    l2_couple,
    l2_norm,
    weighted_norm,
)
from qinterp.interpolation.operator import operator_interpolation_check, restriction_norm
from qinterp.interpolation.psi import (
    StarNorm,
    interp_norm_star,
    proof_decomposition,
    psi,
    psi_constant,
    psi_grid,
    trinomial_split,
    trinomial_weight_total,
)

__all__ = [
    "Couple",
    "InterpNorm",
    "KEstimate",
    "KGrid",
    "LogGrid",
    "Norm",
    "StarNorm",
    "graph_couple",
    "graph_norm",
    "intermediate_constants",
    "interp_norm",
    "interp_norm_from_k",
    "interp_norm_star",
    "k_functional",
    "k_functional_grid",
    "k_swap_identity_check",
    "l2_couple",
    "l2_norm",
    "lp_star_norm",
    "operator_interpolation_check",
    "proof_decomposition",
    "psi",
    "psi_constant",
    "psi_grid",
    "restriction_norm",
    "trinomial_split",
    "trinomial_weight_total",
    "weighted_norm",
]
