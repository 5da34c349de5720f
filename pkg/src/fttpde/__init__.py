"""Rank-adaptive functional tensor-train integration of periodic PDEs."""

from .grids import Domain, Grid1D, make_domain, make_periodic_grid, quad_inner, torus_domain
from .ftt import (
    FttTensor,
    add,
    from_full,
    hadamard,
    inner,
    integral,
    norm,
    orthogonalize,
    qr_core,
    scale,
    to_full,
    truncate,
    zero_pad,
)
from .operators import (
    RhsEvaluator,
    SeparableOperator,
    apply_separable,
    apply_separable_dense,
    eval_rhs,
    separable,
)
from .integrators import (
    AdaptiveState,
    IntegratorConfig,
    adaptive_step,
    bdf_tangent_estimate,
    lie_trotter_step,
    normal_component,
    rk4_dense_step,
    step_truncation_step,
)
from .problems import (
    ProblemSpec,
    advection2d,
    advection2d_reference,
    build_problem,
    fp4d,
    kse2d,
    l2_error,
    marginal_2d,
)
from .runner import RunConfig, parse_config, run_experiment
from . import snapshots

__all__ = [
    "AdaptiveState",
    "Domain",
    "FttTensor",
    "Grid1D",
    "IntegratorConfig",
    "ProblemSpec",
    "RhsEvaluator",
    "RunConfig",
    "SeparableOperator",
    "adaptive_step",
    "add",
    "advection2d",
    "advection2d_reference",
    "apply_separable",
    "apply_separable_dense",
    "bdf_tangent_estimate",
    "build_problem",
    "eval_rhs",
    "fp4d",
    "from_full",
    "hadamard",
    "inner",
    "integral",
    "kse2d",
    "l2_error",
    "lie_trotter_step",
    "make_domain",
    "make_periodic_grid",
    "marginal_2d",
    "norm",
    "normal_component",
    "orthogonalize",
    "parse_config",
    "qr_core",
    "quad_inner",
    "rk4_dense_step",
    "run_experiment",
    "scale",
    "separable",
    "snapshots",
    "step_truncation_step",
    "to_full",
    "torus_domain",
    "truncate",
    "zero_pad",
]
