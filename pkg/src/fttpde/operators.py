"""Right-hand-side evaluators: separable linear operators and composite forms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .ftt import FttTensor, _block_sum, from_full, to_full, truncate
from .grids import Domain, ShapeError


class DensifyBudgetError(RuntimeError):
    """Dense evaluation requested on a grid larger than the densify budget."""


@dataclass(frozen=True)
class SeparableOperator:
    """Sum of tensor products of one-dimensional operators.

    terms[i][j] is the n_j x n_j matrix acting on axis j in the i-th term;
    None stands for the identity.  Variable coefficients enter as diagonal
    matrices on the grid.
    """

    terms: tuple[tuple[np.ndarray | None, ...], ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.terms) < 1:
            raise ValueError("separable operator needs at least one term")

    @property
    def rank(self) -> int:
        return len(self.terms)


def separable(terms: Sequence[Sequence[np.ndarray | None]], labels=None) -> SeparableOperator:
    tt = tuple(tuple(term) for term in terms)
    return SeparableOperator(terms=tt, labels=tuple(labels) if labels else ())


def _check_operator_shapes(op: SeparableOperator, domain: Domain) -> None:
    for i, term in enumerate(op.terms):
        if len(term) != domain.ndim:
            raise ShapeError(f"term {i} has {len(term)} factors, domain has {domain.ndim} axes")
        for j, (mat, g) in enumerate(zip(term, domain.axes)):
            if mat is not None and mat.shape != (g.n, g.n):
                raise ShapeError(f"term {i} factor {j} is {mat.shape}, expected {(g.n, g.n)}")


def apply_separable(op: SeparableOperator, u: FttTensor) -> FttTensor:
    """Apply the operator in tensor-train form; ranks grow by the factor R."""
    _check_operator_shapes(op, u.domain)
    pieces = []
    for term in op.terms:
        cores = []
        for mat, core in zip(term, u.cores):
            if mat is None:
                cores.append(core.copy())
            else:
                cores.append(np.tensordot(mat, core, axes=(1, 1)).transpose(1, 0, 2))
        pieces.append(FttTensor(cores, u.domain))
    return _block_sum(pieces)


def apply_separable_dense(op: SeparableOperator, values: np.ndarray) -> np.ndarray:
    """Dense application, contracting each non-identity factor axis by axis.

    Never forms the full Kronecker matrix; used by dense reference solvers
    and as the oracle against the tensor-train path.
    """
    out = np.zeros_like(values)
    d = values.ndim
    for term in op.terms:
        piece = values
        for j, mat in enumerate(term):
            if mat is None:
                continue
            piece = np.moveaxis(np.tensordot(mat, piece, axes=(1, j)), 0, j)
        out = out + piece
    return out


@dataclass(frozen=True)
class RhsEvaluator:
    """Evaluator for du/dt = G(u) returning tensor trains.

    kind='separable' applies `op` and truncates at g_tol; kind='composite'
    calls `composite_fn(u)` (built from TT arithmetic) and truncates;
    kind='dense' densifies, applies `dense_fn`, and recompresses -- only
    allowed while the total grid size stays within densify_budget.
    """

    domain: Domain
    kind: str
    op: SeparableOperator | None = None
    dense_fn: Callable[[np.ndarray], np.ndarray] | None = None
    composite_fn: Callable[[FttTensor], FttTensor] | None = None
    g_tol: float = 1e-10
    densify_budget: int = 1 << 22
    params: dict = field(default_factory=dict)


def eval_rhs(rhs: RhsEvaluator, u: FttTensor, t: float = 0.0) -> FttTensor:
    """Evaluate G(u) as a tensor train truncated to g_tol relative error."""
    if not rhs.domain.matches(u.domain):
        raise ShapeError("tensor does not live on the evaluator's domain")
    if rhs.kind == "separable":
        raw = apply_separable(rhs.op, u)
    elif rhs.kind == "composite":
        raw = rhs.composite_fn(u)
    elif rhs.kind == "dense":
        total = int(np.prod(u.domain.shape))
        if total > rhs.densify_budget:
            raise DensifyBudgetError(
                f"grid has {total} points, densify budget is {rhs.densify_budget}"
            )
        dense = rhs.dense_fn(to_full(u))
        return from_full(dense, u.domain, rhs.g_tol)
    else:
        raise ValueError(f"unknown evaluator kind {rhs.kind!r}")
    out, _ = truncate(raw, rhs.g_tol)
    return out
