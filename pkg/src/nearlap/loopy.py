"""Nearest loopy Laplacian: per-row dispatch between clipping and the
loop-less solvers.

For a row whose node carries a self-loop, clip the diagonal up at zero and
the neighbors down at zero.  If the clipped row sum is nonnegative the clip
is already optimal; otherwise the optimal self-loop weight is zero and the
row reduces to the loop-less QP.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    GraphStructure,
    RowSolution,
    SparseRowMatrix,
    build_row_subproblem,
)
from .solvers import RowSolveError, SolverConfig, solve_row


@dataclass
class ClippedRow:
    """Sign-clipped row: diagonal raised to >= 0, neighbors lowered to <= 0."""

    diag: float
    neighbors: np.ndarray
    row_sum: float


def clip_row(a: SparseRowMatrix, g: GraphStructure, i: int) -> ClippedRow:
    if not g.has_self_loop[i]:
        raise ValueError(f"row {i} has no self-loop; clipping does not apply")
    diag = max(0.0, float(a.diag[i]))
    neighbors = np.minimum(a.offdiag[i], 0.0)
    return ClippedRow(diag=diag, neighbors=neighbors, row_sum=diag + float(neighbors.sum()))


def solve_loopy_row(
    a: SparseRowMatrix,
    g: GraphStructure,
    i: int,
    method: str = "sort_kkt",
    cfg: SolverConfig | None = None,
) -> tuple[float, np.ndarray, RowSolution | None]:
    """Optimal row i of the loopy projection: (diagonal, neighbor entries,
    row QP solution when the loop-less path ran, else None)."""
    a.check_pattern(g)
    if g.has_self_loop[i]:
        clipped = clip_row(a, g, i)
        if clipped.row_sum >= 0.0:
            return clipped.diag, clipped.neighbors.copy(), None
    # no self-loop, or the clip is infeasible: zero self-loop weight is optimal
    p = build_row_subproblem(a, g, i)
    try:
        sol = solve_row(p, method, cfg or SolverConfig())
    except Exception as exc:
        raise RowSolveError(i, exc) from exc
    return -float(sol.x.sum()), sol.x.copy(), sol


def nearest_loopy_laplacian(
    a: SparseRowMatrix,
    g: GraphStructure,
    method: str = "sort_kkt",
    cfg: SolverConfig | None = None,
) -> SparseRowMatrix:
    """Project A onto the loopy Laplacians over G (self-loop rows may have
    positive row sums)."""
    a.check_pattern(g)
    cfg = cfg or SolverConfig()
    result = SparseRowMatrix.zeros(g)
    for i in range(g.n):
        diag, neighbors, _ = solve_loopy_row(a, g, i, method, cfg)
        result.diag[i] = diag
        result.offdiag[i] = neighbors
    return result
