"""Domain types and row-subproblem algebra for nearest-Laplacian projection.

A directed graph structure fixes a sparsity pattern.  Projecting a matrix
onto the set of Laplacians with that pattern decomposes row-wise into small
bound-constrained quadratic programs whose Hessian is 2*I + 2*J (identity
plus all-ones).  That matrix is never materialized: everything goes through
`apply_q` / `apply_q_inverse`, which run in O(d).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-9


class PatternMismatchError(ValueError):
    """Matrix entries do not match the graph's sparsity pattern."""


class DimensionTooLarge(ValueError):
    """Requested dimension exceeds a hard cap (enumeration or overflow guard)."""


@dataclass
class GraphStructure:
    """A fixed directed graph: node count, out-neighbor lists, self-loop flags.

    Self-loops are carried only in `has_self_loop`; neighbor lists contain
    off-diagonal targets exclusively.
    """

    n: int
    neighbors: list[list[int]]
    has_self_loop: list[bool] = field(default=None)

    def __post_init__(self):
        if self.has_self_loop is None:
            self.has_self_loop = [False] * self.n
        if self.n <= 0:
            raise ValueError("node count must be positive")
        if len(self.neighbors) != self.n or len(self.has_self_loop) != self.n:
            raise ValueError("per-node lists must have length n")
        for i, nbrs in enumerate(self.neighbors):
            seen = set(nbrs)
            if len(seen) != len(nbrs):
                raise ValueError(f"duplicate neighbors in row {i}")
            if i in seen:
                raise ValueError(f"self-loop in neighbor list of node {i}")
            for j in nbrs:
                if not 0 <= j < self.n:
                    raise ValueError(f"neighbor index {j} out of range in row {i}")

    @property
    def degrees(self) -> list[int]:
        return [len(nbrs) for nbrs in self.neighbors]

    @property
    def num_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self.neighbors)

    def loopless(self) -> bool:
        return not any(self.has_self_loop)


@dataclass
class SparseRowMatrix:
    """Row-major sparse matrix over a graph pattern plus the diagonal.

    `offdiag[i][k]` is the entry at column `neighbors[i][k]`; everything
    outside the pattern is an implicit zero.
    """

    n: int
    diag: np.ndarray
    offdiag: list[np.ndarray]

    @classmethod
    def zeros(cls, g: GraphStructure) -> "SparseRowMatrix":
        return cls(
            n=g.n,
            diag=np.zeros(g.n),
            offdiag=[np.zeros(len(nbrs)) for nbrs in g.neighbors],
        )

    def check_pattern(self, g: GraphStructure):
        if self.n != g.n or len(self.offdiag) != g.n:
            raise PatternMismatchError("dimension mismatch with graph")
        for i, nbrs in enumerate(g.neighbors):
            if len(self.offdiag[i]) != len(nbrs):
                raise PatternMismatchError(f"row {i} length mismatch with neighbor list")
        if not np.all(np.isfinite(self.diag)):
            raise ValueError("non-finite diagonal entry")
        for i, row in enumerate(self.offdiag):
            if not np.all(np.isfinite(row)):
                raise ValueError(f"non-finite entry in row {i}")

    def to_dense(self, g: GraphStructure) -> np.ndarray:
        dense = np.zeros((self.n, self.n))
        dense[np.arange(self.n), np.arange(self.n)] = self.diag
        for i, nbrs in enumerate(g.neighbors):
            for k, j in enumerate(nbrs):
                dense[i, j] = self.offdiag[i][k]
        return dense

    def copy(self) -> "SparseRowMatrix":
        return SparseRowMatrix(self.n, self.diag.copy(), [row.copy() for row in self.offdiag])

    def frobenius_distance_sq(self, other: "SparseRowMatrix") -> float:
        """Squared Frobenius distance, both matrices sharing one pattern."""
        total = float(np.sum((self.diag - other.diag) ** 2))
        for a, b in zip(self.offdiag, other.offdiag):
            total += float(np.sum((a - b) ** 2))
        return total


@dataclass
class LaplacianCertificate:
    max_sign_violation: float
    max_row_sum_violation: float
    loopy: bool

    def ok(self, tol: float = DEFAULT_TOL) -> bool:
        return self.max_sign_violation <= tol and self.max_row_sum_violation <= tol


@dataclass
class RowSubproblem:
    """One row's bound-constrained QP: minimize 0.5 x'Qx + b'x over x <= 0."""

    d: int
    b: np.ndarray

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        if self.d < 0 or len(self.b) != self.d:
            raise ValueError("b must have length d >= 0")
        if not np.all(np.isfinite(self.b)):
            raise ValueError("non-finite entry in b")


@dataclass
class RowSolution:
    """Optimal row entries with KKT multipliers and active/free bookkeeping."""

    x: np.ndarray
    lam: np.ndarray
    free_set: list[int]
    active_set: list[int]
    objective: float
    iterations: int
    converged: bool = True
    # per-iteration counts of indices moved to the active set (active set method)
    shrink_history: list[int] = field(default_factory=list)
    # pre-clamp iterate from the interior point method
    x_raw: np.ndarray = None
    trace: "object" = None


def apply_q(v: np.ndarray) -> np.ndarray:
    """Multiply by Q_d = 2I + 2J in O(d) without forming the matrix."""
    v = np.asarray(v, dtype=float)
    return 2.0 * v + 2.0 * v.sum()


def apply_q_inverse(v: np.ndarray) -> np.ndarray:
    """Multiply by Q_d^{-1} = (I - J/(1+d))/2 in O(d)."""
    v = np.asarray(v, dtype=float)
    d = len(v)
    return 0.5 * v - v.sum() / (2.0 * (1.0 + d))


def build_row_subproblem(a: SparseRowMatrix, g: GraphStructure, i: int) -> RowSubproblem:
    """Linear term of row i's QP: b_k = 2*A_ii - 2*A_{i,neighbor_k}."""
    if not 0 <= i < g.n:
        raise IndexError(f"row index {i} out of range")
    b = 2.0 * a.diag[i] - 2.0 * a.offdiag[i]
    return RowSubproblem(d=len(b), b=b)


def objective(x: np.ndarray, p: RowSubproblem) -> float:
    x = np.asarray(x, dtype=float)
    if len(x) != p.d:
        raise ValueError("length mismatch with subproblem")
    return float(0.5 * x @ apply_q(x) + p.b @ x)


def kkt_residual(x: np.ndarray, lam: np.ndarray, p: RowSubproblem) -> float:
    """Max violation over stationarity, primal/dual feasibility, complementarity.

    Zero exactly when (x, lam) is a KKT point of the row QP.
    """
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if len(x) != p.d or len(lam) != p.d:
        raise ValueError("length mismatch with subproblem")
    if p.d == 0:
        return 0.0
    stationarity = float(np.max(np.abs(apply_q(x) + p.b + lam)))
    primal = float(np.max(np.maximum(x, 0.0)))
    dual = float(np.max(np.maximum(-lam, 0.0)))
    comp = float(abs(x @ lam))
    return max(stationarity, primal, dual, comp)


def validate_laplacian(
    l: SparseRowMatrix, g: GraphStructure, loopy: bool = False
) -> LaplacianCertificate:
    """Check sign constraints and row-sum constraints of the Laplacian cone.

    Loop-less rows (and, in loopy mode, rows without a self-loop flag) must
    have exactly zero row sums; self-loop rows only need nonnegative sums.
    """
    l.check_pattern(g)
    sign_violation = 0.0
    row_sum_violation = 0.0
    for i in range(g.n):
        sign_violation = max(sign_violation, -float(l.diag[i]))
        if len(l.offdiag[i]):
            sign_violation = max(sign_violation, float(np.max(l.offdiag[i])))
        row_sum = float(l.diag[i] + l.offdiag[i].sum())
        if loopy and g.has_self_loop[i]:
            row_sum_violation = max(row_sum_violation, -row_sum)
        else:
            row_sum_violation = max(row_sum_violation, abs(row_sum))
    return LaplacianCertificate(
        max_sign_violation=max(sign_violation, 0.0),
        max_row_sum_violation=max(row_sum_violation, 0.0),
        loopy=loopy,
    )
