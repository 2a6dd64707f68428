"""Projected-gradient identification of Laplacian dynamics.

Given sampled states of x_{k+1} = (I - hL) x_k, fit L over a known graph
structure by minimizing the mean squared one-step prediction error, with the
nearest-Laplacian projection (loop-less or loopy) as the feasibility step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GraphStructure, SparseRowMatrix
from .loopy import nearest_loopy_laplacian
from .solvers import SolverConfig, nearest_laplacian


@dataclass
class TrajectoryData:
    """Paired state samples: column k of X steps to column k of X_next."""

    X: np.ndarray
    X_next: np.ndarray
    h: float

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.X_next = np.atleast_2d(np.asarray(self.X_next, dtype=float))
        if self.X.shape != self.X_next.shape:
            raise ValueError("X and X_next must have matching shapes")
        if self.X.shape[1] < 1:
            raise ValueError("need at least one sample pair")
        if self.h <= 0:
            raise ValueError("sampling interval must be positive")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def num_samples(self) -> int:
        return self.X.shape[1]


@dataclass
class SysidConfig:
    step_size: float | str = "auto"
    max_iter: int = 5000
    grad_tol: float = 1e-10
    loopy: bool = False
    method: str = "sort_kkt"

    def __post_init__(self):
        if self.step_size != "auto" and self.step_size <= 0:
            raise ValueError("step size must be positive or 'auto'")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")


def _residual(l_dense: np.ndarray, data: TrajectoryData) -> np.ndarray:
    return data.X_next - data.X + data.h * (l_dense @ data.X)


def sysid_objective(l: SparseRowMatrix, data: TrajectoryData, g: GraphStructure) -> float:
    """Mean squared one-step prediction error (1/N)||X' - (I - hL)X||_F^2."""
    if l.n != data.n:
        raise ValueError("dimension mismatch between L and trajectory")
    r = _residual(l.to_dense(g), data)
    return float(np.sum(r * r)) / data.num_samples


def sysid_gradient(l: SparseRowMatrix, data: TrajectoryData, g: GraphStructure) -> SparseRowMatrix:
    """Analytic gradient (2h/N) R X^T, restricted to the pattern + diagonal."""
    if l.n != data.n:
        raise ValueError("dimension mismatch between L and trajectory")
    full = (2.0 * data.h / data.num_samples) * (_residual(l.to_dense(g), data) @ data.X.T)
    grad = SparseRowMatrix.zeros(g)
    grad.diag = np.diag(full).copy()
    for i, nbrs in enumerate(g.neighbors):
        grad.offdiag[i] = full[i, nbrs].copy()
    return grad


def lipschitz_step(data: TrajectoryData) -> float:
    """1 / Lipschitz constant of the gradient: N / (2 h^2 lambda_max(X X^T))."""
    gram = data.X @ data.X.T
    lam_max = float(np.linalg.eigvalsh(gram)[-1])
    if lam_max <= 0.0:
        return 1.0  # zero data: gradient vanishes, step is irrelevant
    return data.num_samples / (2.0 * data.h**2 * lam_max)


def identify_laplacian(
    data: TrajectoryData,
    g: GraphStructure,
    cfg: SysidConfig | None = None,
    solver_cfg: SolverConfig | None = None,
    l0: SparseRowMatrix | None = None,
    history: list[float] | None = None,
) -> SparseRowMatrix:
    """Projected gradient descent L <- proj(L - eta * grad).

    Stops when the projected step ||L - proj(L - eta*grad)||_F falls below
    grad_tol, or at the iteration cap.  With the auto step (1/Lipschitz) the
    objective is nonincreasing.  Pass `history` to collect per-iteration
    objective values.
    """
    cfg = cfg or SysidConfig()
    solver_cfg = solver_cfg or SolverConfig()
    eta = lipschitz_step(data) if cfg.step_size == "auto" else float(cfg.step_size)

    def project(m: SparseRowMatrix) -> SparseRowMatrix:
        if cfg.loopy:
            return nearest_loopy_laplacian(m, g, cfg.method, solver_cfg)
        return nearest_laplacian(m, g, cfg.method, solver_cfg)[0]

    current = project(l0 if l0 is not None else SparseRowMatrix.zeros(g))
    if history is not None:
        history.append(sysid_objective(current, data, g))
    for _ in range(cfg.max_iter):
        grad = sysid_gradient(current, data, g)
        stepped = SparseRowMatrix(
            n=g.n,
            diag=current.diag - eta * grad.diag,
            offdiag=[c - eta * gr for c, gr in zip(current.offdiag, grad.offdiag)],
        )
        candidate = project(stepped)
        move = np.sqrt(candidate.frobenius_distance_sq(current))
        current = candidate
        if history is not None:
            history.append(sysid_objective(current, data, g))
        if move <= cfg.grad_tol:
            break
    return current
