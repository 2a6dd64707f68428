"""Row-subproblem solvers and full-matrix projection drivers.

Four interchangeable solvers for the row QP (minimize 0.5 x'Qx + b'x over
x <= 0, Q = 2I + 2J):

* `solve_active_set`   -- exact, at most d free-set shrinks, O(d^2) worst case
* `solve_sort_kkt`     -- exact, one descending sort plus a linear scan
* `solve_interior_point` -- primal-dual Newton steps, O(d) each via a
  rank-one (Sherman-Morrison) solve
* `solve_vfista`       -- accelerated projected gradient with momentum

plus `enumerate_active_sets`, a 2^d brute-force oracle used by the tests.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DimensionTooLarge,
    GraphStructure,
    RowSolution,
    RowSubproblem,
    SparseRowMatrix,
    apply_q,
    apply_q_inverse,
    build_row_subproblem,
    objective,
)

METHODS = ("active_set", "sort_kkt", "interior_point", "vfista")

_ENUM_CAP = 20


@dataclass
class SolverConfig:
    """Tunables for the iterative solvers; the exact solvers take none."""

    ip_epsilon: float = 1e-6
    ip_alpha: float = 1.0
    ip_rho: float = 0.9
    ip_sigma: float = 0.5
    ip_max_iter: int | None = None  # defaults to 10*d + 200
    vfista_epsilon: float = 1e-6
    vfista_max_iter: int | None = None
    vfista_beta: float | None = None  # defaults to 2 + 2d (largest Q eigenvalue)
    vfista_sigma: float = 2.0

    def __post_init__(self):
        if self.ip_epsilon <= 0 or self.vfista_epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.ip_rho < 1:
            raise ValueError("backtrack rate must be in (0, 1)")
        if not 0 < self.ip_sigma < 1:
            raise ValueError("centering parameter must be in (0, 1)")
        if self.ip_alpha <= 0:
            raise ValueError("initial step must be positive")
        if self.vfista_sigma <= 0:
            raise ValueError("strong convexity constant must be positive")
        if self.vfista_beta is not None and self.vfista_beta < self.vfista_sigma:
            raise ValueError("smoothness constant must dominate strong convexity")

    def ip_cap(self, d: int) -> int:
        return self.ip_max_iter if self.ip_max_iter is not None else 10 * d + 200

    def vfista_cap(self, d: int) -> int:
        if self.vfista_max_iter is not None:
            return self.vfista_max_iter
        # 10x the geometric-rate iteration estimate, padded for the initial gap
        rate = math.sqrt(1.0 + d) / (math.sqrt(1.0 + d) - 1.0) if d >= 1 else 2.0
        return 10 * math.ceil(math.log(1.0 / self.vfista_epsilon) / math.log(rate)) + 200


@dataclass
class IterateTrace:
    """Optional per-iteration convergence record."""

    objectives: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)


def _empty_solution() -> RowSolution:
    return RowSolution(
        x=np.zeros(0),
        lam=np.zeros(0),
        free_set=[],
        active_set=[],
        objective=0.0,
        iterations=0,
    )


def _finish_exact(b: np.ndarray, free: list[int], coef: float) -> tuple[np.ndarray, np.ndarray]:
    """Assemble (x, lambda) given the final free set and S_F/(2(1+|F|))."""
    d = len(b)
    x = np.zeros(d)
    lam = np.zeros(d)
    free_mask = np.zeros(d, dtype=bool)
    for i in free:
        x[i] = coef - 0.5 * b[i]
        free_mask[i] = True
    qx = apply_q(x)
    active = ~free_mask
    lam[active] = -(qx[active] + b[active])
    return x, lam


def solve_active_set(p: RowSubproblem) -> RowSolution:
    """Exact solver: repeatedly drop positive entries of the reduced
    unconstrained minimizer into the active set until none remain.

    The active set only grows and the loop shrinks the free set at most d
    times.  Inner passes are plain Python over the free list so the cost per
    pass is genuinely linear in the number of free variables.
    """
    if p.d == 0:
        return _empty_solution()
    b = p.b.tolist()
    free = list(range(p.d))
    shrink_history: list[int] = []
    coef = 0.0
    while free:
        s = 0.0
        for i in free:
            s += b[i]
        coef = s / (2.0 * (1.0 + len(free)))
        kept = []
        removed = 0
        for i in free:
            if coef - 0.5 * b[i] > 0.0:
                removed += 1
            else:
                kept.append(i)
        if removed == 0:
            break
        shrink_history.append(removed)
        free = kept
    x, lam = _finish_exact(p.b, free, coef)
    active = sorted(set(range(p.d)) - set(free))
    return RowSolution(
        x=x,
        lam=lam,
        free_set=free,
        active_set=active,
        objective=objective(x, p),
        iterations=len(shrink_history),
        shrink_history=shrink_history,
    )


def solve_sort_kkt(p: RowSubproblem) -> RowSolution:
    """Exact solver: sort b descending and find the unique cut index k0 with
    b_{k0} >= S_{k0}/(k0+1) and b_{k0+1} < S_{k0+1}/(k0+2); the first k0
    sorted indices are free, the rest are clamped at zero.
    """
    if p.d == 0:
        return _empty_solution()
    b = p.b
    bl = b.tolist()
    # sorted() is stable, also with reverse=True, so ties keep input order
    order = sorted(range(p.d), key=bl.__getitem__, reverse=True)
    s = 0.0
    k0 = 0
    for j in order:
        bj = bl[j]
        if bj < (s + bj) / (k0 + 2):
            break
        s += bj
        k0 += 1
    coef = s / (2.0 * (1.0 + k0))
    free = sorted(order[:k0])
    x, lam = _finish_exact(b, free, coef)
    active = sorted(order[k0:])
    return RowSolution(
        x=x,
        lam=lam,
        free_set=free,
        active_set=active,
        objective=objective(x, p),
        iterations=1,
    )


def solve_interior_point(
    p: RowSubproblem, cfg: SolverConfig | None = None, record_trace: bool = False
) -> RowSolution:
    """Primal-dual interior point method on the sign-flipped problem
    (minimize 0.5 z'Qz - b'z over z >= 0).

    Each Newton system (Q + D)dz = t is solved in O(d) by Sherman-Morrison
    on the diagonal part 2I + D.  Stops when the average complementarity gap
    z'lam/d drops below epsilon, or flags non-convergence at the cap.
    """
    if p.d < 1:
        return _empty_solution()
    cfg = cfg or SolverConfig()
    b = p.b
    d = p.d
    eps = cfg.ip_epsilon
    z = np.abs(b) + 1.0
    lam = apply_q(z) - b
    trace = IterateTrace() if record_trace else None
    cap = cfg.ip_cap(d)
    # average-gap test z'lam/d < eps alone lets the total gap (the KKT
    # complementarity residual) approach d*eps, so cap the total as well
    threshold = eps * min(d, 8)
    k = 0
    while z @ lam >= threshold and k < cap:
        mu = z @ lam / d
        diag_inv = 1.0 / (2.0 + lam / z)
        t = -lam + cfg.ip_sigma * mu / z
        mt = diag_inv * t
        dz = mt - (2.0 * mt.sum() / (1.0 + 2.0 * diag_inv.sum())) * diag_inv
        assert np.all(diag_inv > 0.0)
        dlam = apply_q(dz)
        alpha = cfg.ip_alpha
        zn = z + alpha * dz
        ln = lam + alpha * dlam
        while not (np.all(zn > 0.0) and np.all(ln > 0.0)):
            alpha *= cfg.ip_rho
            zn = z + alpha * dz
            ln = lam + alpha * dlam
        z, lam = zn, ln
        k += 1
        if trace is not None:
            trace.objectives.append(objective(-z, p))
            trace.residuals.append(float(z @ lam / d))
    converged = z @ lam < threshold
    x_raw = -z
    # snap near-boundary entries so the assembled Laplacian validates cleanly
    z_clamped = z.copy()
    z_clamped[z_clamped < math.sqrt(eps)] = 0.0
    x = -z_clamped
    active = [i for i in range(d) if x[i] == 0.0]
    free = [i for i in range(d) if x[i] != 0.0]
    return RowSolution(
        x=x,
        lam=lam.copy(),
        free_set=free,
        active_set=active,
        objective=objective(x, p),
        iterations=k,
        converged=converged,
        x_raw=x_raw,
        trace=trace,
    )


def solve_vfista(
    p: RowSubproblem,
    cfg: SolverConfig | None = None,
    f_ref: float | None = None,
    record_trace: bool = False,
) -> RowSolution:
    """Accelerated projected gradient (momentum factor fixed by the condition
    number (2+2d)/2).

    With `f_ref` given, stops once objective(x) - f_ref <= epsilon.  Standalone
    it uses the projected-gradient residual at the same threshold, bounded by
    the iteration budget either way.
    """
    if p.d < 1:
        return _empty_solution()
    cfg = cfg or SolverConfig()
    b = p.b
    d = p.d
    eps = cfg.vfista_epsilon
    beta = cfg.vfista_beta if cfg.vfista_beta is not None else 2.0 + 2.0 * d
    kappa = beta / cfg.vfista_sigma
    momentum = (math.sqrt(kappa) - 1.0) / (math.sqrt(kappa) + 1.0)
    x = np.zeros(d)
    y = np.zeros(d)
    trace = IterateTrace() if record_trace else None
    cap = cfg.vfista_cap(d)
    k = 0
    converged = False
    while k <= cap:
        if f_ref is not None:
            gap = objective(x, p) - f_ref
            if trace is not None:
                trace.objectives.append(gap + f_ref)
                trace.residuals.append(gap)
            if gap <= eps:
                converged = True
                break
        else:
            grad_x = apply_q(x) + b
            pg = x - np.minimum(x - grad_x / beta, 0.0)
            if trace is not None:
                trace.objectives.append(objective(x, p))
                trace.residuals.append(float(np.max(np.abs(pg))))
            if np.max(np.abs(pg)) <= eps:
                converged = True
                break
        if k == cap:
            break
        grad_y = apply_q(y) + b
        x_next = np.minimum(y - grad_y / beta, 0.0)
        y = x_next + momentum * (x_next - x)
        x = x_next
        k += 1
    lam = np.maximum(-(apply_q(x) + b), 0.0)
    active = [i for i in range(d) if x[i] == 0.0]
    free = [i for i in range(d) if x[i] != 0.0]
    return RowSolution(
        x=x,
        lam=lam,
        free_set=free,
        active_set=active,
        objective=objective(x, p),
        iterations=k,
        converged=converged,
        trace=trace,
    )


def enumerate_active_sets(p: RowSubproblem) -> RowSolution:
    """Brute-force oracle: try every subset as the active set and return the
    unique candidate satisfying all KKT conditions.  Exponential; d <= 20.
    """
    if p.d > _ENUM_CAP:
        raise DimensionTooLarge(f"enumeration limited to d <= {_ENUM_CAP}, got {p.d}")
    if p.d == 0:
        return _empty_solution()
    b = p.b
    d = p.d
    indices = list(range(d))
    # scan by active-set size so ties resolve to the smallest active set
    for size in range(d + 1):
        for active in itertools.combinations(indices, size):
            active = list(active)
            free = [i for i in indices if i not in active]
            x = np.zeros(d)
            if free:
                x[free] = -apply_q_inverse(b[free])
            if np.any(x > 0.0):
                continue
            lam = np.zeros(d)
            qxb = apply_q(x) + b
            lam[active] = -qxb[active]
            if np.any(lam < 0.0):
                continue
            return RowSolution(
                x=x,
                lam=lam,
                free_set=free,
                active_set=active,
                objective=objective(x, p),
                iterations=1,
            )
    raise AssertionError("no KKT-consistent active set found (unreachable)")


_SOLVERS = {
    "active_set": lambda p, cfg: solve_active_set(p),
    "sort_kkt": lambda p, cfg: solve_sort_kkt(p),
    "interior_point": lambda p, cfg: solve_interior_point(p, cfg),
    "ip": lambda p, cfg: solve_interior_point(p, cfg),
    "vfista": lambda p, cfg: solve_vfista(p, cfg),
}


def solve_row(p: RowSubproblem, method: str, cfg: SolverConfig | None = None) -> RowSolution:
    try:
        solver = _SOLVERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}") from None
    return solver(p, cfg or SolverConfig())


class RowSolveError(RuntimeError):
    def __init__(self, row: int, cause: Exception):
        super().__init__(f"solver failed on row {row}: {cause}")
        self.row = row
        self.cause = cause


def _solve_one_row(a, g, i, method, cfg) -> RowSolution:
    p = build_row_subproblem(a, g, i)
    try:
        return solve_row(p, method, cfg)
    except Exception as exc:  # annotate with the offending row
        raise RowSolveError(i, exc) from exc


def nearest_laplacian(
    a: SparseRowMatrix,
    g: GraphStructure,
    method: str = "sort_kkt",
    cfg: SolverConfig | None = None,
    parallel: bool = False,
) -> tuple[SparseRowMatrix, list[RowSolution]]:
    """Project A onto the loop-less Laplacians over G, row by row.

    Off-diagonals of row i are the solved x; the diagonal is -sum(x) so the
    row sum is exactly zero.  Rows are independent pure computations, so the
    optional thread pool cannot change the result.
    """
    a.check_pattern(g)
    if not g.loopless():
        raise ValueError("loop-less driver requires a graph without self-loops")
    cfg = cfg or SolverConfig()
    if parallel:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor() as pool:
            solutions = list(
                pool.map(lambda i: _solve_one_row(a, g, i, method, cfg), range(g.n))
            )
    else:
        solutions = [_solve_one_row(a, g, i, method, cfg) for i in range(g.n)]
    result = SparseRowMatrix.zeros(g)
    for i, sol in enumerate(solutions):
        result.offdiag[i] = sol.x.copy()
        result.diag[i] = -float(sol.x.sum())
    return result, solutions
