"""Acceptance gate: ten numbered criteria, one pass/fail line each.

Each criterion prints a single summary line (bypassing capture, so it is
visible in the normal pytest output) and then asserts.  Tolerances are pinned
in the assertions; seeds are fixed so runs are reproducible.
"""

import math
import statistics
import time

import numpy as np
import pytest
from oracles import loopy_row_oracle

from nearlap import (
    GraphStructure,
    NoiseParams,
    RowSubproblem,
    SolverConfig,
    SparseRowMatrix,
    SysidConfig,
    TrajectoryData,
    WSParams,
    apply_q_inverse,
    build_row_subproblem,
    clip_row,
    enumerate_active_sets,
    generate_noisy_instance,
    generate_ws_graph,
    identify_laplacian,
    kkt_residual,
    nearest_laplacian,
    solve_active_set,
    solve_interior_point,
    solve_loopy_row,
    solve_sort_kkt,
    solve_vfista,
    sysid_gradient,
    sysid_objective,
    worst_case_sequence,
)


def report(capsys, num, ok, detail):
    status = "PASS" if ok else "FAIL"
    with capsys.disabled():
        print(f"\n[criterion {num:02d}] {status} — {detail}")
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def random_pool():
    """1000 random row subproblems, d in [1, 12], b ~ U[-10, 10]."""
    rng = np.random.default_rng(20240101)
    pool = []
    for _ in range(1000):
        d = int(rng.integers(1, 13))
        pool.append(RowSubproblem(d=d, b=rng.uniform(-10, 10, d)))
    return pool


def test_criterion_01_oracle_equivalence(random_pool, capsys):
    start = time.perf_counter()
    max_dx = 0.0
    ok = True
    for p in random_pool:
        oracle = enumerate_active_sets(p)
        for solve in (solve_active_set, solve_sort_kkt):
            sol = solve(p)
            max_dx = max(max_dx, float(np.max(np.abs(sol.x - oracle.x))))
            if sorted(sol.active_set) != sorted(oracle.active_set):
                ok = False
    elapsed = time.perf_counter() - start
    ok = ok and max_dx <= 1e-10 and elapsed < 10.0
    report(
        capsys, 1, ok,
        f"active-set/sort-KKT vs 2^d oracle on 1000 rows: "
        f"max |x - x_oracle| = {max_dx:.2e} (<= 1e-10), "
        f"active sets exact, {elapsed:.1f} s (< 10 s)",
    )


def test_criterion_02_kkt_residuals(random_pool, capsys):
    worst_exact = 0.0
    worst_ip = 0.0
    eps = 1e-6
    cfg = SolverConfig(ip_epsilon=eps)
    for p in random_pool:
        for solve in (solve_active_set, solve_sort_kkt):
            sol = solve(p)
            worst_exact = max(worst_exact, kkt_residual(sol.x, sol.lam, p))
        ip = solve_interior_point(p, cfg)
        assert ip.converged
        worst_ip = max(worst_ip, kkt_residual(ip.x_raw, ip.lam, p))
    ok = worst_exact <= 1e-9 and worst_ip <= 10 * eps
    report(
        capsys, 2, ok,
        f"exact-solver KKT residual max {worst_exact:.2e} (<= 1e-9); "
        f"interior-point residual max {worst_ip:.2e} (<= 10*eps = 1e-5)",
    )


def test_criterion_03_structural_properties(random_pool, capsys):
    sign_ok = True
    worst_slack = -np.inf
    for p in random_pool:
        sol = solve_sort_kkt(p)
        b_prime = -apply_q_inverse(p.b)
        for i in range(p.d):
            if b_prime[i] > 0 and sol.x[i] != 0.0:
                sign_ok = False
        worst_slack = max(worst_slack, float(sol.x.sum() - b_prime.sum()))
    ok = sign_ok and worst_slack <= 1e-12
    report(
        capsys, 3, ok,
        f"b'_i > 0 implies x*_i = 0 on every instance; "
        f"max(1'x* - 1'b') = {worst_slack:.2e} (<= 1e-12)",
    )


def test_criterion_04_finite_termination(capsys):
    rng = np.random.default_rng(20240104)
    max_iters_ok = True
    for _ in range(10000):
        d = int(rng.integers(1, 201))
        sol = solve_active_set(RowSubproblem(d=d, b=rng.uniform(-10, 10, d)))
        if sol.iterations > d:
            max_iters_ok = False
    worst_ok = True
    for d in range(1, 31):
        sol = solve_active_set(RowSubproblem(d=d, b=worst_case_sequence(d).b))
        if sol.iterations != d:
            worst_ok = False
    ok = max_iters_ok and worst_ok
    report(
        capsys, 4, ok,
        "active-set iterations <= d on 10000 random rows (d <= 200); "
        "worst-case rows take exactly d iterations for d in [1, 30]",
    )


def _best_time(solve, p, rows, reps=5):
    best = np.inf
    for _ in range(reps):
        start = time.perf_counter()
        for _ in range(rows):
            solve(p)
        best = min(best, time.perf_counter() - start)
    return best


def test_criterion_05_complexity_scaling(capsys):
    start = time.perf_counter()
    p100 = RowSubproblem(d=100, b=worst_case_sequence(100).b)
    p200 = RowSubproblem(d=200, b=worst_case_sequence(200).b)
    active_ratio = _best_time(solve_active_set, p200, 40) / _best_time(
        solve_active_set, p100, 40
    )
    sort_ratio = _best_time(solve_sort_kkt, p200, 400) / _best_time(
        solve_sort_kkt, p100, 400
    )
    elapsed = time.perf_counter() - start
    ok = 2.5 <= active_ratio <= 6.0 and sort_ratio <= 2.5 and elapsed < 60.0
    report(
        capsys, 5, ok,
        f"worst-case d=200/d=100 time ratios: active-set {active_ratio:.2f} "
        f"(in [2.5, 6]), sort-KKT {sort_ratio:.2f} (<= 2.5), {elapsed:.1f} s (< 60 s)",
    )


def test_criterion_06_method_ordering(capsys):
    start = time.perf_counter()
    methods = ["sort_kkt", "active_set", "vfista", "interior_point"]
    g = generate_ws_graph(WSParams(n=1000, mean_degree=20, rewire_p=0.2, seed=20240106))
    times = {m: [] for m in methods}
    agree_ok = True
    for rep in range(20):
        a, _ = generate_noisy_instance(g, NoiseParams(seed=rep))
        objectives = {}
        for m in methods:
            t0 = time.perf_counter()
            l, _ = nearest_laplacian(a, g, method=m)
            times[m].append(time.perf_counter() - t0)
            objectives[m] = a.frobenius_distance_sq(l)
        ref = objectives["sort_kkt"]
        for v in objectives.values():
            if abs(v - ref) > 1e-4 * abs(ref):
                agree_ok = False
    med = {m: statistics.median(times[m]) for m in methods}
    order_ok = med["sort_kkt"] <= med["active_set"] <= med["vfista"] <= med["interior_point"]
    elapsed = time.perf_counter() - start
    ok = order_ok and agree_ok and elapsed < 300.0
    report(
        capsys, 6, ok,
        "median times (n=1000, degree 20, 20 reps): "
        + ", ".join(f"{m} {med[m] * 1e3:.1f} ms" for m in methods)
        + f"; ordering holds, objectives agree to 1e-4 relative, {elapsed:.0f} s (< 5 min)",
    )


def test_criterion_07_loopy_correctness(capsys):
    rng = np.random.default_rng(20240107)
    max_err = 0.0
    equiv_ok = True
    for _ in range(500):
        d = int(rng.integers(0, 8))  # self-loop row with n = d + 1 <= 8 entries
        a0 = float(rng.uniform(-5, 5))
        a = rng.uniform(-5, 5, d)
        g = GraphStructure(
            n=d + 1,
            neighbors=[list(range(1, d + 1))] + [[] for _ in range(d)],
            has_self_loop=[True] + [False] * d,
        )
        m = SparseRowMatrix.zeros(g)
        m.diag[0] = a0
        m.offdiag[0] = a
        diag, nbrs, _ = solve_loopy_row(m, g, 0)
        o_diag, o_nbrs = loopy_row_oracle(a0, a)
        max_err = max(max_err, abs(diag - o_diag))
        if d:
            max_err = max(max_err, float(np.max(np.abs(nbrs - o_nbrs))))
        solved_sum = diag + float(nbrs.sum())
        clipped_sum = clip_row(m, g, 0).row_sum
        if (solved_sum > 1e-12) != (clipped_sum > 1e-12):
            equiv_ok = False
    ok = max_err <= 1e-8 and equiv_ok
    report(
        capsys, 7, ok,
        f"500 random loopy rows vs brute-force oracle: max error {max_err:.2e} "
        f"(<= 1e-8); row-sum sign equivalence holds on all",
    )


def test_criterion_08_vfista_rate(capsys):
    rng = np.random.default_rng(20240108)
    d = 50
    rate_bound = 1.0 - 1.0 / (2.0 * math.sqrt(1.0 + d))
    # iteration estimate k = log(1/eps) / log(sqrt(1+d)/(sqrt(1+d)-1))
    eps = 1e-6
    root = math.sqrt(1.0 + d)
    k_est = math.ceil(math.log(1.0 / eps) / math.log(root / (root - 1.0)))
    budget = 10 * k_est
    worst_ratio = 0.0
    worst_hit = 0
    for _ in range(20):
        p = RowSubproblem(d=d, b=rng.uniform(-10, 10, d))
        f_opt = solve_sort_kkt(p).objective
        cfg = SolverConfig(vfista_max_iter=600, vfista_epsilon=1e-300)
        sol = solve_vfista(p, cfg, f_ref=f_opt, record_trace=True)
        gaps = np.array(sol.trace.residuals)
        hits = np.nonzero(gaps <= eps)[0]
        worst_hit = max(worst_hit, int(hits[0]) if len(hits) else budget + 1)
        # measure the geometric ratio over the tail where the gap is still
        # above the floating-point floor; on these instances the gap reaches
        # the floor before iteration 100, so the measurable tail is the
        # pre-floor stretch (decay faster than any fixed geometric rate
        # satisfies the bound a fortiori)
        floor = 1e-12 * max(1.0, abs(f_opt))
        above = np.nonzero(gaps > floor)[0]
        lo = min(100, max(0, above[-1] - 10))
        hi = min(500, above[-1])
        if hi > lo:
            ratio = (gaps[hi] / gaps[lo]) ** (1.0 / (hi - lo))
            worst_ratio = max(worst_ratio, float(ratio))
    ok = worst_ratio <= rate_bound and worst_hit <= budget
    report(
        capsys, 8, ok,
        f"d=50 tail decay ratio max {worst_ratio:.3f} (<= {rate_bound:.3f}); "
        f"gap <= 1e-6 reached by iteration {worst_hit} (budget {budget})",
    )


def test_criterion_09_idempotence_and_fixed_points(capsys):
    max_idem = 0.0
    max_fix = 0.0
    for seed in range(10):
        g = generate_ws_graph(WSParams(n=60, mean_degree=6, rewire_p=0.2, seed=seed))
        a, x_true = generate_noisy_instance(g, NoiseParams(seed=seed))
        l1, _ = nearest_laplacian(a, g)
        l2, _ = nearest_laplacian(l1, g)
        max_idem = max(max_idem, math.sqrt(l1.frobenius_distance_sq(l2)))
        fixed, _ = nearest_laplacian(x_true, g)
        max_fix = max(max_fix, math.sqrt(fixed.frobenius_distance_sq(x_true)))
    ok = max_idem <= 1e-12 and max_fix <= 1e-12
    report(
        capsys, 9, ok,
        f"10 instances: ||P(P(A)) - P(A)||_F max {max_idem:.2e}, "
        f"||P(X_true) - X_true||_F max {max_fix:.2e} (both <= 1e-12)",
    )


def test_criterion_10_sysid_self_consistency(capsys):
    start = time.perf_counter()
    n, total_pairs = 20, 200
    g = generate_ws_graph(WSParams(n=n, mean_degree=4, rewire_p=0.2, seed=20240110))
    _, x_true = generate_noisy_instance(
        g, NoiseParams(weight_scale=1.0, noise_scale=0.0, seed=20240110)
    )
    l_dense = x_true.to_dense(g)
    h = 0.5 / max(abs(np.linalg.eigvals(l_dense)))
    rng = np.random.default_rng(20240110)
    # ten noiseless trajectories of twenty steps each
    xs, xns = [], []
    for _ in range(10):
        s = rng.standard_normal(n)
        for _ in range(total_pairs // 10):
            s_next = s - h * l_dense @ s
            xs.append(s)
            xns.append(s_next)
            s = s_next
    data = TrajectoryData(X=np.array(xs).T, X_next=np.array(xns).T, h=h)
    recovered = identify_laplacian(data, g, SysidConfig(grad_tol=1e-12))
    zero = SparseRowMatrix.zeros(g)
    rel = math.sqrt(
        recovered.frobenius_distance_sq(x_true) / x_true.frobenius_distance_sq(zero)
    )

    # analytic gradient vs central finite differences on a small instance
    g5 = generate_ws_graph(WSParams(n=5, mean_degree=2, rewire_p=0.3, seed=1))
    rng5 = np.random.default_rng(5)
    data5 = TrajectoryData(
        X=rng5.standard_normal((5, 12)), X_next=rng5.standard_normal((5, 12)), h=0.3
    )
    l5 = SparseRowMatrix.zeros(g5)
    l5.diag[:] = rng5.uniform(0, 2, 5)
    for i in range(5):
        l5.offdiag[i] = rng5.uniform(-2, 0, len(g5.neighbors[i]))
    grad = sysid_gradient(l5, data5, g5)
    fd_eps = 1e-6
    max_rel_grad = 0.0

    def central(mutate):
        hi, lo = l5.copy(), l5.copy()
        mutate(hi, fd_eps)
        mutate(lo, -fd_eps)
        return (sysid_objective(hi, data5, g5) - sysid_objective(lo, data5, g5)) / (
            2 * fd_eps
        )

    for i in range(5):
        fd = central(lambda m, e, i=i: m.diag.__setitem__(i, m.diag[i] + e))
        max_rel_grad = max(max_rel_grad, abs(grad.diag[i] - fd) / max(abs(fd), 1e-8))
        for k in range(len(g5.neighbors[i])):
            fd = central(
                lambda m, e, i=i, k=k: m.offdiag[i].__setitem__(k, m.offdiag[i][k] + e)
            )
            max_rel_grad = max(
                max_rel_grad, abs(grad.offdiag[i][k] - fd) / max(abs(fd), 1e-8)
            )
    elapsed = time.perf_counter() - start
    ok = rel <= 1e-4 and max_rel_grad <= 1e-5 and elapsed < 30.0
    report(
        capsys, 10, ok,
        f"noiseless recovery (n=20, N=200): relative error {rel:.2e} (<= 1e-4); "
        f"gradient vs finite differences {max_rel_grad:.2e} (<= 1e-5); "
        f"{elapsed:.1f} s (< 30 s)",
    )
