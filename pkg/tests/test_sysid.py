"""Projected-gradient system identification."""

import numpy as np
import pytest

from nearlap import (
    NoiseParams,
    SparseRowMatrix,
    SysidConfig,
    TrajectoryData,
    WSParams,
    generate_noisy_instance,
    generate_ws_graph,
    identify_laplacian,
    lipschitz_step,
    sysid_gradient,
    sysid_objective,
    validate_laplacian,
)
from nearlap.core import GraphStructure


def make_instance(n=20, mean_degree=4, seed=3, num_samples=200, h=None):
    g = generate_ws_graph(WSParams(n=n, mean_degree=mean_degree, rewire_p=0.2, seed=seed))
    _, x_true = generate_noisy_instance(
        g, NoiseParams(weight_scale=1.0, noise_scale=0.0, seed=seed)
    )
    l_dense = x_true.to_dense(g)
    if h is None:
        h = 0.1 / max(abs(np.linalg.eigvals(l_dense)))
    rng = np.random.default_rng(seed + 100)
    x = rng.standard_normal((n, num_samples))
    x_next = x - h * l_dense @ x
    return g, x_true, TrajectoryData(X=x, X_next=x_next, h=h)


class TestTrajectoryData:
    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            TrajectoryData(X=np.zeros((2, 3)), X_next=np.zeros((2, 4)), h=0.1)

    def test_positive_interval(self):
        with pytest.raises(ValueError):
            TrajectoryData(X=np.zeros((2, 3)), X_next=np.zeros((2, 3)), h=0.0)

    def test_properties(self):
        d = TrajectoryData(X=np.zeros((4, 7)), X_next=np.zeros((4, 7)), h=0.5)
        assert d.n == 4 and d.num_samples == 7


class TestObjective:
    def test_zero_at_truth(self):
        g, x_true, data = make_instance()
        assert sysid_objective(x_true, data, g) <= 1e-20

    def test_identity_dynamics(self):
        g = GraphStructure(n=2, neighbors=[[1], []])
        x = np.ones((2, 3))
        data = TrajectoryData(X=x, X_next=x, h=1.0)
        assert sysid_objective(SparseRowMatrix.zeros(g), data, g) == 0.0

    def test_scalar_case(self):
        g = GraphStructure(n=1, neighbors=[[]])
        data = TrajectoryData(X=np.array([[2.0]]), X_next=np.array([[1.0]]), h=1.0)
        assert sysid_objective(SparseRowMatrix.zeros(g), data, g) == pytest.approx(1.0)


class TestGradient:
    def test_zero_at_global_minimum(self):
        g, x_true, data = make_instance()
        grad = sysid_gradient(x_true, data, g)
        assert np.max(np.abs(grad.diag)) <= 1e-10
        assert all(np.max(np.abs(r), initial=0.0) <= 1e-10 for r in grad.offdiag)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        g = generate_ws_graph(WSParams(n=5, mean_degree=2, rewire_p=0.3, seed=1))
        data = TrajectoryData(
            X=rng.standard_normal((5, 12)), X_next=rng.standard_normal((5, 12)), h=0.3
        )
        l = SparseRowMatrix.zeros(g)
        l.diag[:] = rng.uniform(0, 2, 5)
        for i in range(5):
            l.offdiag[i] = rng.uniform(-2, 0, len(g.neighbors[i]))
        grad = sysid_gradient(l, data, g)
        eps = 1e-6

        def fd(mutate):
            hi, lo = l.copy(), l.copy()
            mutate(hi, eps)
            mutate(lo, -eps)
            return (sysid_objective(hi, data, g) - sysid_objective(lo, data, g)) / (2 * eps)

        for i in range(5):
            def bump_diag(m, e, i=i):
                m.diag[i] += e

            assert grad.diag[i] == pytest.approx(fd(bump_diag), rel=1e-5, abs=1e-8)
            for k in range(len(g.neighbors[i])):
                def bump_off(m, e, i=i, k=k):
                    m.offdiag[i][k] += e

                assert grad.offdiag[i][k] == pytest.approx(fd(bump_off), rel=1e-5, abs=1e-8)


class TestLipschitzStep:
    def test_matches_dense_formula(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal((6, 30))
        data = TrajectoryData(X=x, X_next=x, h=0.25)
        lam_max = np.linalg.eigvalsh(x @ x.T)[-1]
        assert lipschitz_step(data) == pytest.approx(30 / (2 * 0.25**2 * lam_max))

    def test_zero_data(self):
        data = TrajectoryData(X=np.zeros((3, 5)), X_next=np.zeros((3, 5)), h=1.0)
        assert lipschitz_step(data) == 1.0


class TestIdentifyLaplacian:
    def test_noiseless_recovery(self):
        g, x_true, data = make_instance()
        result = identify_laplacian(data, g, SysidConfig(grad_tol=1e-12))
        rel = np.sqrt(
            result.frobenius_distance_sq(x_true)
            / max(x_true.frobenius_distance_sq(SparseRowMatrix.zeros(g)), 1e-300)
        )
        assert rel <= 1e-4

    def test_objective_monotone_descent(self):
        g, _, data = make_instance(seed=8)
        history = []
        identify_laplacian(data, g, SysidConfig(max_iter=50), history=history)
        assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))

    def test_iterates_stay_feasible(self):
        g, _, data = make_instance(seed=9, n=10, num_samples=40)
        result = identify_laplacian(data, g, SysidConfig(max_iter=30))
        assert validate_laplacian(result, g).ok(1e-9)

    def test_zero_information_data(self):
        g = generate_ws_graph(WSParams(n=6, mean_degree=2, seed=1))
        data = TrajectoryData(X=np.zeros((6, 5)), X_next=np.zeros((6, 5)), h=0.1)
        result = identify_laplacian(data, g, SysidConfig(max_iter=10))
        assert result.frobenius_distance_sq(SparseRowMatrix.zeros(g)) == 0.0

    def test_recovered_objective_dominates_truth(self):
        g, x_true, data = make_instance(seed=10)
        # perturb the targets slightly so the minimum is not exactly at truth
        data = TrajectoryData(
            X=data.X,
            X_next=data.X_next + 1e-3 * np.random.default_rng(0).standard_normal(data.X.shape),
            h=data.h,
        )
        result = identify_laplacian(data, g, SysidConfig(grad_tol=1e-12))
        assert sysid_objective(result, data, g) <= sysid_objective(x_true, data, g) + 1e-12

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SysidConfig(step_size=-1.0)
        with pytest.raises(ValueError):
            SysidConfig(grad_tol=0.0)
