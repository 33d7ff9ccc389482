import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fgmpc.cost import (CondensedCost, ControlParameter, ReferenceSignal, momentum_constant,
                        power_iteration)
from fgmpc.errors import NonFiniteError
from fgmpc.plant import discretize_triple_integrator, predict


def small_cost(N=6, Q=100.0, R=1.0, J_floor=1.0, ref=None, tau=0.1):
    plant = discretize_triple_integrator(tau)
    ref = ref or ReferenceSignal((0, 3), (0.4, -0.7))
    return CondensedCost(plant, N, Q, R, ref, J_floor)


def rollout_cost(cost, p, x, k0):
    """Cost accumulated stage by stage from explicit predictions."""
    total = cost.J_floor
    for k in range(1, cost.horizon + 1):
        y = cost.plant.C @ predict(cost.plant, x, p, k)
        e = y - cost.reference.at(k0 + k)
        u = np.atleast_1d(p[k - 1])
        total += e @ cost.Q @ e + u @ cost.R @ u
    return total


def test_zero_trajectory_gives_floor():
    cost = small_cost(ref=ReferenceSignal.constant(0.0), J_floor=2.5)
    assert cost.eval(np.zeros(6), np.zeros(3), 0) == 2.5


def test_one_step_hand_value():
    plant = discretize_triple_integrator(1.0)
    cost = CondensedCost(plant, 1, 100.0, 1.0, ReferenceSignal.constant(0.0), 1.0)
    assert cost.eval(np.array([1.0]), np.zeros(3), 0) == pytest.approx(1.0 + 100 / 36 + 1, rel=1e-14)
    assert cost.eval(np.array([1.0]), np.zeros(3), 0) - 1.0 == pytest.approx(3.7778, abs=1e-4)


def test_zero_input_from_origin_costs_reference_energy():
    ref = ReferenceSignal((0, 2, 5), (0.3, -1.2, 0.8))
    cost = small_cost(N=8, ref=ref)
    for k0 in (0, 1, 4):
        expected = 1.0 + 100.0 * sum(ref.at(k0 + k)[0] ** 2 for k in range(1, 9))
        assert cost.eval(np.zeros(8), np.zeros(3), k0) == pytest.approx(expected, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(p=arrays(float, 6, elements=st.floats(-2, 2)), x=arrays(float, 3, elements=st.floats(-2, 2)),
       k0=st.integers(0, 10))
def test_condensed_matches_rollout(p, x, k0):
    cost = small_cost()
    assert cost.eval(p, x, k0) == pytest.approx(rollout_cost(cost, p, x, k0), rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(p=arrays(float, 6, elements=st.floats(-50, 50)), x=arrays(float, 3, elements=st.floats(-50, 50)),
       k0=st.integers(0, 10))
def test_cost_never_below_floor(p, x, k0):
    cost = small_cost(J_floor=0.3)
    assert cost.eval(p, x, k0) >= 0.3


def test_gradient_matches_central_differences():
    cost = small_cost(N=10)
    rng = np.random.default_rng(0)
    h = 1e-5
    for _ in range(100):
        p, x, k0 = rng.uniform(-1, 1, 10), rng.standard_normal(3), int(rng.integers(0, 6))
        fd = np.array([(cost.eval(p + h * e, x, k0) - cost.eval(p - h * e, x, k0)) / (2 * h)
                       for e in np.eye(10)])
        g = cost.grad(p, x, k0)
        assert np.linalg.norm(g - fd) <= 1e-6 * max(np.linalg.norm(fd), 1.0)


def test_gradient_vanishes_at_unconstrained_minimiser(benchmark_cost):
    x = np.array([0.2, -0.1, 0.05])
    p_star = benchmark_cost.unconstrained_minimizer(x, 17)
    dense = np.linalg.solve(benchmark_cost.hessian, -benchmark_cost.linear_term(x, 17))
    np.testing.assert_allclose(p_star, dense, rtol=1e-8, atol=1e-10)
    assert np.linalg.norm(benchmark_cost.grad(p_star, x, 17)) <= 1e-9


def test_gradient_independent_of_floor():
    a, b = small_cost(J_floor=1.0), small_cost(J_floor=1e4)
    rng = np.random.default_rng(1)
    p, x = rng.standard_normal(6), rng.standard_normal(3)
    np.testing.assert_array_equal(a.grad(p, x, 2), b.grad(p, x, 2))
    assert b.eval(p, x, 2) - a.eval(p, x, 2) == pytest.approx(1e4 - 1.0)


def test_hessian_symmetric_positive_definite(benchmark_cost):
    H = benchmark_cost.hessian
    np.testing.assert_array_equal(H, H.T)
    assert np.linalg.eigvalsh(H)[0] > 0


def test_hessian_extremes_without_output_weight():
    cost = small_cost(Q=0.0, R=3.0)
    lo, hi = cost.hessian_extremes()
    assert lo == pytest.approx(6.0, rel=1e-10)
    assert hi == pytest.approx(6.0, rel=1e-10)


@pytest.mark.parametrize("R", [0.5, 1.0, 7.0])
def test_lambda_min_at_least_twice_R(R):
    lo, _ = small_cost(R=R).hessian_extremes()
    assert lo >= 2 * R * (1 - 1e-12)


def test_benchmark_extremes_match_dense_eigensolver(benchmark_cost):
    w = np.linalg.eigvalsh(benchmark_cost.hessian)
    lo, hi = benchmark_cost.hessian_extremes()
    assert lo == pytest.approx(w[0], rel=1e-8)
    assert hi == pytest.approx(w[-1], rel=1e-8)
    assert benchmark_cost.lipschitz_bound() == hi


def test_lipschitz_bound_holds_on_random_pairs(benchmark_cost):
    L = benchmark_cost.lipschitz_bound()
    rng = np.random.default_rng(2)
    x = rng.standard_normal(3)
    for _ in range(1000):
        p1, p2 = rng.uniform(-1, 1, 200), rng.uniform(-1, 1, 200)
        lhs = np.linalg.norm(benchmark_cost.grad(p2, x, 5) - benchmark_cost.grad(p1, x, 5))
        assert lhs <= L * np.linalg.norm(p2 - p1) * (1 + 1e-10)


def test_lipschitz_without_output_weight():
    assert small_cost(Q=0.0, R=1.0).lipschitz_bound() == pytest.approx(2.0, rel=1e-12)


def test_power_iteration_dominant_eigenvalue():
    rng = np.random.default_rng(4)
    M = rng.standard_normal((30, 30))
    S = M @ M.T + np.eye(30)
    assert power_iteration(lambda v: S @ v, 30, tol=1e-13) == pytest.approx(
        np.linalg.eigvalsh(S)[-1], rel=1e-8)


@pytest.mark.parametrize("lmin,lmax,c", [(3.0, 3.0, 0.0), (1.0, 4.0, 1 / 3), (1.0, 100.0, 9 / 11)])
def test_momentum_constant(lmin, lmax, c):
    assert momentum_constant(lmin, lmax) == pytest.approx(c, abs=1e-15)


@pytest.mark.parametrize("lmin,lmax", [(0.0, 1.0), (-1.0, 2.0), (2.0, 1.0)])
def test_momentum_constant_rejects_bad_eigenvalues(lmin, lmax):
    with pytest.raises(ValueError):
        momentum_constant(lmin, lmax)


def test_dimension_mismatch_rejected():
    cost = small_cost()
    with pytest.raises(ValueError):
        cost.eval(np.zeros(5), np.zeros(3), 0)
    with pytest.raises(ValueError):
        cost.grad(np.zeros(6), np.zeros(2), 0)


def test_weight_validation():
    plant = discretize_triple_integrator(0.1)
    ref = ReferenceSignal.constant(0.0)
    with pytest.raises(ValueError):
        CondensedCost(plant, 5, 1.0, 0.0, ref)
    with pytest.raises(ValueError):
        CondensedCost(plant, 5, -1.0, 1.0, ref)
    with pytest.raises(ValueError):
        CondensedCost(plant, 5, 1.0, 1.0, ref, J_floor=0.0)


def test_non_finite_cost_raises():
    cost = small_cost()
    with pytest.raises(NonFiniteError):
        cost.eval(np.full(6, np.inf), np.zeros(3), 0)


def test_reference_schedule_lookup_and_hold():
    ref = ReferenceSignal((0, 10, 20), (1.0, -1.0, 0.5))
    assert ref.at(0)[0] == 1.0 and ref.at(9)[0] == 1.0
    assert ref.at(10)[0] == -1.0 and ref.at(19)[0] == -1.0
    assert ref.at(10_000)[0] == 0.5
    np.testing.assert_array_equal(ref.window(8, 4).ravel(), [1.0, -1.0, -1.0, -1.0])


def test_reference_validation():
    with pytest.raises(ValueError):
        ReferenceSignal((1, 4), (0.0, 1.0))
    with pytest.raises(ValueError):
        ReferenceSignal((0, 4, 4), (0.0, 1.0, 2.0))
    with pytest.raises(ValueError):
        ReferenceSignal((0, 4), (0.0,))


def test_alternating_reference():
    ref = ReferenceSignal.alternating((0.5, -0.5), 800, 4000)
    assert ref.times == (0, 800, 1600, 2400, 3200)
    assert [v[0] for v in ref.values] == [0.5, -0.5, 0.5, -0.5, 0.5]


def test_control_parameter_box():
    p = ControlParameter([2.0, -3.0, 0.5], -1.0, 1.0)
    assert not p.is_feasible()
    q = p.projected()
    np.testing.assert_array_equal(q.values, [1.0, -1.0, 0.5])
    assert q.is_feasible() and len(q) == 3
    np.testing.assert_array_equal(np.asarray(q), q.values)
    with pytest.raises(ValueError):
        ControlParameter([0.0], 1.0, -1.0)
