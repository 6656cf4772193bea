import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdmdp.core import build_instance, build_policy, deterministic_policy
from pdmdp.exact import (
    apply_bellman,
    bellman_residual,
    occupancy_measure,
    policy_evaluation,
    value_iteration,
)
from pdmdp.instances import HardFamilySpec, hard_family, random_instance
from pdmdp.minimax import shifted_transition_apply_t


def tiny_instance():
    return build_instance(1, [1], [[1.0]], [1.0], 0.5)


def random_policy(instance, rng):
    probs = np.concatenate(
        [rng.dirichlet(np.ones(count)) for count in instance.actions_per_state]
    )
    return build_policy(instance, probs)


class TestValueIteration:
    def test_single_state_geometric_series(self):
        sol = value_iteration(tiny_instance(), 1e-10)
        assert sol.optimal_value[0] == pytest.approx(2.0, abs=1e-10)

    def test_hard_family_middle_state(self):
        # Unperturbed middle chains: value 1 / (1 - gamma * base_loop) = 1.5.
        spec = HardFamilySpec(m=1, n=2, discount=0.5, epsilon=0.05)
        inst = hard_family(spec)
        sol = value_iteration(inst, 1e-10)
        # Middle state of the non-boosted chain (k=1, l=2).
        assert sol.optimal_value[2] == pytest.approx(1.5, abs=1e-8)

    def test_three_state_fixture(self, ex3, ex3_solution, ex3_optimal_value):
        np.testing.assert_allclose(
            ex3_solution.optimal_value, ex3_optimal_value, atol=1e-10
        )
        # Optimal actions: leave, leave, right.
        np.testing.assert_array_equal(
            ex3_solution.optimal_policy.probs, [0, 1, 0, 1, 0, 1]
        )

    def test_residual_below_tolerance(self, ex3):
        sol = value_iteration(ex3.instance, 1e-8)
        assert sol.residual <= 1e-8


class TestPolicyEvaluation:
    def test_single_state(self):
        inst = tiny_instance()
        assert policy_evaluation(inst, deterministic_policy(inst, [0]))[0] == 2.0

    def test_absorbing_zero_reward_state(self):
        # Hard-family end states absorb with reward 0 and are worth 0.
        spec = HardFamilySpec(m=1, n=2, discount=0.5, epsilon=0.05)
        inst = hard_family(spec)
        sol = value_iteration(inst, 1e-10)
        v = policy_evaluation(inst, sol.optimal_policy)
        np.testing.assert_allclose(v[-2:], 0.0, atol=1e-12)

    def test_uniform_policy_cross_check(self, ex3):
        probs = np.full(6, 0.5)
        pol = build_policy(ex3.instance, probs)
        v = policy_evaluation(ex3.instance, pol)
        # Independent iterative evaluation of the same policy.
        u = np.zeros(3)
        for _ in range(2000):
            x = ex3.instance.reward + 0.5 * (ex3.instance.transition @ u)
            u = np.add.reduceat(0.5 * x, ex3.instance.state_offsets)
        np.testing.assert_allclose(v, u, atol=1e-9)

    def test_oracle_agreement(self, ex3, ex3_solution):
        v_pi = policy_evaluation(ex3.instance, ex3_solution.optimal_policy)
        np.testing.assert_allclose(v_pi, ex3_solution.optimal_value, atol=2e-12)


class TestOccupancyMeasure:
    def test_single_state_forced_point(self):
        inst = tiny_instance()
        mu = occupancy_measure(inst, deterministic_policy(inst, [0]), [1.0])
        np.testing.assert_allclose(mu, [1.0])

    def test_optimal_policy_fixture(self, ex3, ex3_solution):
        mu = occupancy_measure(ex3.instance, ex3_solution.optimal_policy, ex3.q)
        np.testing.assert_allclose(mu, [0.0, 0.3, 0.0, 0.3, 0.0, 0.4], atol=1e-12)

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=25, deadline=None)
    def test_feasibility_random(self, seed):
        rng = np.random.default_rng(seed)
        inst = random_instance(4, 3, seed=seed)
        pol = random_policy(inst, rng)
        q = rng.dirichlet(np.ones(inst.num_states))
        mu = occupancy_measure(inst, pol, q)
        assert mu.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(mu >= 0)
        # Dual LP flow constraint: (Ihat - gamma P)^T mu = (1 - gamma) q.
        flow = -shifted_transition_apply_t(inst, mu)
        np.testing.assert_allclose(flow, (1 - inst.discount) * q, atol=1e-9)

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=15, deadline=None)
    def test_strong_duality(self, seed):
        rng = np.random.default_rng(seed)
        inst = random_instance(4, 2, seed=seed)
        sol = value_iteration(inst, 1e-12)
        q = rng.dirichlet(np.ones(inst.num_states))
        mu = occupancy_measure(inst, sol.optimal_policy, q)
        assert float(mu @ inst.reward) == pytest.approx(
            (1 - inst.discount) * float(q @ sol.optimal_value), abs=1e-8
        )


class TestBellmanResidual:
    def test_zero_vector_single_state(self):
        assert bellman_residual(tiny_instance(), [0.0]) == pytest.approx(1.0)

    def test_optimal_vector(self, ex3, ex3_optimal_value):
        assert bellman_residual(ex3.instance, ex3_optimal_value) <= 1e-12

    def test_constant_shift_identity(self, ex3, ex3_optimal_value):
        for c in (-0.7, 0.3, 1.9):
            res = bellman_residual(ex3.instance, ex3_optimal_value + c)
            assert res == pytest.approx(abs(c) * (1 - ex3.instance.discount), abs=1e-10)

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=25, deadline=None)
    def test_contraction(self, seed):
        rng = np.random.default_rng(seed)
        inst = random_instance(4, 2, seed=seed)
        v = rng.uniform(-5, 5, inst.num_states)
        w = rng.uniform(-5, 5, inst.num_states)
        lhs = np.abs(apply_bellman(inst, v) - apply_bellman(inst, w)).max()
        assert lhs <= inst.discount * np.abs(v - w).max() + 1e-12
