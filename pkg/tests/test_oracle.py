import numpy as np
import pytest

from dlqg import (BlockDims, analytic_cost, closed_loop,
                  finite_horizon_oracle, make_instance, random_instance,
                  synthesize)

from conftest import SCALAR_DIMS


@pytest.fixture(scope="module")
def reference():
    # Mildly damped reference instance: transient effects decay fast enough
    # for the finite-horizon optimum to sit close under the stationary cost.
    inst = random_instance(1, SCALAR_DIMS, 0.35)
    _, realization = synthesize(inst)
    J_dist = analytic_cost(closed_loop(inst, realization))
    return inst, J_dist


class TestClosedForm:
    def test_memoryless_plant_two_steps(self):
        # A = 0, two steps: u(0) has no data, u(1) only shapes the
        # unpenalized x(2), so Theta* = 0 and J = trace(Q W) / 2.
        inst = make_instance(SCALAR_DIMS, A=np.zeros((2, 2)), B=np.eye(2),
                             C=np.eye(2), W=np.diag([1.0, 3.0]),
                             U=np.zeros((2, 2)), V=np.eye(2),
                             Q=np.diag([2.0, 1.0]), S=np.zeros((2, 2)),
                             R=np.eye(2))
        result, J = finite_horizon_oracle(inst, horizon=2)
        assert J == pytest.approx(0.5 * (2.0 * 1.0 + 1.0 * 3.0), rel=1e-12)
        assert np.all(result.theta == 0.0)


class TestStructure:
    def test_masked_entries_exactly_zero(self, reference):
        inst, _ = reference
        result, _ = finite_horizon_oracle(inst, horizon=20)
        assert np.all(result.theta[~result.free_mask] == 0.0)
        assert result.n_free == int(result.free_mask.sum())

    def test_mask_blocks_y2_into_u1(self, reference):
        inst, _ = reference
        result, _ = finite_horizon_oracle(inst, horizon=6)
        d = inst.dims
        m, p = d.m, d.p
        for t in range(6):
            for s in range(6):
                block = result.free_mask[t * m : t * m + d.m1,
                                         s * p + d.p1 : (s + 1) * p]
                assert not block.any()
                if s >= t:  # no same-step or acausal use of any channel
                    assert not result.free_mask[t * m : (t + 1) * m,
                                                s * p : (s + 1) * p].any()


class TestConvergence:
    def test_nondecreasing_in_horizon(self, reference):
        inst, J_dist = reference
        costs = [finite_horizon_oracle(inst, M)[1] for M in (5, 10, 20, 40)]
        for lo, hi in zip(costs, costs[1:]):
            assert hi >= lo - 1e-10
        assert costs[-1] <= J_dist

    def test_gap_shrinks_like_one_over_m(self, reference):
        inst, J_dist = reference
        gap = lambda M: J_dist - finite_horizon_oracle(inst, M)[1]
        g20, g40 = gap(20), gap(40)
        assert 0.0 <= g40 <= 0.75 * g20


class TestOptimality:
    def test_first_order_stationarity(self, reference):
        inst, _ = reference
        result, J = finite_horizon_oracle(inst, horizon=30)
        rng = np.random.default_rng(0)
        free = np.argwhere(result.free_mask)
        picks = free[rng.choice(len(free), size=100, replace=False)]
        for i, j in picks:
            for delta in (1e-4, -1e-4):
                theta = result.theta.copy()
                theta[i, j] += delta
                assert result.cost_of(theta) >= J - 1e-12


class TestGuards:
    def test_horizon_lower_bound(self, reference):
        with pytest.raises(ValueError):
            finite_horizon_oracle(reference[0], horizon=1)

    def test_size_guard(self):
        inst = random_instance(3, BlockDims(3, 3, 1, 1, 1, 1), 0.5)
        with pytest.raises(ValueError):
            finite_horizon_oracle(inst, horizon=1000)
