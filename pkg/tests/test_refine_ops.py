import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

import causalrefine as cr

CFG = cr.RefineConfig()

finite_floats = st.floats(min_value=-30, max_value=30, allow_nan=False)


def latent_strategy(n, n_free):
    return st.tuples(
        arrays(np.float64, n, elements=finite_floats),
        arrays(np.float64, n_free, elements=finite_floats),
    ).map(lambda t: cr.LatentPoint(*t))


class TestMapLatent:
    def test_sigmoid_midpoint(self):
        part = cr.ConfidencePartition(1)
        y, _ = cr.map_latent(cr.LatentPoint(np.zeros(1), np.zeros(1)), part, 0.2)
        assert y[0] == pytest.approx(0.5)

    def test_confidence_midpoint(self):
        part = cr.ConfidencePartition(1)
        _, alpha = cr.map_latent(cr.LatentPoint(np.zeros(1), np.zeros(1)), part, 0.2)
        assert alpha[0] == pytest.approx(0.6)  # 0.2 + 0.8 * 0.5

    def test_key_pinned_to_one(self):
        part = cr.ConfidencePartition(2, key_set={0})
        p = cr.LatentPoint(np.zeros(2), np.array([-17.0]))
        _, alpha = cr.map_latent(p, part, 0.2)
        assert alpha[0] == 1.0

    def test_missing_pinned_to_zero(self):
        part = cr.ConfidencePartition(2, missing_set={1})
        _, alpha = cr.map_latent(cr.LatentPoint(np.zeros(2), np.zeros(1)), part, 0.2)
        assert alpha[1] == 0.0

    def test_overflow_safe(self):
        part = cr.ConfidencePartition(2)
        p = cr.LatentPoint(np.array([-900.0, 900.0]), np.array([-900.0, 900.0]))
        y, alpha = cr.map_latent(p, part, 0.2)
        assert np.all(np.isfinite(y)) and np.all(np.isfinite(alpha))
        assert y[0] == 0.0 and y[1] == 1.0

    @given(latent_strategy(5, 3))
    def test_image_bounds(self, p):
        part = cr.ConfidencePartition(5, key_set={0}, missing_set={4})
        y, alpha = cr.map_latent(p, part, 0.2)
        assert np.all((y > 0) & (y < 1))
        assert alpha[0] == 1.0 and alpha[4] == 0.0
        free = list(part.free_set)
        assert np.all(alpha[free] > 0.2) and np.all(alpha[free] < 1.0)

    def test_partition_validation(self):
        with pytest.raises(ValueError):
            cr.ConfidencePartition(3, key_set={0}, missing_set={0})
        with pytest.raises(cr.AllScoresMissing):
            cr.ConfidencePartition(2, missing_set={0, 1})
        with pytest.raises(ValueError):
            cr.ConfidencePartition(2, key_set={5})


class TestSmoothmax:
    def test_singleton(self):
        assert cr.smoothmax([0.37], 10.0) == pytest.approx(0.37)

    def test_constant(self):
        assert cr.smoothmax([0.5, 0.5, 0.5], 10.0) == pytest.approx(0.5)

    def test_zero_one(self):
        # direct evaluation of the weighted-sum formula
        expected = (0.0 * math.exp(0.0) + 1.0 * math.exp(10.0)) / (math.exp(0.0) + math.exp(10.0))
        assert cr.smoothmax([0.0, 1.0], 10.0) == pytest.approx(expected, rel=1e-12)

    def test_empty(self):
        with pytest.raises(cr.EmptyInput):
            cr.smoothmax([], 10.0)

    @given(arrays(np.float64, st.integers(1, 8),
                  elements=st.floats(0, 1, allow_nan=False)),
           st.floats(0.1, 50))
    def test_bounds(self, v, c):
        sm = cr.smoothmax(v, c)
        assert v.min() - 1e-12 <= sm <= v.max() + 1e-12

    @given(arrays(np.float64, 6, elements=st.floats(0, 1, allow_nan=False)),
           st.permutations(range(6)))
    def test_permutation_invariant(self, v, perm):
        assert cr.smoothmax(v[list(perm)], 10.0) == pytest.approx(cr.smoothmax(v, 10.0), abs=1e-12)

    def test_large_values_stable(self):
        assert np.isfinite(cr.smoothmax([1e3, 2e3], 10.0))


class TestFidelity:
    def test_single_term(self):
        s = cr.ScoreVector(np.array([0.7]))
        assert cr.fidelity(np.array([0.3]), np.array([0.6]), s) == pytest.approx(0.16)

    def test_zero_residuals(self):
        s = cr.ScoreVector(np.array([0.2, 0.9]))
        assert cr.fidelity(s.values.copy(), np.array([0.5, 1.0]), s) == 0.0

    def test_two_node(self):
        s = cr.ScoreVector(np.array([1.0, 0.0]))
        val = cr.fidelity(np.array([0.5, 0.0]), np.array([1.0, 1.0]), s)
        assert val == pytest.approx(0.125)  # (0.25 + 0) / 2

    def test_degenerate_weights(self):
        s = cr.ScoreVector(np.array([0.5]))
        with pytest.raises(cr.DegenerateWeights):
            cr.fidelity(np.array([0.5]), np.array([0.0]), s)


class TestPenalty:
    def test_satisfied_chain(self, chain2):
        assert cr.penalty(np.array([0.2, 0.9]), chain2, 1.0, 10.0) == 0.0

    def test_unit_violation(self, chain2):
        assert cr.penalty(np.array([1.0, 0.0]), chain2, 1.0, 10.0) == pytest.approx(1.0)

    def test_edgeless(self, edgeless3):
        assert cr.penalty(np.array([1.0, 1.0, 1.0]), edgeless3, 100.0, 10.0) == 0.0

    def test_scales_with_mu(self, chain2):
        y = np.array([0.9, 0.1])
        assert cr.penalty(y, chain2, 50.0, 10.0) == pytest.approx(50 * cr.penalty(y, chain2, 1.0, 10.0))


class TestObjective:
    def test_exact_fit_no_edges(self, edgeless3):
        s = cr.ScoreVector(np.full(3, 0.5))
        p = cr.LatentPoint(np.zeros(3), np.array([0.3, -0.2, 1.0]))
        part = cr.ConfidencePartition(3)
        assert cr.objective(p, s, edgeless3, part, CFG) == pytest.approx(0.0, abs=1e-15)

    def test_single_key_node(self):
        g = cr.build_graph(["a"], [])
        part = cr.ConfidencePartition(1, key_set={0})
        p = cr.LatentPoint(np.zeros(1), np.zeros(0))
        val = cr.objective(p, cr.ScoreVector(np.array([1.0])), g, part, CFG)
        assert val == pytest.approx(0.25)

    @given(latent_strategy(3, 3))
    def test_nonnegative(self, p):
        g = cr.build_graph(["a", "b", "c"], [("a", "b"), ("b", "c")])
        s = cr.ScoreVector(np.array([0.1, 0.8, 0.4]))
        part = cr.ConfidencePartition(3)
        assert cr.objective(p, s, g, part, CFG) >= 0.0

    def test_equals_fidelity_when_hinges_inactive(self, chain2):
        part = cr.ConfidencePartition(2)
        p = cr.LatentPoint(np.array([-2.0, 2.0]), np.zeros(2))
        s = cr.ScoreVector(np.array([0.3, 0.6]))
        y, alpha = cr.map_latent(p, part, CFG.alpha_floor)
        assert cr.objective(p, s, chain2, part, CFG) == pytest.approx(cr.fidelity(y, alpha, s))

    def test_dimension_mismatch(self, chain2):
        part = cr.ConfidencePartition(2)
        p = cr.LatentPoint(np.zeros(3), np.zeros(2))
        with pytest.raises(cr.DimensionMismatch):
            cr.objective(p, cr.ScoreVector(np.zeros(2)), chain2, part, CFG)


class TestGradient:
    def test_zero_at_exact_fit(self, edgeless3):
        s = cr.ScoreVector(np.full(3, 0.5))
        p = cr.LatentPoint(np.zeros(3), np.zeros(3))
        g = cr.gradient(p, s, edgeless3, cr.ConfidencePartition(3), CFG)
        assert np.allclose(g.score_logits, 0.0, atol=1e-15)
        assert np.allclose(g.confidence_logits, 0.0, atol=1e-15)

    def test_single_node_hand_value(self):
        # 2 * alpha * (y - s) / sum(alpha) * y(1-y) = 2*(0.5-1)*0.25
        g = cr.build_graph(["a"], [])
        part = cr.ConfidencePartition(1, key_set={0})
        p = cr.LatentPoint(np.zeros(1), np.zeros(0))
        grad = cr.gradient(p, cr.ScoreVector(np.array([1.0])), g, part, CFG)
        assert grad.score_logits[0] == pytest.approx(-0.25)

    @given(st.integers(0, 2 ** 32 - 1))
    def test_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        g, s, part, p = cr.gradcheck.random_instance(rng, max_nodes=12)
        analytic = cr.gradient(p, s, g, part, CFG)
        numeric = cr.finite_difference_gradient(p, s, g, part, CFG)
        err = cr.gradcheck.relative_errors(analytic, numeric)
        assert err.max(initial=0.0) < 1e-5


class TestGdStep:
    def test_zero_gradient_fixed_point(self):
        p = cr.LatentPoint(np.array([1.0, -2.0]), np.array([0.5]))
        q = cr.gd_step(p, cr.LatentPoint(np.zeros(2), np.zeros(1)), 0.1)
        assert np.array_equal(q.score_logits, p.score_logits)
        assert np.array_equal(q.confidence_logits, p.confidence_logits)

    def test_zero_step(self):
        p = cr.LatentPoint(np.array([1.0]), np.array([2.0]))
        q = cr.gd_step(p, cr.LatentPoint(np.array([3.0]), np.array([4.0])), 0.0)
        assert q.score_logits[0] == 1.0 and q.confidence_logits[0] == 2.0

    def test_arithmetic(self):
        p = cr.LatentPoint(np.array([1.0]), np.zeros(0))
        q = cr.gd_step(p, cr.LatentPoint(np.array([2.0]), np.zeros(0)), 0.1)
        assert q.score_logits[0] == pytest.approx(0.8)


class TestHardConstraints:
    def test_satisfied(self, chain2):
        assert cr.check_hard_constraints(np.array([0.2, 0.9]), chain2) == []

    def test_violation_margin(self, chain2):
        report = cr.check_hard_constraints(np.array([1.0, 0.0]), chain2, tol=0.0)
        assert report == [(0, pytest.approx(1.0))]

    def test_leaves_never_reported(self, polytree22):
        y = np.ones(7)
        y[0] = 0.0
        report = cr.check_hard_constraints(y, polytree22)
        reported = {i for i, _ in report}
        leaves = {i for i in range(7) if not polytree22.neighbor_sets[i]}
        assert reported.isdisjoint(leaves)

    def test_tolerance(self, chain2):
        assert cr.check_hard_constraints(np.array([0.55, 0.5]), chain2, tol=0.1) == []


class TestScoreVector:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            cr.ScoreVector(np.array([1.2]))
        with pytest.raises(ValueError):
            cr.ScoreVector(np.array([-0.1]))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            cr.ScoreVector(np.array([np.nan]))
