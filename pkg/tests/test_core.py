import numpy as np
import pytest

from proxpoint.core import (
    LinearMap,
    Operator,
    Regularity,
    as_signal,
    check_class_t,
    check_firmly_nonexpansive,
    dot,
)
from proxpoint.catalog import Interval, halfspace_projector, soft_threshold, hard_threshold


class TestAsSignal:
    def test_valid(self):
        x = as_signal([1.0, 2.0, 3.0])
        assert x.dtype == np.float64
        assert x.shape == (3,)

    def test_rejects_matrix(self):
        with pytest.raises(ValueError):
            as_signal(np.zeros((2, 2)))

    def test_rejects_nan_and_inf(self):
        with pytest.raises(ValueError):
            as_signal([1.0, np.nan])
        with pytest.raises(ValueError):
            as_signal([np.inf, 0.0])

    def test_dim_check(self):
        with pytest.raises(ValueError):
            as_signal([1.0, 2.0], dim=3)


class TestDot:
    def test_orthogonal(self):
        assert dot(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_direct_evaluation(self):
        assert dot(np.array([1.0, 2.0]), np.array([3.0, 4.0])) == 11.0

    def test_positive_semidefinite(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.standard_normal(6)
            assert dot(x, x) >= 0.0

    def test_cauchy_schwarz(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            x = rng.standard_normal(5)
            y = rng.standard_normal(5)
            assert abs(dot(x, y)) <= np.linalg.norm(x) * np.linalg.norm(y) + 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            dot(np.zeros(2), np.zeros(3))


class TestCheckFirmlyNonexpansive:
    def test_identity_has_no_slack(self):
        report = check_firmly_nonexpansive(lambda x: x, dim=4, trials=500)
        assert report.passed
        assert report.worst_violation <= 0.0

    def test_soft_threshold_passes(self):
        omega = Interval.symmetric(1.0)
        report = check_firmly_nonexpansive(lambda x: soft_threshold(x, omega),
                                           dim=6, trials=2000)
        assert report.passed

    def test_hard_threshold_fails_with_witness(self):
        report = check_firmly_nonexpansive(lambda x: hard_threshold(x, 1.0),
                                           dim=1, trials=2000)
        assert not report.passed
        assert report.worst_violation > report.tol
        x, y = report.witness
        # the violating pair must straddle the jump at |xi| = 1
        assert (abs(x[0]) > 1.0) != (abs(y[0]) > 1.0)

    def test_report_records_seed(self):
        report = check_firmly_nonexpansive(lambda x: x, dim=2, trials=10, seed=123)
        assert report.seed == 123

    def test_custom_sampler(self):
        def sampler(rng):
            base = rng.standard_normal(3)
            return base, base + 0.01 * rng.standard_normal(3)
        report = check_firmly_nonexpansive(lambda x: 0.5 * x, dim=None,
                                           trials=100, sampler=sampler)
        assert report.passed

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            check_firmly_nonexpansive(lambda x: x, dim=2, trials=0)
        with pytest.raises(ValueError):
            check_firmly_nonexpansive(lambda x: x, dim=2, tol=0.0)
        with pytest.raises(ValueError):
            check_firmly_nonexpansive(lambda x: x)


class TestCheckClassT:
    def test_halfspace_projector_passes(self):
        proj = halfspace_projector(np.array([1.0, 0.0]), 1.0)
        inside = [np.array([0.0, 0.0]), np.array([1.0, -2.0]), np.array([-3.0, 5.0])]
        report = check_class_t(proj, inside, trials=500)
        assert report.passed

    def test_linear_subgradient_projector_passes(self):
        # level set of <x, a> - 1 with |a| = 1: the step equals the exact
        # halfspace projection
        a = np.array([0.6, 0.8])

        def op(x):
            fx = float(np.dot(x, a)) - 1.0
            return x - fx * a if fx > 0 else np.asarray(x, dtype=float)

        report = check_class_t(op, [np.array([0.6, 0.8]), np.zeros(2)], trials=500)
        assert report.passed

    def test_doubling_map_fails(self):
        report = check_class_t(lambda x: 2.0 * x, [np.zeros(3)], trials=200)
        assert not report.passed
        assert report.worst_violation > 0.0

    def test_unfixed_point_rejected(self):
        with pytest.raises(ValueError):
            check_class_t(lambda x: 2.0 * x, [np.ones(2)], trials=10)

    def test_firmly_nonexpansive_implies_class_t(self):
        omega = Interval.symmetric(1.0)
        op = lambda x: soft_threshold(x, omega)
        report = check_class_t(op, [np.zeros(4)], dim=4, trials=1000)
        assert report.passed


class TestLinearMap:
    def test_adjoint_identity(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((5, 9))
        lin = LinearMap.from_matrix(a)
        for _ in range(100):
            x = rng.standard_normal(9)
            y = rng.standard_normal(5)
            lhs = float(np.dot(lin.forward(x), y))
            rhs = float(np.dot(x, lin.adjoint(y)))
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    def test_norm_bound_is_true_upper_bound(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            a = rng.standard_normal((4, 7))
            lin = LinearMap.from_matrix(a)
            exact = np.linalg.norm(a, 2)
            assert lin.norm_bound >= exact
            assert lin.norm_bound <= exact * (1.0 + 1e-6)
            for _ in range(20):
                x = rng.standard_normal(7)
                assert np.linalg.norm(lin.forward(x)) <= lin.norm_bound * np.linalg.norm(x) * (1 + 1e-12)

    def test_zero_map_rejected(self):
        with pytest.raises(ValueError):
            LinearMap.from_matrix(np.zeros((3, 3)))

    def test_nonpositive_bound_rejected(self):
        with pytest.raises(ValueError):
            LinearMap(forward=lambda x: x, adjoint=lambda x: x, norm_bound=0.0,
                      dim_in=2, dim_out=2)


class TestOperator:
    def test_callable_and_metadata(self):
        op = Operator(lambda x: x + 1.0, Regularity.GENERAL, "shift")
        np.testing.assert_allclose(op(np.zeros(2)), np.ones(2))
        assert op.descriptor == "shift"
        assert op.regularity is Regularity.GENERAL
