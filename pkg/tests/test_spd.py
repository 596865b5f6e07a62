import math

import numpy as np
import pytest

from symmflow import spd
from symmflow.core import DexpinvSeries, cssi_step, lts_axiom_residuals
from symmflow.errors import (
    DimensionMismatch,
    NonPositiveDefinite,
    SymmetryViolation,
)
from symmflow.linalg import mat_exp, spd_sqrt, symmetrize
from symmflow.tableau import builtin_tableau


def double_bracket_field(target):
    def field(y):
        inner = y @ target - target @ y
        return y @ inner - inner @ y

    return field


class TestQuadratic:
    def test_identity_action(self):
        y = np.diag([2.0, 3.0])
        assert np.array_equal(spd.quadratic(np.eye(2), y), y)

    def test_scalar_case(self):
        assert spd.quadratic(np.diag([2.0]), np.eye(1))[0, 0] == 4.0

    def test_round_trip_with_sqrt(self):
        rng = np.random.default_rng(60)
        y = spd.random_spd(rng, 4)
        assert np.max(np.abs(spd.quadratic(spd_sqrt(y), np.eye(4)) - y)) <= 1e-11

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            spd.quadratic(np.eye(2), np.eye(3))


class TestTripleAndAd2:
    def test_commuting_arguments_vanish(self):
        v = np.diag([1.0, 2.0])
        w = np.diag([3.0, 4.0])
        z = spd.random_sym(np.random.default_rng(61), 2)
        assert np.max(np.abs(spd.triple(v, w, z))) == 0.0

    def test_alternating(self):
        rng = np.random.default_rng(62)
        v = spd.random_sym(rng, 3)
        z = spd.random_sym(rng, 3)
        assert np.max(np.abs(spd.triple(v, v, z))) == 0.0

    def test_ad2_hand_case(self):
        # theta = [[0,1],[1,0]], w = diag(1,-1): [[w,theta],theta] = 4w.
        theta = np.array([[0.0, 1.0], [1.0, 0.0]])
        w = np.diag([1.0, -1.0])
        assert np.array_equal(spd.ad2(theta, w), w)

    def test_ad2_diagonal_pair_vanishes(self):
        assert np.max(np.abs(spd.ad2(np.diag([1.0, 2.0]), np.diag([3.0, 5.0])))) == 0.0

    def test_ad2_linear_in_w(self):
        rng = np.random.default_rng(63)
        theta = spd.random_sym(rng, 4)
        w1 = spd.random_sym(rng, 4)
        w2 = spd.random_sym(rng, 4)
        lhs = spd.ad2(theta, 2.0 * w1 + 3.0 * w2)
        rhs = 2.0 * spd.ad2(theta, w1) + 3.0 * spd.ad2(theta, w2)
        assert np.max(np.abs(lhs - rhs)) <= 1e-13

    def test_result_symmetric(self):
        rng = np.random.default_rng(64)
        v, w, z = (spd.random_sym(rng, 4) for _ in range(3))
        out = spd.triple(v, w, z)
        assert np.max(np.abs(out - out.T)) <= 1e-15

    def test_lts_axioms(self):
        rng = np.random.default_rng(65)
        for _ in range(25):
            args = [spd.random_sym(rng, 4) for _ in range(5)]
            assert all(r <= 1e-12 for r in lts_axiom_residuals(spd.triple, *args))


class TestSqrtUpdate:
    def test_identity(self):
        assert np.max(np.abs(spd.spd_sqrt_update(np.eye(3)) - np.eye(3))) < 1e-14

    def test_known_rotation_case(self):
        c, s = math.cos(0.6), math.sin(0.6)
        q = np.array([[c, -s], [s, c]])
        y = q @ np.diag([4.0, 1.0]) @ q.T
        expected = q @ np.diag([2.0, 1.0]) @ q.T
        assert np.max(np.abs(spd.spd_sqrt_update(y) - expected)) <= 1e-12

    def test_squares_back(self):
        rng = np.random.default_rng(66)
        y = spd.random_spd(rng, 5)
        root = spd.spd_sqrt_update(y)
        assert np.max(np.abs(root @ root - y)) <= 1e-11 * np.max(np.abs(y))
        assert np.min(np.linalg.eigvalsh(root)) > 0


class TestCsgiStep:
    def test_zero_field_fixed_point(self):
        rng = np.random.default_rng(67)
        y = spd.random_spd(rng, 3)
        out, _ = spd.csgi_step(
            builtin_tableau("rk4"), lambda p: np.zeros_like(p), y, 0.5
        )
        assert np.max(np.abs(out - y)) <= 1e-12

    def test_constant_field_euler_closed_form(self):
        out, _ = spd.csgi_step(
            builtin_tableau("euler"), lambda p: np.eye(2), np.eye(2), 0.3
        )
        assert np.max(np.abs(out - math.exp(0.3) * np.eye(2))) <= 1e-13

    def test_double_bracket_isospectral_and_symmetric(self):
        rng = np.random.default_rng(68)
        y0 = spd.random_spd(rng, 3)
        field = double_bracket_field(np.diag([1.0, 2.0, 3.0]))
        trajectory, records = spd.csgi_integrate(
            builtin_tableau("rk4"), field, y0, 0.01, 100
        )
        assert max(r.residual for r in records) <= 1e-12
        drift = np.max(
            np.abs(np.linalg.eigvalsh(trajectory[-1]) - np.linalg.eigvalsh(y0))
        )
        assert drift <= 1e-8
        assert min(np.linalg.eigvalsh(p).min() for p in trajectory[::10]) > 0.0

    def test_non_symmetric_field_rejected(self):
        bad = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(SymmetryViolation):
            spd.csgi_step(builtin_tableau("euler"), lambda p: bad, np.eye(2), 0.1)

    def test_non_spd_point_rejected(self):
        with pytest.raises(NonPositiveDefinite):
            spd.csgi_step(
                builtin_tableau("euler"),
                lambda p: np.zeros_like(p),
                np.diag([1.0, -0.5]),
                0.1,
            )

    def test_truncation_gap_scales_with_fifth_power(self):
        # 1-term vs 3-term corrections differ at x^2 K; with K and theta
        # both proportional to h the gap scales like h^5.
        rng = np.random.default_rng(69)
        theta_dir = spd.random_sym(rng, 3)
        w_dir = spd.random_sym(rng, 3)

        def gap(scale):
            theta = scale * theta_dir
            w = scale * w_dir
            ad2 = lambda x: spd.ad2(theta, x)
            from symmflow.core import dexpinv_series_apply

            a = dexpinv_series_apply(DexpinvSeries.with_terms(1), ad2, w)
            b = dexpinv_series_apply(DexpinvSeries.with_terms(3), ad2, w)
            return float(np.max(np.abs(a - b)))

        ratio = gap(0.2) / gap(0.1)
        assert 25.6 <= ratio <= 38.4

    def test_implicit_midpoint_converges_second_order(self):
        field = lambda p: np.eye(2)
        y0 = symmetrize(np.array([[2.0, 0.5], [0.5, 1.0]]))
        t = builtin_tableau("implicit_midpoint")
        errors = []
        for h in (0.1, 0.05):
            trajectory, records = spd.csgi_integrate(
                t, field, y0, h, round(1.0 / h)
            )
            assert all(r.fixed_point_iterations > 0 for r in records)
            errors.append(np.max(np.abs(trajectory[-1] - (y0 + np.eye(2)))))
        assert 3.0 <= errors[0] / errors[1] <= 5.0


class TestSqrtModes:
    def test_polar_update_agrees_with_recompute(self):
        rng = np.random.default_rng(70)
        y0 = spd.random_spd(rng, 3)
        field = double_bracket_field(np.diag([1.0, 2.0, 3.0]))
        t = builtin_tableau("rk4")
        via_recompute, _ = spd.csgi_integrate(t, field, y0, 0.02, 50)
        via_polar, _ = spd.csgi_integrate(
            t, field, y0, 0.02, 50, sqrt_mode="polar", diagnostics=True
        )
        assert np.max(np.abs(via_recompute[-1] - via_polar[-1])) <= 1e-10

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            spd.csgi_integrate(
                builtin_tableau("rk4"),
                lambda p: np.zeros_like(p),
                np.eye(2),
                0.1,
                1,
                sqrt_mode="newton",
            )


class TestRebasedContract:
    def test_generic_step_matches_fixed_base_step(self):
        rng = np.random.default_rng(71)
        y = spd.random_spd(rng, 3)
        field = double_bracket_field(np.diag([1.0, 2.0, 3.0]))
        t = builtin_tableau("rk4")
        for _ in range(10):
            via_generic, _ = cssi_step(spd.SPD, t, field, y, 0.01, dexpinv_terms=2)
            via_fixed, _ = spd.csgi_step(
                t, field, y, 0.01, series=DexpinvSeries.with_terms(2)
            )
            assert np.max(np.abs(via_generic - via_fixed)) <= 1e-10
            y = via_fixed

    def test_exp_at_identity_is_matrix_exponential(self):
        rng = np.random.default_rng(72)
        v = spd.random_sym(rng, 3)
        assert np.max(np.abs(spd.SPD.exp_at(np.eye(3), v) - mat_exp(v))) <= 1e-12

    def test_triple_at_identity_reduces_to_commutators(self):
        rng = np.random.default_rng(73)
        u, v, w = (spd.random_sym(rng, 3) for _ in range(3))
        gap = np.max(np.abs(spd.SPD.triple(np.eye(3), u, v, w) - spd.triple(u, v, w)))
        assert gap <= 1e-12
