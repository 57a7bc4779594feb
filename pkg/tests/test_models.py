"""Tests for the drive models and their geometry."""

import math

import numpy as np
import pytest

from superlz.errors import DomainError, InvalidArgumentError
from superlz.models import (
    DKModel,
    GenLZModel,
    GenLZParams,
    SLModel,
    StandardLZModel,
    dk_field,
    dk_fit_from_gen_lz,
    dynamic_phase,
    gen_lz_eigvec,
    gen_lz_field,
    path_points,
    sl_field,
    sudden_limit_probability,
    theta,
    theta_bs,
    theta_extreme,
    theta_extremes,
    theta_rate_at_crossing,
)
from superlz.tls import StateVector, bloch_angle, eigensystem, hamiltonian_matrix, residual


def omega(delta0, rate, t):
    return math.sqrt(delta0 * delta0 + (rate * t) ** 2)


class TestGenLZParams:
    @pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (-1.0, 1.0, 1.0), (1.0, -0.1, 0.0),
                                      (float("nan"), 1.0, 1.0), (1.0, 1.0, float("inf"))])
    def test_invalid(self, args):
        with pytest.raises(InvalidArgumentError):
            GenLZParams(*args)

    def test_negative_beta_allowed(self):
        assert GenLZParams(1.0, 5.0, -3.0).beta == -3.0

    def test_scaled_and_swapped(self):
        p = GenLZParams(1.0, 5.0, 2.0)
        assert p.scaled(2.0) == GenLZParams(2.0, 20.0, 8.0)
        assert p.swapped() == GenLZParams(1.0, 2.0, 5.0)


class TestGenLZField:
    @pytest.mark.parametrize("t", [-7.0, -0.3, 0.0, 0.5, 40.0])
    def test_standard_lz_line(self, t):
        f = gen_lz_field(GenLZParams(1.0, 2.0, 0.0), t)
        assert f.x == pytest.approx(0.5, rel=1e-14)
        assert f.z == pytest.approx(t, rel=1e-14, abs=1e-15)
        assert f.y == 0.0

    @pytest.mark.parametrize("t", [-3.0, 0.0, 0.1, 2.0, 1e4])
    def test_back_and_forth_path(self, t):
        f = gen_lz_field(GenLZParams(1.0, 3.0, 3.0), t)
        assert f.z == 0.0
        assert f.x == pytest.approx(omega(1.0, 3.0, t) / 2, rel=1e-13)

    def test_crossing_point(self):
        f = gen_lz_field(GenLZParams(1.0, 3.0, 1.0), 0.0)
        assert (f.x, f.z) == (0.5, 0.0)

    def test_magnitude_is_half_lz_gap(self):
        rng = np.random.default_rng(7)
        for t, beta in zip(rng.uniform(-1e3, 1e3, 300), rng.uniform(-50, 50, 300)):
            f = gen_lz_field(GenLZParams(1.0, 5.0, float(beta)), float(t))
            assert f.magnitude == pytest.approx(omega(1.0, 5.0, t) / 2, rel=1e-12)

    def test_spectrum_independent_of_beta(self):
        rng = np.random.default_rng(1)
        ts = rng.uniform(-20, 20, 20)
        betas = rng.uniform(-20, 20, 20)
        for t in ts:
            expected = omega(1.0, 5.0, t) / 2
            for beta in betas:
                es = eigensystem(gen_lz_field(GenLZParams(1.0, 5.0, float(beta)), float(t)))
                assert es.e_plus == pytest.approx(expected, rel=1e-12)
                assert es.e_minus == pytest.approx(-expected, rel=1e-12)

    def test_large_time_is_cancellation_free(self):
        p = GenLZParams(1.0, 5.0, 4.999)
        f = gen_lz_field(p, 1e4)
        assert f.magnitude == pytest.approx(omega(1.0, 5.0, 1e4) / 2, rel=1e-13)
        assert math.tan(theta(p, 1e4)) == pytest.approx(f.z / f.x, rel=1e-10)

    def test_hyperbolic_path_inside_asymptotes(self):
        p = GenLZParams(1.0, 5.0, 2.0)
        bound = (25.0 - 4.0) / 20.0 + 1e-9
        for t in np.linspace(-100, 100, 2001):
            f = gen_lz_field(p, float(t))
            assert f.x > 0.0
            assert abs(f.z / f.x) <= bound

    def test_antisymmetry(self):
        p = GenLZParams(1.3, 4.0, -2.5)
        for t in (0.1, 1.7, 33.0):
            plus, minus = gen_lz_field(p, t), gen_lz_field(p, -t)
            assert minus.z == -plus.z
            assert minus.x == plus.x
            assert theta(p, -t) == -theta(p, t)

    @pytest.mark.parametrize("s", [0.5, 2.0, 10.0])
    def test_scaling_covariance(self, s):
        p = GenLZParams(1.0, 5.0, 2.0)
        for t in (-3.0, 0.4, 12.0):
            scaled = gen_lz_field(p.scaled(s), t / s)
            base = gen_lz_field(p, t).scaled(s)
            assert scaled.x == pytest.approx(base.x, rel=1e-12)
            assert scaled.z == pytest.approx(base.z, rel=1e-12, abs=1e-300)

    def test_path_points(self):
        pts = path_points(GenLZParams(1.0, 2.0, 0.0), [-1.0, 0.0, 1.0])
        np.testing.assert_allclose(pts, [[0.5, -1.0], [0.5, 0.0], [0.5, 1.0]])


class TestGenLZEigvec:
    def test_crossing_ground_state(self):
        v = gen_lz_eigvec(GenLZParams(1.0, 3.0, 1.0), 0.0, "-")
        s = 1 / math.sqrt(2)
        assert v.a0 == pytest.approx(s)
        assert v.a1 == pytest.approx(s)

    def test_crossing_excited_state(self):
        v = gen_lz_eigvec(GenLZParams(1.0, 3.0, 1.0), 0.0, "+")
        target = StateVector(-1 / math.sqrt(2) + 0j, 1 / math.sqrt(2) + 0j)
        assert abs(target.inner(v)) == pytest.approx(1.0, rel=1e-14)

    def test_residual_example(self):
        p = GenLZParams(1.0, 2.0, 1.0)
        f = gen_lz_field(p, 5.0)
        e = omega(1.0, 2.0, 5.0) / 2
        assert residual(f, -e, gen_lz_eigvec(p, 5.0, "-")) < 1e-12
        assert residual(f, e, gen_lz_eigvec(p, 5.0, "+")) < 1e-12

    def test_residual_random(self):
        rng = np.random.default_rng(5)
        for t, alpha, beta in zip(rng.uniform(-1e3, 1e3, 200), rng.uniform(0, 20, 200),
                                  rng.uniform(-20, 20, 200)):
            p = GenLZParams(0.7, float(alpha), float(beta))
            f = gen_lz_field(p, float(t))
            e = f.magnitude
            h = hamiltonian_matrix(f)
            for branch, energy in (("-", -e), ("+", e)):
                v = gen_lz_eigvec(p, float(t), branch).as_array()
                assert np.linalg.norm(h @ v - energy * v) / e < 1e-12

    def test_matches_analytic_diagonalization_up_to_phase(self):
        p = GenLZParams(1.0, 5.0, -1.5)
        es = eigensystem(gen_lz_field(p, 2.5))
        assert abs(es.v_minus.inner(gen_lz_eigvec(p, 2.5, "-"))) == pytest.approx(1.0, rel=1e-13)
        assert abs(es.v_plus.inner(gen_lz_eigvec(p, 2.5, "+"))) == pytest.approx(1.0, rel=1e-13)

    def test_bad_branch(self):
        with pytest.raises(InvalidArgumentError):
            gen_lz_eigvec(GenLZParams(1.0, 1.0, 1.0), 0.0, "up")


class TestTheta:
    def test_zero_at_crossing(self):
        assert theta(GenLZParams(1.0, 5.0, 2.0), 0.0) == 0.0

    @pytest.mark.parametrize("alpha,beta", [(5.0, 2.0), (5.0, 7.0), (1.0, 3.0)])
    def test_limits_positive_beta(self, alpha, beta):
        p = GenLZParams(1.0, alpha, beta)
        expected = math.atan((alpha ** 2 - beta ** 2) / (2 * alpha * beta))
        assert theta_extreme(p) == pytest.approx(expected)
        assert theta(p, 1e6) == pytest.approx(expected, abs=1e-9)
        assert theta(p, -1e6) == pytest.approx(-expected, abs=1e-9)

    @pytest.mark.parametrize("beta", [0.0, -1.0, -10.0])
    def test_limits_non_positive_beta(self, beta):
        p = GenLZParams(1.0, 5.0, beta)
        assert theta_extreme(p) == math.pi / 2
        assert theta(p, 1e8) == pytest.approx(math.pi / 2, abs=1e-8)
        assert theta_extremes(p) == (-math.pi / 2, math.pi / 2)

    def test_limit_for_zero_alpha(self):
        p = GenLZParams(1.0, 0.0, 5.0)
        assert theta_extreme(p) == -math.pi / 2
        assert theta(p, 1e8) == pytest.approx(-math.pi / 2, abs=1e-8)

    def test_consistent_with_bloch_angle(self):
        rng = np.random.default_rng(9)
        for t, beta in zip(rng.uniform(-100, 100, 200), rng.uniform(-20, 20, 200)):
            p = GenLZParams(1.0, 5.0, float(beta))
            assert theta(p, float(t)) == pytest.approx(bloch_angle(gen_lz_field(p, float(t))), abs=1e-12)

    def test_interchange_flips_sign(self):
        p = GenLZParams(1.0, 5.0, 2.0)
        for t in (-4.0, 0.3, 9.0):
            assert theta(p, t) == pytest.approx(-theta(p.swapped(), t), abs=1e-14)

    def test_bloch_sphere_angle(self):
        p = GenLZParams(1.0, 5.0, 2.0)
        assert theta_bs(p, 0.7) == pytest.approx(math.pi / 2 - theta(p, 0.7))


class TestThetaRate:
    @pytest.mark.parametrize("args,expected", [((1.0, 5.0, 5.0), 0.0), ((1.0, 5.0, 0.0), 5.0),
                                               ((2.0, 5.0, 1.0), 2.0)])
    def test_examples(self, args, expected):
        assert theta_rate_at_crossing(GenLZParams(*args)) == expected

    @pytest.mark.parametrize("args", [(1.0, 5.0, 0.0), (2.0, 5.0, 1.0), (1.0, 3.0, 1.5),
                                      (1.0, 5.0, -2.0), (1.0, 5.0, 5.0)])
    def test_matches_finite_difference(self, args):
        p = GenLZParams(*args)
        h = 1e-5
        numeric = (theta(p, h) - theta(p, -h)) / (2 * h)
        assert numeric == pytest.approx(theta_rate_at_crossing(p), rel=1e-8, abs=1e-12)

    def test_model_theta_rate(self):
        model = GenLZModel(GenLZParams(1.0, 5.0, 2.0))
        assert model.theta_rate(0.0) == pytest.approx(3.0, rel=1e-6)


class TestDemkovKunike:
    def test_field(self):
        assert dk_field(1.0, 1.0, 0.5, 0.0).as_tuple() == (0.5, 0.0, 0.0)
        assert dk_field(2.0, 1.0, 0.5, 100.0).z == pytest.approx(2.0)
        assert dk_field(1.0, 1.0, 1.0, 1.0).z == pytest.approx(0.76159, abs=1e-5)

    def test_bad_rate(self):
        with pytest.raises(InvalidArgumentError):
            dk_field(1.0, 0.0, 1.0, 0.0)

    def test_fit_examples(self):
        assert dk_fit_from_gen_lz(GenLZParams(1.0, 5.0, 5.0)) == (0.0, 5.0)
        a, b = dk_fit_from_gen_lz(GenLZParams(1.0, 5.0, 1.0))
        assert a == pytest.approx(2.4)
        assert b == pytest.approx(5.0 / 3.0)
        assert a * b == pytest.approx(4.0)

    @pytest.mark.parametrize("delta0", [0.5, 1.0, 2.0])
    def test_fit_matches_rate_and_limit(self, delta0):
        p = GenLZParams(delta0, 5.0, 2.0)
        a, b = dk_fit_from_gen_lz(p)
        assert (a / delta0) * b == pytest.approx(theta_rate_at_crossing(p))
        assert math.atan(a / delta0) == pytest.approx(theta_extreme(p))
        assert DKModel(a, b, delta0).theta_limit() == pytest.approx(theta_extreme(p))

    @pytest.mark.parametrize("beta", [0.0, -1.0])
    def test_fit_domain(self, beta):
        with pytest.raises(DomainError):
            dk_fit_from_gen_lz(GenLZParams(1.0, 5.0, beta))

    def test_fit_needs_positive_alpha(self):
        with pytest.raises(DomainError):
            dk_fit_from_gen_lz(GenLZParams(1.0, 0.0, 5.0))


class TestSuperlinear:
    def test_linear_at_zero_beta(self):
        assert sl_field(GenLZParams(1.0, 5.0, 0.0), 0.3).z == pytest.approx(1.5)

    def test_crossing(self):
        assert sl_field(GenLZParams(1.0, 5.0, -2.0), 0.0).as_tuple() == (1.0, 0.0, 0.0)

    def test_example(self):
        assert sl_field(GenLZParams(1.0, 1.0, -1.0), 2.0).z == pytest.approx(4 * math.sqrt(5))

    def test_positive_beta_rejected(self):
        with pytest.raises(DomainError):
            sl_field(GenLZParams(1.0, 5.0, 0.5), 1.0)
        with pytest.raises(DomainError):
            SLModel(GenLZParams(1.0, 5.0, 0.5))


class TestDiagnostics:
    def test_sudden_limit(self):
        assert sudden_limit_probability(GenLZParams(1.0, 5.0, 5.0)) == pytest.approx(0.0, abs=1e-30)
        assert sudden_limit_probability(GenLZParams(1.0, 5.0, 0.0)) == pytest.approx(1.0)
        assert sudden_limit_probability(GenLZParams(1.0, 5.0, 10.0)) == pytest.approx(0.36)

    def test_dynamic_phase_derivative_is_gap(self):
        p = GenLZParams(1.0, 5.0, 2.0)
        for t in (-3.0, 0.0, 0.8, 20.0):
            h = 1e-6
            numeric = (dynamic_phase(p, t + h) - dynamic_phase(p, t - h)) / (2 * h)
            assert numeric == pytest.approx(omega(1.0, 5.0, t), rel=1e-7)

    def test_dynamic_phase_constant_gap(self):
        assert dynamic_phase(GenLZParams(2.0, 0.0, 3.0), 1.5) == 3.0


class TestDriveModels:
    def test_in_plane(self):
        models = [
            GenLZModel(GenLZParams(1.0, 5.0, 2.0)),
            StandardLZModel(1.0, 5.0),
            DKModel(2.4, 5.0 / 3.0, 1.0),
            SLModel(GenLZParams(1.0, 5.0, -2.0)),
        ]
        for model in models:
            for t in (-2.0, 0.0, 3.0):
                assert model.field(t).y == 0.0
            assert model.window(4.0) == (-4.0, 4.0)

    def test_kinds(self):
        assert GenLZModel(GenLZParams(1.0, 1.0, 1.0)).kind == "generalized-lz"
        assert StandardLZModel(1.0, 1.0).kind == "standard-lz"
        assert DKModel(0.0, 1.0, 1.0).kind == "demkov-kunike"
        assert SLModel(GenLZParams(1.0, 1.0, 0.0)).kind == "superlinear"

    def test_standard_lz_matches_beta_zero(self):
        gen = GenLZModel(GenLZParams(1.0, 5.0, 0.0))
        std = StandardLZModel(1.0, 5.0)
        for t in (-1.0, 0.2, 7.0):
            assert gen.field(t).x == pytest.approx(std.field(t).x)
            assert gen.field(t).z == pytest.approx(std.field(t).z)

    def test_eigenbasis_and_gap(self):
        model = GenLZModel(GenLZParams(1.0, 5.0, -1.0))
        assert model.gap(2.0) == pytest.approx(omega(1.0, 5.0, 2.0))
        assert model.eigenbasis(2.0).gap == pytest.approx(omega(1.0, 5.0, 2.0))

    def test_describe(self):
        assert GenLZModel(GenLZParams(1.0, 5.0, 2.0)).describe() == {
            "kind": "generalized-lz", "delta0": 1.0, "alpha": 5.0, "beta": 2.0}
