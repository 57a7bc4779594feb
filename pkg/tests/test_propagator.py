"""Tests for the Schrodinger propagator."""

import math
from dataclasses import replace

import numpy as np
import pytest

from superlz.analytics import dk_probability, lz_probability, sl_probability
from superlz.errors import DegenerateBasisError, InvalidArgumentError, NonConvergenceError
from superlz.models import DriveModel, GenLZModel, GenLZParams, StandardLZModel, theta_extreme
from superlz.propagator import (
    TOLERANCE_FLOOR,
    PropagationConfig,
    _rotation,
    auto_t0,
    overlap_amplitudes,
    propagate,
    propagate_autoconverge,
    propagate_fixed_step,
    reference_probability,
)
from superlz.tls import FieldVector, eigensystem


class RotatingFieldModel(DriveModel):
    """Unit field turning in the xz plane at angular rate ``omega``.

    In the co-rotating frame the Hamiltonian is constant, so
    P = (w/2)^2 / (1 + (w/2)^2) * sin^2(sqrt(1 + (w/2)^2) * T) over a window T.
    """

    kind = "rotating"

    def __init__(self, omega=1.0):
        self.omega = omega

    def field(self, t):
        return FieldVector(math.cos(self.omega * t), 0.0, math.sin(self.omega * t))

    def exact_probability(self, t0):
        c = 0.5 * self.omega
        w = math.sqrt(1.0 + c * c)
        return c * c / (w * w) * math.sin(w * 2.0 * t0) ** 2


class FixedWindowModel(RotatingFieldModel):
    def fixed_window(self):
        return (0.0, 3.0)


class TestPropagationConfig:
    @pytest.mark.parametrize("kwargs", [
        {"rel_tol": 0.0}, {"abs_tol": 0.1}, {"conv_tol": -1e-4}, {"t0": -1.0},
        {"t0": float("inf")}, {"method": "euler"}, {"hbar": 0.0}, {"max_steps": 0},
        {"max_phase_per_step": 0.0}, {"theta_tol": 0.0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            PropagationConfig(**kwargs)

    def test_dict_round_trip(self):
        cfg = PropagationConfig(t0=12.0, method="dop853", conv_tol=1e-5)
        assert PropagationConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_key(self):
        with pytest.raises(InvalidArgumentError, match="bogus"):
            PropagationConfig.from_dict({"bogus": 1})

    def test_tightened(self):
        cfg = PropagationConfig(rel_tol=1e-8, abs_tol=1e-12).tightened()
        assert cfg.rel_tol == pytest.approx(1e-9)
        assert cfg.abs_tol == TOLERANCE_FLOOR


class TestPrimitives:
    def test_rotation_is_unitary(self):
        rng = np.random.default_rng(2)
        for r, tau in zip(rng.normal(size=(50, 3)), rng.uniform(-3, 3, 50)):
            u = np.array(_rotation(tuple(r), tau)).reshape(2, 2)
            np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-14)
            assert np.linalg.det(u) == pytest.approx(1.0)

    def test_rotation_keeps_eigenstates(self):
        f = FieldVector(0.3, 0.0, -0.4)
        es = eigensystem(f)
        u = np.array(_rotation(f.as_tuple(), 2.0)).reshape(2, 2)
        out = u @ es.v_minus.as_array()
        # ground state energy -|r| picks up exp(+i |r| tau)
        np.testing.assert_allclose(out, np.exp(1j * 0.5 * 2.0) * es.v_minus.as_array(), atol=1e-15)

    def test_overlap_amplitudes(self):
        es = eigensystem(FieldVector(1.0, 0.0, 0.5))
        a, b = overlap_amplitudes(es.v_minus, es)
        assert abs(a) == pytest.approx(1.0)
        assert abs(b) == pytest.approx(0.0, abs=1e-15)

    def test_overlap_rejects_degenerate_basis(self):
        es = eigensystem(FieldVector(0.0))
        with pytest.raises(DegenerateBasisError):
            overlap_amplitudes(es.v_minus, es)


class TestAutoT0:
    def test_criterion_met(self):
        model = GenLZModel(GenLZParams(1.0, 5.0, 2.0))
        cfg = PropagationConfig()
        t0 = auto_t0(model, cfg)
        assert t0 > 1.0
        saturated = abs(model.theta(t0) - theta_extreme(model.params)) < cfg.theta_tol
        coupling = abs(model.theta_rate(t0)) / model.gap(t0) < cfg.coupling_tol
        assert saturated or coupling

    def test_static_angle_needs_no_window(self):
        assert auto_t0(GenLZModel(GenLZParams(1.0, 5.0, 5.0)), PropagationConfig()) == pytest.approx(1.0)

    def test_fixed_window(self):
        assert auto_t0(FixedWindowModel(), PropagationConfig()) == 1.5


class TestRotatingFieldOracle:
    @pytest.mark.parametrize("t0", [0.7, 2.0, 5.5])
    def test_magnus4(self, t0):
        model = RotatingFieldModel()
        res = propagate(model, PropagationConfig(t0=t0))
        assert res.p == pytest.approx(model.exact_probability(t0), abs=1e-7)
        assert res.norm_drift < 1e-12

    @pytest.mark.parametrize("method", ["rk45", "dop853"])
    def test_scipy(self, method):
        model = RotatingFieldModel(2.0)
        res = propagate(model, PropagationConfig(t0=3.0, method=method))
        assert res.method == method
        assert res.p == pytest.approx(model.exact_probability(3.0), abs=1e-7)

    def test_midpoint(self):
        model = RotatingFieldModel()
        res = propagate(model, PropagationConfig(t0=2.0, method="midpoint"))
        assert res.p == pytest.approx(model.exact_probability(2.0), abs=1e-4)
        assert len(res.p_sequence) >= 2

    def test_fixed_step_converges(self):
        model = RotatingFieldModel()
        exact = model.exact_probability(2.0)
        coarse = abs(propagate_fixed_step(model, 2.0, 64).p - exact)
        fine = abs(propagate_fixed_step(model, 2.0, 1024).p - exact)
        assert fine < coarse
        assert fine < 1e-4

    def test_fixed_step_rejects_zero_steps(self):
        with pytest.raises(InvalidArgumentError):
            propagate_fixed_step(RotatingFieldModel(), 1.0, 0)

    def test_reference_probability(self):
        model = RotatingFieldModel()
        res = reference_probability(model, 1.0, tol=1e-7)
        assert res.p == pytest.approx(model.exact_probability(1.0), abs=1e-6)

    def test_recorded_trajectory(self):
        model = RotatingFieldModel()
        res = propagate(model, PropagationConfig(t0=1.5), record=True)
        first, last = res.trajectory[0], res.trajectory[-1]
        assert first[0] == -1.5
        assert first[3] == pytest.approx(0.0, abs=1e-15)
        assert last[0] == 1.5
        assert last[3] == pytest.approx(res.p, abs=1e-12)
        assert len(res.trajectory) == res.steps + 1

    def test_step_budget(self):
        with pytest.raises(NonConvergenceError) as info:
            propagate(RotatingFieldModel(), PropagationConfig(t0=50.0, max_steps=5))
        assert info.value.partial is not None
        assert not info.value.partial.converged

    def test_autoconverge_reports_sequence_on_failure(self):
        cfg = PropagationConfig(t0=1.0, max_doublings=2)
        with pytest.raises(NonConvergenceError) as info:
            propagate_autoconverge(RotatingFieldModel(), cfg)
        assert len(info.value.p_sequence) == 3
        assert not info.value.partial.converged

    def test_fixed_window_is_not_doubled(self):
        model = FixedWindowModel()
        res = propagate_autoconverge(model, PropagationConfig())
        assert res.converged
        assert res.t0_used == 1.5
        assert res.p == pytest.approx(model.exact_probability(1.5), abs=1e-7)


class TestGeneralizedLZ:
    @pytest.mark.parametrize("model", [StandardLZModel(1.0, 5.0), GenLZModel(GenLZParams(1.0, 5.0, 0.0))],
                             ids=["standard", "beta0"])
    def test_lz_calibration(self, model):
        res = propagate_autoconverge(model, PropagationConfig())
        assert res.converged
        assert res.p == pytest.approx(lz_probability(1.0, 5.0), abs=1e-3)
        # the half-gap reading exp(-2 pi delta0^2 / alpha) is about 0.28
        assert abs(res.p - math.exp(-2.0 * math.pi / 5.0)) > 0.1
        assert res.norm_drift < 1e-9

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 5.0, 20.0])
    @pytest.mark.parametrize("delta0", [0.5, 1.0, 2.0])
    def test_static_angle_is_adiabatic(self, delta0, alpha):
        res = propagate_autoconverge(GenLZModel(GenLZParams(delta0, alpha, alpha)), PropagationConfig())
        assert res.p < 1e-6

    def test_reverse_matches_forward(self):
        model = GenLZModel(GenLZParams(1.0, 5.0, 2.0))
        cfg = PropagationConfig(t0=40.0)
        assert propagate(model, cfg, reverse=True).p == pytest.approx(propagate(model, cfg).p, abs=1e-6)

    @pytest.mark.parametrize("s", [0.5, 2.0, 10.0])
    def test_scaling_invariance(self, s):
        p = GenLZParams(1.0, 5.0, 2.0)
        cfg = PropagationConfig(conv_tol=1e-5)
        base = propagate_autoconverge(GenLZModel(p), cfg).p
        scaled = propagate_autoconverge(GenLZModel(p.scaled(s)), cfg).p
        assert scaled == pytest.approx(base, abs=2e-4)

    def test_integrators_agree(self):
        model = GenLZModel(GenLZParams(1.0, 5.0, 2.0))
        cfg = PropagationConfig(t0=10.0)
        reference = propagate(model, cfg).p
        assert propagate(model, replace(cfg, method="dop853")).p == pytest.approx(reference, abs=1e-6)

    @pytest.mark.parametrize("beta", [1.0, 2.5, 7.5])
    def test_superadiabatic_below_lz(self, beta):
        res = propagate_autoconverge(GenLZModel(GenLZParams(1.0, 5.0, beta)), PropagationConfig())
        assert res.p < lz_probability(1.0, 5.0)

    def test_negative_beta_above_lz(self):
        res = propagate_autoconverge(GenLZModel(GenLZParams(1.0, 5.0, -2.0)), PropagationConfig())
        assert res.p > lz_probability(1.0, 5.0)

    @pytest.mark.parametrize("beta", np.geomspace(2.0, 50.0, 6).tolist())
    def test_dk_estimate(self, beta):
        p = GenLZParams(1.0, 5.0, beta)
        res = propagate_autoconverge(GenLZModel(p), PropagationConfig())
        assert res.p == pytest.approx(dk_probability(p).p, abs=0.03)

    @pytest.mark.parametrize("beta", [0.5, 1.0])
    def test_dk_estimate_small_beta(self, beta):
        # the tanh fit misses by up to about 0.17 here
        p = GenLZParams(1.0, 5.0, beta)
        res = propagate_autoconverge(GenLZModel(p), PropagationConfig())
        assert res.p == pytest.approx(dk_probability(p).p, abs=0.2)

    def test_dk_breaks_down_at_tiny_ratio(self):
        p = GenLZParams(1.0, 5.0, 5e-5)
        res = propagate_autoconverge(GenLZModel(p), PropagationConfig())
        assert res.p == pytest.approx(lz_probability(1.0, 5.0), abs=5e-3)
        assert abs(res.p - dk_probability(p).p) > 0.1

    @pytest.mark.parametrize("beta", [0.0, -1.0, -2.0, -3.0, -4.0, -5.0])
    def test_sl_estimate(self, beta):
        # deviation grows with |beta| to about 0.09
        p = GenLZParams(1.0, 5.0, beta)
        res = propagate_autoconverge(GenLZModel(p), PropagationConfig())
        assert res.p == pytest.approx(sl_probability(p).p, abs=0.1)

    def test_constant_gap_matches_lz_of_beta(self):
        res = propagate_autoconverge(GenLZModel(GenLZParams(1.0, 0.0, 5.0)), PropagationConfig())
        assert res.p == pytest.approx(lz_probability(1.0, 5.0), abs=0.05)

    def test_result_dict(self):
        res = propagate(StandardLZModel(1.0, 5.0), PropagationConfig(t0=5.0))
        data = res.to_dict()
        assert data["p"] == res.p
        assert data["t0_used"] == 5.0
        assert len(data["amplitude_b"]) == 2
