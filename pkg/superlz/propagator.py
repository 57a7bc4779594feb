"""Time-dependent Schrodinger propagation of a driven two-level system.

The transition probability is the final population of the upper adiabatic
state, P = |<psi+(t_end)|Psi(t_end)>|^2, starting from the ground state at
the beginning of the window.

Methods:
    magnus4   adaptive commutator-free fourth-order exponential integrator
              (default). Every step is a product of two SU(2) rotations, so
              the norm is conserved up to rounding and norm_drift measures
              only accumulated rounding.
    rk45      scipy solve_ivp (Dormand-Prince 5(4)) on the real 4-vector.
    dop853    scipy solve_ivp (Dormand-Prince 8(5,3)) on the real 4-vector.
    midpoint  fixed-step exponential midpoint rule, refined by step doubling.
"""

import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from superlz.diagnostics import logger
from superlz.errors import DegenerateBasisError, InvalidArgumentError, NonConvergenceError
from superlz.tls import StateVector

METHODS = ("magnus4", "rk45", "dop853", "midpoint")

_SQRT3 = math.sqrt(3.0)
_CF4_NODES = (0.5 - _SQRT3 / 6.0, 0.5 + _SQRT3 / 6.0)
_CF4_W1 = (3.0 - 2.0 * _SQRT3) / 12.0
_CF4_W2 = (3.0 + 2.0 * _SQRT3) / 12.0

TOLERANCE_FLOOR = 1e-13
AUTO_T0_MAX_DOUBLINGS = 80


@dataclass(frozen=True)
class PropagationConfig:
    """Integration window, tolerances and the convergence policy.

    ``t0=None`` selects the half-window automatically (see ``auto_t0``).
    ``hbar`` is 1 for the analytic models; the shuttle module sets it to
    its physical value in ueV*ns.
    """

    t0: float | None = None
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    conv_tol: float = 1e-4
    max_steps: int = 2_000_000
    hbar: float = 1.0
    method: str = "magnus4"
    max_phase_per_step: float = 2.0
    theta_tol: float = 1e-4
    coupling_tol: float = 1e-6
    max_doublings: int = 6

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "conv_tol"):
            value = getattr(self, name)
            if not (0.0 < value <= 1e-2):
                raise InvalidArgumentError(f"{name} must lie in (0, 1e-2], got {value!r}")
        if self.t0 is not None and not (math.isfinite(self.t0) and self.t0 > 0.0):
            raise InvalidArgumentError(f"t0 must be > 0, got {self.t0!r}")
        if self.method not in METHODS:
            raise InvalidArgumentError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if not (self.hbar > 0.0 and math.isfinite(self.hbar)):
            raise InvalidArgumentError(f"hbar must be > 0, got {self.hbar!r}")
        if self.max_steps < 1 or self.max_doublings < 1:
            raise InvalidArgumentError("max_steps and max_doublings must be >= 1")
        if not self.max_phase_per_step > 0.0:
            raise InvalidArgumentError("max_phase_per_step must be > 0")
        if not (self.theta_tol > 0.0 and self.coupling_tol > 0.0):
            raise InvalidArgumentError("theta_tol and coupling_tol must be > 0")

    def tightened(self, factor=10.0):
        """Copy with rel_tol and abs_tol divided by ``factor`` (floored)."""
        return replace(
            self,
            rel_tol=max(self.rel_tol / factor, TOLERANCE_FLOOR),
            abs_tol=max(self.abs_tol / factor, TOLERANCE_FLOOR),
        )

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InvalidArgumentError(f"unknown propagation settings: {', '.join(sorted(unknown))}")
        return cls(**data)


@dataclass(frozen=True)
class TransitionResult:
    p: float
    amplitude_a: complex
    amplitude_b: complex
    norm_drift: float
    steps: int
    t0_used: float
    converged: bool
    method: str = "magnus4"
    p_sequence: tuple = ()
    trajectory: list | None = field(default=None, repr=False, compare=False)

    def to_dict(self):
        return {
            "p": self.p,
            "amplitude_a": [self.amplitude_a.real, self.amplitude_a.imag],
            "amplitude_b": [self.amplitude_b.real, self.amplitude_b.imag],
            "norm_drift": self.norm_drift,
            "steps": self.steps,
            "t0_used": self.t0_used,
            "converged": self.converged,
            "method": self.method,
            "p_sequence": list(self.p_sequence),
        }


def overlap_amplitudes(state, basis):
    """(a, b) = (<v_minus|state>, <v_plus|state>)."""
    if basis.degenerate:
        raise DegenerateBasisError("cannot project onto a degenerate eigenbasis")
    return basis.v_minus.inner(state), basis.v_plus.inner(state)


def _rotation(r, tau):
    """exp(i tau r.sigma) as its four entries (u00, u01, u10, u11)."""
    x, y, z = r
    mag = math.sqrt(x * x + y * y + z * z)
    if mag == 0.0:
        return 1.0, 0.0, 0.0, 1.0
    phi = tau * mag
    c = math.cos(phi)
    s = math.sin(phi) / mag
    return (
        complex(c, s * z),
        complex(s * y, s * x),
        complex(-s * y, s * x),
        complex(c, -s * z),
    )


def _apply(u, a0, a1):
    return u[0] * a0 + u[1] * a1, u[2] * a0 + u[3] * a1


def _cf4_step(model, t, h, a0, a1, hbar):
    """One commutator-free order-4 step; the right exponential acts first."""
    r1 = model.field(t + _CF4_NODES[0] * h).as_tuple()
    r2 = model.field(t + _CF4_NODES[1] * h).as_tuple()
    first = tuple(_CF4_W2 * p + _CF4_W1 * q for p, q in zip(r1, r2))
    second = tuple(_CF4_W1 * p + _CF4_W2 * q for p, q in zip(r1, r2))
    tau = h / hbar
    a0, a1 = _apply(_rotation(first, tau), a0, a1)
    return _apply(_rotation(second, tau), a0, a1)


def _midpoint_step(model, t, h, a0, a1, hbar):
    r = model.field(t + 0.5 * h).as_tuple()
    return _apply(_rotation(r, h / hbar), a0, a1)


def _window(model, cfg, reverse):
    t0 = cfg.t0 if cfg.t0 is not None else auto_t0(model, cfg)
    t_start, t_end = model.window(t0)
    if reverse:
        t_start, t_end = t_end, t_start
    return t0, t_start, t_end


def _basis_at(model, t):
    basis = model.eigenbasis(t)
    if basis.degenerate:
        raise DegenerateBasisError(f"degenerate eigenbasis at the window end t = {t!r}")
    return basis


def _finish(model, t0, t_end, a0, a1, steps, method, trajectory=None):
    final = StateVector(a0, a1)
    a, b = overlap_amplitudes(final, _basis_at(model, t_end))
    return TransitionResult(
        p=min(abs(b) ** 2, 1.0 + 1e-12),
        amplitude_a=a,
        amplitude_b=b,
        norm_drift=abs(final.norm() - 1.0),
        steps=steps,
        t0_used=t0,
        converged=True,
        method=method,
        trajectory=trajectory,
    )


def _trajectory_row(model, t, a0, a1):
    basis = model.eigenbasis(t)
    upper = abs(basis.v_plus.inner(StateVector(a0, a1))) ** 2
    return (t, a0, a1, upper)


def _propagate_magnus4(model, cfg, t0, t_start, t_end, record):
    start = _basis_at(model, t_start).v_minus
    a0, a1 = start.a0, start.a1
    span = t_end - t_start
    direction = 1.0 if span > 0 else -1.0
    hbar = cfg.hbar

    def cap(t):
        g = model.gap(t)
        return cfg.max_phase_per_step * hbar / g if g > 0.0 else abs(span)

    t = t_start
    h = min(cap(t), abs(span) / 16.0)
    accepted = attempts = 0
    trajectory = [_trajectory_row(model, t, a0, a1)] if record else None

    while direction * (t_end - t) > 0.0:
        attempts += 1
        if attempts > cfg.max_steps:
            partial = _finish(model, t0, t_end, a0, a1, accepted, "magnus4")
            raise NonConvergenceError(
                f"magnus4 exceeded max_steps={cfg.max_steps} at t={t!r}",
                partial=replace(partial, converged=False),
            )
        h = min(h, cap(t), direction * (t_end - t))
        step = direction * h
        full = _cf4_step(model, t, step, a0, a1, hbar)
        mid = _cf4_step(model, t, 0.5 * step, a0, a1, hbar)
        half = _cf4_step(model, t + 0.5 * step, 0.5 * step, mid[0], mid[1], hbar)

        diff = math.sqrt(abs(half[0] - full[0]) ** 2 + abs(half[1] - full[1]) ** 2)
        scale = cfg.abs_tol + cfg.rel_tol * math.sqrt(abs(half[0]) ** 2 + abs(half[1]) ** 2)
        err = diff / scale

        if err <= 1.0:
            t = t_end if abs(t_end - (t + step)) <= 1e-15 * abs(span) else t + step
            a0, a1 = half
            accepted += 1
            if record:
                trajectory.append(_trajectory_row(model, t, a0, a1))
        factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h *= factor

    return _finish(model, t0, t_end, a0, a1, accepted, "magnus4", trajectory)


def _propagate_scipy(model, cfg, t0, t_start, t_end, record, segments=64):
    start = _basis_at(model, t_start).v_minus
    y = np.array([start.a0.real, start.a0.imag, start.a1.real, start.a1.imag])
    hbar = cfg.hbar
    solver = "RK45" if cfg.method == "rk45" else "DOP853"

    def rhs(t, y):
        x, fy, z = model.field(t).as_tuple()
        a0 = complex(y[0], y[1])
        a1 = complex(y[2], y[3])
        # i hbar d/dt psi = H psi with H = -r.sigma
        d0 = 1j * (z * a0 + complex(x, -fy) * a1) / hbar
        d1 = 1j * (complex(x, fy) * a0 - z * a1) / hbar
        return [d0.real, d0.imag, d1.real, d1.imag]

    edges = np.linspace(t_start, t_end, segments + 1)
    steps = 0
    trajectory = [_trajectory_row(model, t_start, start.a0, start.a1)] if record else None
    for lo, hi in zip(edges[:-1], edges[1:]):
        probe = np.linspace(lo, hi, 5)
        g_max = max(model.gap(float(t)) for t in probe)
        max_step = 0.1 * hbar / g_max if g_max > 0.0 else np.inf
        sol = solve_ivp(rhs, (lo, hi), y, method=solver, rtol=cfg.rel_tol,
                        atol=cfg.abs_tol, max_step=max_step)
        if not sol.success:
            raise NonConvergenceError(f"{solver} failed on [{lo}, {hi}]: {sol.message}")
        steps += len(sol.t) - 1
        if steps > cfg.max_steps:
            raise NonConvergenceError(f"{solver} exceeded max_steps={cfg.max_steps}")
        y = sol.y[:, -1]
        if record:
            for k in range(1, len(sol.t)):
                trajectory.append(_trajectory_row(model, float(sol.t[k]),
                                                  complex(sol.y[0, k], sol.y[1, k]),
                                                  complex(sol.y[2, k], sol.y[3, k])))

    return _finish(model, t0, t_end, complex(y[0], y[1]), complex(y[2], y[3]),
                   steps, cfg.method, trajectory)


def propagate_fixed_step(model, t0, n_steps, hbar=1.0, reverse=False):
    """Exponential-midpoint propagation with ``n_steps`` equal steps."""
    if n_steps < 1:
        raise InvalidArgumentError("n_steps must be >= 1")
    t_start, t_end = model.window(t0)
    if reverse:
        t_start, t_end = t_end, t_start
    start = _basis_at(model, t_start).v_minus
    a0, a1 = start.a0, start.a1
    h = (t_end - t_start) / n_steps
    for k in range(n_steps):
        a0, a1 = _midpoint_step(model, t_start + k * h, h, a0, a1, hbar)
    return _finish(model, t0, t_end, a0, a1, n_steps, "midpoint")


def reference_probability(model, t0, hbar=1.0, tol=1e-5, n_start=None, max_doublings=16, reverse=False):
    """Midpoint result refined by doubling the step count until P moves < tol."""
    t_start, t_end = model.window(t0)
    if n_start is None:
        probe = np.linspace(t_start, t_end, 33)
        g_max = max(model.gap(float(t)) for t in probe)
        n_start = max(256, int(abs(t_end - t_start) * g_max / (0.5 * hbar)))
    n = n_start
    previous = propagate_fixed_step(model, t0, n, hbar, reverse)
    sequence = [previous.p]
    for _ in range(max_doublings):
        n *= 2
        current = propagate_fixed_step(model, t0, n, hbar, reverse)
        sequence.append(current.p)
        if abs(current.p - previous.p) < tol:
            return replace(current, p_sequence=tuple(sequence))
        previous = current
    raise NonConvergenceError(
        f"midpoint reference did not settle below {tol} after {max_doublings} doublings",
        partial=replace(previous, converged=False),
        p_sequence=sequence,
    )


def auto_t0(model, cfg):
    """Smallest doubled half-window where the drive has effectively stopped turning.

    Accepts t when |theta(t) - theta(inf)| < theta_tol or when the local
    non-adiabatic coupling |theta'(t)| * hbar / gap(t) < coupling_tol.
    Models with a fixed window return its half-width.
    """
    fixed = model.fixed_window()
    if fixed is not None:
        return 0.5 * abs(fixed[1] - fixed[0])
    limit = model.theta_limit()
    g0 = model.gap(0.0)
    t = cfg.hbar / g0 if g0 > 0.0 else 1.0
    for _ in range(AUTO_T0_MAX_DOUBLINGS):
        saturated = limit is not None and abs(model.theta(t) - limit) < cfg.theta_tol
        g = model.gap(t)
        coupling = abs(model.theta_rate(t)) * cfg.hbar / g if g > 0.0 else math.inf
        if saturated or coupling < cfg.coupling_tol:
            return t
        t *= 2.0
    raise NonConvergenceError(f"no half-window found up to t = {t!r}")


def propagate(model, cfg, reverse=False, record=False):
    """Propagate ``model`` over its window and project onto the final eigenbasis.

    Args:
        model: a DriveModel.
        cfg: PropagationConfig; ``cfg.t0=None`` uses ``auto_t0``.
        reverse: start in the ground state at the window end and run backwards.
        record: keep (t, a0, a1, upper population) per accepted step.

    Raises:
        DegenerateBasisError: zero gap at a window end.
        NonConvergenceError: step budget exhausted.
    """
    t0, t_start, t_end = _window(model, cfg, reverse)
    if cfg.method == "magnus4":
        return _propagate_magnus4(model, cfg, t0, t_start, t_end, record)
    if cfg.method in ("rk45", "dop853"):
        return _propagate_scipy(model, cfg, t0, t_start, t_end, record)
    return reference_probability(model, t0, cfg.hbar, reverse=reverse)


def propagate_autoconverge(model, cfg, reverse=False):
    """Propagate with t0 doubling and tolerance tightening until P settles.

    Each round doubles the half-window (skipped for fixed-window models) and
    divides rel_tol and abs_tol by 10. Stops when successive P differ by less
    than ``cfg.conv_tol``.
    """
    fixed = model.fixed_window() is not None
    t0 = cfg.t0 if cfg.t0 is not None else auto_t0(model, cfg)
    current_cfg = replace(cfg, t0=t0)
    started = time.perf_counter()
    previous = propagate(model, current_cfg, reverse=reverse)
    sequence = [previous.p]
    logger.debug(f"{model.kind}: t0={t0:.6g} p={previous.p:.10g} steps={previous.steps}")

    for _ in range(cfg.max_doublings):
        if not fixed:
            t0 *= 2.0
        current_cfg = replace(current_cfg.tightened(), t0=t0)
        current = propagate(model, current_cfg, reverse=reverse)
        sequence.append(current.p)
        logger.debug(f"{model.kind}: t0={t0:.6g} p={current.p:.10g} steps={current.steps}")
        if abs(current.p - previous.p) < cfg.conv_tol:
            elapsed = time.perf_counter() - started
            logger.debug(f"{model.kind}: converged after {len(sequence)} runs in {elapsed:.2f}s")
            return replace(current, converged=True, p_sequence=tuple(sequence))
        previous = current

    raise NonConvergenceError(
        f"P did not settle below conv_tol={cfg.conv_tol} after {cfg.max_doublings} doublings",
        partial=replace(previous, converged=False, p_sequence=tuple(sequence)),
        p_sequence=sequence,
    )
