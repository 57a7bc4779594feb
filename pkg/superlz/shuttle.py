"""Valley-state dynamics of a shuttled electron.

Units: positions in nm, couplings in ueV, times in ns, velocities in m/s
(1 m/s = 1 nm/ns), hbar = 0.6582119569 ueV*ns.

The valley Hamiltonian H_v = -(Delta* s+ + Delta s-)/2 has the field
(Re Delta/2, Im Delta/2, 0) and the gap |Delta|. A fixed rotation about the
x axis moves it to the xz plane, (Re Delta/2, 0, Im Delta/2); the field
angle is then arg Delta.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from scipy.signal import find_peaks

from superlz.diagnostics import logger
from superlz.errors import (
    InvalidArgumentError,
    LandscapeFormatError,
    ScheduleInfeasibleError,
)
from superlz.models import DriveModel
from superlz.propagator import PropagationConfig, propagate_autoconverge
from superlz.tls import FieldVector

HBAR_UEV_NS = 0.6582119569

LANDSCAPE_HEADER = ("d_nm", "re_delta_ueV", "im_delta_ueV")
SCHEDULE_HEADER = ("d_nm", "v_m_per_s")
INTERPOLATIONS = ("monotone-cubic", "piecewise-linear")
SCHEDULE_KINDS = ("constant", "gap-adaptive", "constant-angular")

DEFAULT_CAP_RATIO = 1e3
ANGULAR_EPSILON = 1e-6
PHASE_JUMP_WARNING = math.pi / 2.0


class Landscape:
    """Sampled complex intervalley coupling Delta(d) with interpolation."""

    def __init__(self, positions, couplings, interpolation="monotone-cubic"):
        positions = np.array(positions, dtype=float)
        couplings = np.array(couplings, dtype=complex)
        if positions.ndim != 1 or positions.shape != couplings.shape:
            raise InvalidArgumentError("positions and couplings must be 1-D arrays of equal length")
        if len(positions) < 2:
            raise InvalidArgumentError("a landscape needs at least 2 samples")
        if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(couplings))):
            raise InvalidArgumentError("landscape samples must be finite")
        if np.any(np.diff(positions) <= 0.0):
            raise InvalidArgumentError("landscape positions must be strictly increasing")
        if interpolation not in INTERPOLATIONS:
            raise InvalidArgumentError(f"unknown interpolation {interpolation!r}")

        positions.setflags(write=False)
        couplings.setflags(write=False)
        self.positions = positions
        self.couplings = couplings
        self.interpolation = interpolation
        pair = np.column_stack([couplings.real, couplings.imag])
        if interpolation == "monotone-cubic":
            self._interp = PchipInterpolator(positions, pair, axis=0)
        else:
            self._interp = None
        self._pair = pair

    @property
    def d_start(self):
        return float(self.positions[0])

    @property
    def d_end(self):
        return float(self.positions[-1])

    @property
    def extent(self):
        return self.d_end - self.d_start

    def degenerate_points(self):
        """Sample indices where |Delta| vanishes."""
        return np.flatnonzero(np.abs(self.couplings) == 0.0)

    def _check_range(self, d):
        slack = 1e-9 * max(self.extent, 1.0)
        lo, hi = np.min(d), np.max(d)
        if lo < self.d_start - slack or hi > self.d_end + slack:
            raise InvalidArgumentError(
                f"position outside the landscape [{self.d_start}, {self.d_end}]"
            )
        return np.clip(d, self.d_start, self.d_end)

    def coupling_array(self, d):
        d = self._check_range(np.asarray(d, dtype=float))
        if self._interp is not None:
            pair = self._interp(d)
            return pair[..., 0] + 1j * pair[..., 1]
        re = np.interp(d, self.positions, self._pair[:, 0])
        im = np.interp(d, self.positions, self._pair[:, 1])
        return re + 1j * im

    def coupling(self, d):
        return complex(self.coupling_array(float(d)))

    def gap(self, d):
        """Valley splitting |Delta(d)|."""
        return abs(self.coupling(d))

    def times_phase(self, phi0):
        """Landscape with every coupling multiplied by exp(i phi0)."""
        return Landscape(self.positions.copy(), self.couplings * np.exp(1j * phi0), self.interpolation)

    def __eq__(self, other):
        if not isinstance(other, Landscape):
            return NotImplemented
        return (self.interpolation == other.interpolation
                and np.array_equal(self.positions, other.positions)
                and np.array_equal(self.couplings, other.couplings))

    __hash__ = None

    def __repr__(self):
        return (f"Landscape(n={len(self.positions)}, d=[{self.d_start:g}, {self.d_end:g}] nm, "
                f"interpolation={self.interpolation!r})")


def valley_field(land, d):
    """Rotated-frame field (Re Delta/2, 0, Im Delta/2) at position d."""
    delta = land.coupling(d)
    return FieldVector(0.5 * delta.real, 0.0, 0.5 * delta.imag)


def raw_valley_field(land, d):
    """Unrotated field (Re Delta/2, Im Delta/2, 0) of H_v."""
    delta = land.coupling(d)
    return FieldVector(0.5 * delta.real, 0.5 * delta.imag, 0.0)


def synth_landscape(seed, n_modes, corr_length, mean_coupling, extent,
                    n_samples=2001, d_start=0.0, interpolation="monotone-cubic"):
    """Random landscape Delta(d) = sum_k c_k exp(i k_k d).

    c_k are complex Gaussian with E|c_k|^2 = mean_coupling^2 / n_modes and
    k_k ~ Normal(0, 1/corr_length), drawn from PCG64(seed).
    """
    if n_modes < 1:
        raise InvalidArgumentError(f"n_modes must be >= 1, got {n_modes!r}")
    if not (extent > 0.0 and corr_length > 0.0 and mean_coupling > 0.0):
        raise InvalidArgumentError("extent, corr_length and mean_coupling must be > 0")
    if n_samples < 2:
        raise InvalidArgumentError("n_samples must be >= 2")

    rng = np.random.Generator(np.random.PCG64(seed))
    wavenumbers = rng.normal(0.0, 1.0 / corr_length, size=n_modes)
    scale = mean_coupling / math.sqrt(2.0 * n_modes)
    coefficients = scale * (rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes))

    positions = np.linspace(d_start, d_start + extent, n_samples)
    couplings = np.exp(1j * np.outer(positions, wavenumbers)) @ coefficients
    return Landscape(positions, couplings, interpolation)


def single_anticrossing_landscape(g0, slope, extent, n_samples=2001, interpolation="monotone-cubic"):
    """Delta(d) = g0 + i slope (d - extent/2) on [0, extent].

    Traversed at speed v it is the LZ problem with delta0 = g0 and
    rate = slope * v.
    """
    if not (g0 > 0.0 and extent > 0.0):
        raise InvalidArgumentError("g0 and extent must be > 0")
    positions = np.linspace(0.0, extent, n_samples)
    return Landscape(positions, g0 + 1j * slope * (positions - 0.5 * extent), interpolation)


def rotating_landscape(g, q, extent, n_samples=2001, interpolation="monotone-cubic"):
    """Delta(d) = g exp(i q d): constant gap, phase winding at q rad/nm."""
    if not (g > 0.0 and extent > 0.0):
        raise InvalidArgumentError("g and extent must be > 0")
    positions = np.linspace(0.0, extent, n_samples)
    return Landscape(positions, g * np.exp(1j * q * positions), interpolation)


def rabi_rotation_probability(g, q, v, distance, hbar=HBAR_UEV_NS):
    """Excitation probability after crossing a rotating landscape at speed v.

    In the frame co-rotating with the field at omega = q v the Hamiltonian
    is static; P = omega^2 / W^2 * sin^2(W T / 2), W^2 = omega^2 + (g/hbar)^2.
    """
    omega = q * v
    w = math.sqrt(omega * omega + (g / hbar) ** 2)
    duration = distance / v
    return (omega / w) ** 2 * math.sin(0.5 * w * duration) ** 2


def _unwrapped_phase(couplings):
    raw = np.angle(couplings)
    jumps = np.abs(np.diff(np.unwrap(raw)))
    if jumps.size and np.max(jumps) > PHASE_JUMP_WARNING:
        logger.warn(f"landscape phase jumps by {np.max(jumps):.3f} rad between samples; "
                    "the landscape is undersampled")
    return np.unwrap(raw)


@dataclass(frozen=True, eq=False)
class VelocitySchedule:
    """Speed v(d) > 0 sampled on ``positions``; v in m/s, d in nm."""

    kind: str
    positions: np.ndarray
    velocities: np.ndarray
    avg_velocity: float
    caps: tuple = (None, None)

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=float)
        velocities = np.asarray(self.velocities, dtype=float)
        if positions.shape != velocities.shape or len(positions) < 2:
            raise InvalidArgumentError("schedule needs matching position and velocity arrays")
        if np.any(np.diff(positions) <= 0.0):
            raise InvalidArgumentError("schedule positions must be strictly increasing")
        if not (np.all(np.isfinite(velocities)) and np.all(velocities > 0.0)):
            raise InvalidArgumentError("schedule velocities must be finite and > 0")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "velocities", velocities)

    @property
    def d_start(self):
        return float(self.positions[0])

    @property
    def d_end(self):
        return float(self.positions[-1])

    def arrival_times(self):
        """T(d_i) = integral of 1/v from d_start, in ns."""
        return cumulative_trapezoid(1.0 / self.velocities, self.positions, initial=0.0)

    @property
    def duration(self):
        return float(self.arrival_times()[-1])

    def realized_avg_velocity(self):
        return (self.d_end - self.d_start) / self.duration

    def velocity(self, d):
        return float(np.interp(d, self.positions, self.velocities))


def _harmonic_mean(positions, velocities):
    total = cumulative_trapezoid(1.0 / velocities, positions)[-1]
    return (positions[-1] - positions[0]) / total


def _fit_scale(positions, shape, avg, v_min, v_max):
    """Scale s such that clip(s * shape) has harmonic mean ``avg``."""
    positive = shape[shape > 0.0]
    if positive.size == 0:
        return np.full_like(shape, avg)

    def speeds(log_s):
        return np.clip(math.exp(log_s) * shape, v_min, v_max)

    def mismatch(log_s):
        return _harmonic_mean(positions, speeds(log_s)) / avg - 1.0

    lo = math.log(v_min / positive.max())
    hi = math.log(v_max / positive.min())
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_lo == 0.0:
        return speeds(lo)
    if f_hi == 0.0:
        return speeds(hi)
    if f_lo > 0.0 or f_hi < 0.0:
        raise ScheduleInfeasibleError(
            f"caps [{v_min}, {v_max}] m/s cannot reach an average velocity of {avg} m/s"
        )
    return speeds(brentq(mismatch, lo, hi, xtol=1e-14, rtol=4e-15, maxiter=500))


def make_schedule(land, kind, avg_velocity, caps=None, gap_exponent=2.0, n_samples=None):
    """Velocity schedule over the whole landscape with harmonic mean ``avg_velocity``.

    Kinds:
        constant          v(d) = avg_velocity
        gap-adaptive      v proportional to |Delta(d)|^gap_exponent
        constant-angular  v proportional to 1/|phi'(d)|, phi = unwrapped arg Delta,
                          so that the field angle turns at a constant rate
    Non-constant kinds are clipped to ``caps`` (default avg/1e3 .. avg*1e3)
    before the overall scale is fixed.
    """
    if kind not in SCHEDULE_KINDS:
        raise InvalidArgumentError(f"unknown schedule kind {kind!r}; choose from {', '.join(SCHEDULE_KINDS)}")
    if not (avg_velocity > 0.0 and math.isfinite(avg_velocity)):
        raise InvalidArgumentError(f"avg_velocity must be > 0, got {avg_velocity!r}")
    if caps is None:
        caps = (avg_velocity / DEFAULT_CAP_RATIO, avg_velocity * DEFAULT_CAP_RATIO)
    v_min, v_max = float(caps[0]), float(caps[1])
    if not (0.0 < v_min <= v_max):
        raise InvalidArgumentError(f"caps must satisfy 0 < v_min <= v_max, got {caps!r}")
    if not (v_min <= avg_velocity <= v_max):
        raise ScheduleInfeasibleError(
            f"average velocity {avg_velocity} m/s lies outside the caps [{v_min}, {v_max}]"
        )

    n = n_samples or max(len(land.positions), 2001)
    positions = np.linspace(land.d_start, land.d_end, n)

    if kind == "constant":
        velocities = np.full(n, float(avg_velocity))
    elif kind == "gap-adaptive":
        shape = np.abs(land.coupling_array(positions)) ** gap_exponent
        velocities = _fit_scale(positions, shape, avg_velocity, v_min, v_max)
    else:
        phase = _unwrapped_phase(land.coupling_array(positions))
        rate = np.abs(np.gradient(phase, positions))
        peak = rate.max()
        if peak == 0.0:
            velocities = np.full(n, float(avg_velocity))
        else:
            shape = 1.0 / np.maximum(rate, ANGULAR_EPSILON * peak)
            velocities = _fit_scale(positions, shape, avg_velocity, v_min, v_max)

    return VelocitySchedule(kind, positions, velocities, float(avg_velocity), (v_min, v_max))


class ShuttleModel(DriveModel):
    """Valley TLS seen by an electron moving along a schedule.

    ``frame='raw'`` keeps the unrotated xy-plane field.
    """

    kind = "landscape"

    def __init__(self, land, schedule, frame="rotated"):
        if frame not in ("rotated", "raw"):
            raise InvalidArgumentError(f"frame must be 'rotated' or 'raw', got {frame!r}")
        self.land = land
        self.schedule = schedule
        self.frame = frame
        times = schedule.arrival_times()
        self.duration = float(times[-1])
        self._position = PchipInterpolator(times, schedule.positions)

    def position(self, t):
        t = min(max(t, 0.0), self.duration)
        return float(self._position(t))

    def field(self, t):
        d = self.position(t)
        if self.frame == "raw":
            return raw_valley_field(self.land, d)
        return valley_field(self.land, d)

    def fixed_window(self):
        return (0.0, self.duration)

    def describe(self):
        return {"kind": self.kind, "frame": self.frame, "schedule": self.schedule.kind,
                "duration_ns": self.duration}


@dataclass(frozen=True)
class AnticrossingEntry:
    d_min: float
    gap_min: float
    theta_rate: float
    local_adiabaticity: float


@dataclass(frozen=True)
class ShuttleResult:
    p_excite: float
    fidelity: float
    duration: float
    avg_velocity: float
    schedule_kind: str
    anticrossing_report: list = field(default_factory=list)
    norm_drift: float = 0.0
    converged: bool = True
    steps: int = 0

    def to_dict(self):
        data = asdict(self)
        data["anticrossing_report"] = [asdict(e) for e in self.anticrossing_report]
        return data


def anticrossing_report(land, schedule, prominence=0.05, n_samples=None, hbar=HBAR_UEV_NS):
    """Local minima of |Delta(d)| with their LZ-like diagnostics.

    Minima are the peaks of -|Delta| with prominence above
    ``prominence * max|Delta|``. For each: the gap, the angular velocity
    v * phi' of the field there (rad/ns), and g^2 / (hbar v kappa) with
    kappa = sqrt(|Delta|^2''/2), the exponent scale of the local LZ fit.
    """
    n = n_samples or max(4 * len(land.positions), 4001)
    d = np.linspace(land.d_start, land.d_end, n)
    delta = land.coupling_array(d)
    gap = np.abs(delta)
    if gap.max() == 0.0:
        return []
    peaks, _ = find_peaks(-gap, prominence=prominence * gap.max())

    phase_rate = np.gradient(_unwrapped_phase(delta), d)
    curvature = np.gradient(np.gradient(gap * gap, d), d)
    entries = []
    for i in peaks:
        v = schedule.velocity(d[i])
        kappa = math.sqrt(max(0.5 * curvature[i], 0.0))
        g = float(gap[i])
        adiabaticity = g * g / (hbar * v * kappa) if kappa > 0.0 else math.inf
        entries.append(AnticrossingEntry(float(d[i]), g, float(v * phase_rate[i]), adiabaticity))
    return entries


def shuttle_simulate(land, schedule, cfg=None, frame="rotated", prominence=0.05):
    """Excitation probability after traversing ``land`` along ``schedule``.

    Starts in the local valley ground state at d_start and projects onto the
    local eigenbasis at d_end. ``cfg.hbar`` is replaced by ``HBAR_UEV_NS``.
    """
    slack = 1e-9 * max(land.extent, 1.0)
    if abs(schedule.d_start - land.d_start) > slack or abs(schedule.d_end - land.d_end) > slack:
        raise InvalidArgumentError("the schedule must span the whole landscape")
    cfg = replace(cfg or PropagationConfig(), hbar=HBAR_UEV_NS, t0=None)
    model = ShuttleModel(land, schedule, frame)
    logger.debug(f"shuttle: {schedule.kind} schedule, duration {model.duration:.6g} ns")
    result = propagate_autoconverge(model, cfg)
    return ShuttleResult(
        p_excite=result.p,
        fidelity=1.0 - result.p,
        duration=model.duration,
        avg_velocity=schedule.realized_avg_velocity(),
        schedule_kind=schedule.kind,
        anticrossing_report=anticrossing_report(land, schedule, prominence),
        norm_drift=result.norm_drift,
        converged=result.converged,
        steps=result.steps,
    )


def _read_rows(path, header):
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise LandscapeFormatError(f"{path.name} is empty", line=1)
    if tuple(c.strip() for c in rows[0]) != header:
        raise LandscapeFormatError(f"expected header {','.join(header)}", line=1)
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise LandscapeFormatError(f"expected {len(header)} columns, got {len(row)}", line=lineno)
        try:
            values.append([float(c) for c in row])
        except ValueError:
            raise LandscapeFormatError(f"non-numeric value in {row!r}", line=lineno) from None
    if len(values) < 2:
        raise LandscapeFormatError("need at least 2 data rows", line=len(rows))
    return np.array(values)


def load_landscape(path, interpolation="monotone-cubic"):
    data = _read_rows(path, LANDSCAPE_HEADER)
    try:
        return Landscape(data[:, 0], data[:, 1] + 1j * data[:, 2], interpolation)
    except InvalidArgumentError as e:
        raise LandscapeFormatError(str(e)) from e


def save_landscape(land, path):
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(LANDSCAPE_HEADER)
        for d, delta in zip(land.positions, land.couplings):
            writer.writerow([f"{d:.16e}", f"{delta.real:.16e}", f"{delta.imag:.16e}"])
    return path


def load_schedule(path):
    data = _read_rows(path, SCHEDULE_HEADER)
    try:
        positions, velocities = data[:, 0], data[:, 1]
        avg = _harmonic_mean(positions, velocities) if np.all(velocities > 0.0) else 0.0
        return VelocitySchedule("file", positions, velocities, float(avg))
    except InvalidArgumentError as e:
        raise LandscapeFormatError(str(e)) from e


def save_schedule(schedule, path):
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SCHEDULE_HEADER)
        for d, v in zip(schedule.positions, schedule.velocities):
            writer.writerow([f"{d:.16e}", f"{v:.16e}"])
    return path


def save_result_json(result, path, config=None):
    path = Path(path)
    document = result.to_dict()
    if config is not None:
        document["config"] = config
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")
    return path
