"""Drive models: generalized LZ, standard LZ, Demkov-Kunike, superlinear.

All analytic models keep the field in the xz plane (y = 0). The generalized
model has the LZ spectrum +-Omega_alpha/2 for every beta; beta only changes
the path of the field angle theta(t).
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from superlz.errors import DomainError, InvalidArgumentError
from superlz.tls import FieldVector, StateVector, bloch_angle, eigensystem, fix_gauge

KINDS = ("generalized-lz", "standard-lz", "demkov-kunike", "superlinear", "landscape")


def _require_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise InvalidArgumentError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True, slots=True)
class GenLZParams:
    """(delta0, alpha, beta) of the generalized LZ Hamiltonian (hbar = 1)."""

    delta0: float
    alpha: float
    beta: float

    def __post_init__(self):
        _require_finite(delta0=self.delta0, alpha=self.alpha, beta=self.beta)
        if self.delta0 <= 0.0:
            raise InvalidArgumentError(f"delta0 must be > 0, got {self.delta0!r}")
        if self.alpha < 0.0:
            raise InvalidArgumentError(f"alpha must be >= 0, got {self.alpha!r}")

    def swapped(self):
        """Parameters with alpha and beta interchanged (requires beta >= 0)."""
        return GenLZParams(self.delta0, self.beta, self.alpha)

    def scaled(self, s):
        """(s*delta0, s^2*alpha, s^2*beta); P is invariant under this map."""
        return GenLZParams(s * self.delta0, s * s * self.alpha, s * s * self.beta)


def _omegas(p, t):
    d2 = p.delta0 * p.delta0
    return math.sqrt(d2 + (p.alpha * t) ** 2), math.sqrt(d2 + (p.beta * t) ** 2)


def _numerator_denominator(p, t):
    """N = a*Ob - b*Oa and D = Oa*Ob - a*b*t^2, cancellation-free.

    For a*b > 0 both are rationalized; otherwise the printed forms are sums
    of non-negative terms.
    """
    a, b, d2 = p.alpha, p.beta, p.delta0 * p.delta0
    oa, ob = _omegas(p, t)
    ab = a * b
    if ab > 0.0:
        n = d2 * (a * a - b * b) / (a * ob + b * oa)
        d = d2 * (d2 + (a * a + b * b) * t * t) / (oa * ob + ab * t * t)
    else:
        n = a * ob - b * oa
        d = oa * ob - ab * t * t
    assert d > 0.0, "D > 0 holds for delta0 > 0"
    return n, d, oa, ob


def gen_lz_field(p, t):
    """Field of the generalized LZ Hamiltonian at time t."""
    n, d, oa, _ = _numerator_denominator(p, t)
    half = 0.5 * oa / d
    return FieldVector(half * p.delta0 * p.delta0, 0.0, half * n * t)


def _plus_omega(s, omega, d2):
    """s + sqrt(d2 + s^2) without cancellation."""
    return s + omega if s >= 0.0 else d2 / (omega - s)


def _minus_omega(s, omega, d2):
    """sqrt(d2 + s^2) - s without cancellation."""
    return omega - s if s <= 0.0 else d2 / (omega + s)


def gen_lz_eigvec(p, t, branch):
    """Instantaneous eigenvector for branch '-' (ground) or '+'.

    Proportional to (alpha*t -+ Oa, -+beta*t + Ob), gauge fixed as in tls.
    """
    d2 = p.delta0 * p.delta0
    oa, ob = _omegas(p, t)
    at, bt = p.alpha * t, p.beta * t
    if branch == "-":
        v = StateVector(complex(_plus_omega(at, oa, d2)), complex(_plus_omega(bt, ob, d2)))
    elif branch == "+":
        v = StateVector(complex(-_minus_omega(at, oa, d2)), complex(_minus_omega(bt, ob, d2)))
    else:
        raise InvalidArgumentError(f"branch must be '-' or '+', got {branch!r}")
    return fix_gauge(v)


def theta(p, t):
    """Field angle theta(t) = arctan(N t / delta0^2)."""
    n, _, _, _ = _numerator_denominator(p, t)
    return math.atan(n * t / (p.delta0 * p.delta0))


def theta_bs(p, t):
    """Bloch-sphere polar angle of the eigenvectors, pi/2 - theta."""
    return math.pi / 2.0 - theta(p, t)


def theta_extreme(p):
    """lim theta(t) for t -> +inf; the t -> -inf limit is its negative."""
    a, b = p.alpha, p.beta
    if b > 0.0:
        if a > 0.0:
            return math.atan((a * a - b * b) / (2.0 * a * b))
        return -math.pi / 2.0
    if a == 0.0 and b == 0.0:
        return 0.0
    return math.pi / 2.0


def theta_extremes(p):
    """(theta(-inf), theta(+inf))."""
    top = theta_extreme(p)
    return -top, top


def theta_rate_at_crossing(p):
    """Angular velocity |alpha - beta| / delta0 of theta at t = 0."""
    return abs(p.alpha - p.beta) / p.delta0


def dynamic_phase(p, t):
    """Integral of the gap Omega_alpha from 0 to t (hbar = 1)."""
    if p.alpha == 0.0:
        return p.delta0 * t
    oa, _ = _omegas(p, t)
    return 0.5 * (t * oa + p.delta0 * p.delta0 / p.alpha * math.asinh(p.alpha * t / p.delta0))


def path_points(p, times):
    """(x, z) trajectory of the field, shape (len(times), 2)."""
    pts = np.empty((len(times), 2))
    for i, t in enumerate(times):
        f = gen_lz_field(p, float(t))
        pts[i] = (f.x, f.z)
    return pts


def sudden_limit_probability(p):
    """P in the sudden limit: sin^2 of half the total rotation of theta."""
    return math.sin(abs(theta_extreme(p))) ** 2


def dk_field(a, b, delta0, t):
    """Demkov-Kunike field: x = delta0, z = a*tanh(b*t)."""
    _require_finite(a=a, b=b, delta0=delta0, t=t)
    if b <= 0.0:
        raise InvalidArgumentError(f"b must be > 0, got {b!r}")
    return FieldVector(delta0, 0.0, a * math.tanh(b * t))


def dk_fit_from_gen_lz(p):
    """DK parameters (a, b) sharing theta(+-inf) and theta'(0) with p.

    a = (alpha^2 - beta^2) delta0 / (2 alpha beta),
    b = 2 alpha beta / ((alpha + beta) delta0), so that (a/delta0)*b equals
    (alpha - beta)/delta0 for every delta0.
    """
    a_, b_ = p.alpha, p.beta
    if a_ * b_ <= 0.0:
        raise DomainError("the DK fit needs alpha > 0 and beta > 0")
    a = (a_ * a_ - b_ * b_) * p.delta0 / (2.0 * a_ * b_)
    b = 2.0 * a_ * b_ / ((a_ + b_) * p.delta0)
    return a, b


def sl_field(p, t):
    """Superlinear field: x = delta0, z = (alpha - beta) t sqrt(1 - beta t^2)."""
    if p.beta > 0.0:
        raise DomainError("the superlinear model needs beta <= 0")
    return FieldVector(p.delta0, 0.0, (p.alpha - p.beta) * t * math.sqrt(1.0 - p.beta * t * t))


class DriveModel(ABC):
    """Time-parameterized field source for the propagator."""

    kind = None

    @abstractmethod
    def field(self, t):
        """FieldVector at time t."""

    def eigenbasis(self, t):
        return eigensystem(self.field(t))

    def gap(self, t):
        return self.field(t).gap()

    def theta(self, t):
        return bloch_angle(self.field(t))

    def theta_rate(self, t, h=None):
        """Central-difference d(theta)/dt."""
        h = h or 1e-6 * max(1.0, abs(t))
        return (self.theta(t + h) - self.theta(t - h)) / (2.0 * h)

    def theta_limit(self):
        """theta(+inf), or None for models defined on a finite window."""
        return None

    def fixed_window(self):
        """(t_start, t_end) for finite models; None means [-t0, t0]."""
        return None

    def window(self, t0):
        fixed = self.fixed_window()
        return fixed if fixed is not None else (-t0, t0)

    def describe(self):
        return {"kind": self.kind}


class GenLZModel(DriveModel):
    kind = "generalized-lz"

    def __init__(self, params):
        self.params = params

    def field(self, t):
        return gen_lz_field(self.params, t)

    def theta(self, t):
        return theta(self.params, t)

    def theta_limit(self):
        return theta_extreme(self.params)

    def describe(self):
        p = self.params
        return {"kind": self.kind, "delta0": p.delta0, "alpha": p.alpha, "beta": p.beta}


class StandardLZModel(DriveModel):
    """x = delta0/2, z = alpha t/2."""

    kind = "standard-lz"

    def __init__(self, delta0, alpha):
        _require_finite(delta0=delta0, alpha=alpha)
        if delta0 <= 0.0 or alpha < 0.0:
            raise InvalidArgumentError("standard LZ needs delta0 > 0 and alpha >= 0")
        self.delta0 = delta0
        self.alpha = alpha

    def field(self, t):
        return FieldVector(0.5 * self.delta0, 0.0, 0.5 * self.alpha * t)

    def theta_limit(self):
        return math.pi / 2.0 if self.alpha > 0.0 else 0.0

    def describe(self):
        return {"kind": self.kind, "delta0": self.delta0, "alpha": self.alpha}


class DKModel(DriveModel):
    kind = "demkov-kunike"

    def __init__(self, a, b, delta0):
        dk_field(a, b, delta0, 0.0)
        self.a, self.b, self.delta0 = a, b, delta0

    def field(self, t):
        return dk_field(self.a, self.b, self.delta0, t)

    def theta_limit(self):
        return math.atan2(self.a, self.delta0)

    def describe(self):
        return {"kind": self.kind, "a": self.a, "b": self.b, "delta0": self.delta0}


class SLModel(DriveModel):
    kind = "superlinear"

    def __init__(self, params):
        if params.beta > 0.0:
            raise DomainError("the superlinear model needs beta <= 0")
        self.params = params

    def field(self, t):
        return sl_field(self.params, t)

    def theta_limit(self):
        p = self.params
        return 0.0 if p.alpha == p.beta else math.pi / 2.0

    def describe(self):
        p = self.params
        return {"kind": self.kind, "delta0": p.delta0, "alpha": p.alpha, "beta": p.beta}
