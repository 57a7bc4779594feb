"""Closed-form transition probabilities and adiabaticity diagnostics.

Conventions (hbar = 1 unless passed):
    LZ   P = exp(-pi delta0^2 / (2 hbar rate)), the value for off-diagonal
         delta0/2 and diabatic slope rate. The printed variant
         exp(-2 pi delta0^2 / (hbar rate)) agrees with it when delta0 there
         denotes the half-gap.
    DK   P = sinh^2(pi a / b) / sinh^2(pi sqrt(a^2 + delta0^2) / b).
    SL   P = exp(-pi delta0^2 / (2 hbar (alpha - beta))), beta <= 0.
"""

import cmath
import math
from dataclasses import dataclass

from superlz.errors import DomainError, InvalidArgumentError
from superlz.models import dk_fit_from_gen_lz, sudden_limit_probability

LOG_SPACE_THRESHOLD = 300.0

LZ_NOTE = (
    "exp(-pi*delta0^2/(2*hbar*rate)); printed prose variant exp(-2*pi*delta0^2/(hbar*rate)) "
    "assumes delta0 is the half-gap"
)
DK_NOTE = "good approximation for beta > 0; breaks down for beta/alpha below ~1e-4"
SL_NOTE = "fair approximation for beta <= 0; deviates for large |beta|"
SUDDEN_NOTE = "alpha, beta -> infinity limit; an upper bound for the hyperbolic paths"


@dataclass(frozen=True)
class FormulaResult:
    p: float
    formula: str
    validity_note: str = ""

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise InvalidArgumentError(f"{self.formula} probability {self.p!r} outside [0, 1]")


def lz_probability(delta0, rate, hbar=1.0):
    """Landau-Zener probability for coupling delta0 and sweep rate ``rate``.

    rate = +0.0 is treated as the adiabatic limit and returns 0.
    """
    if not (math.isfinite(delta0) and delta0 >= 0.0):
        raise InvalidArgumentError(f"delta0 must be finite and >= 0, got {delta0!r}")
    if rate == 0.0 and math.copysign(1.0, rate) > 0.0:
        return 0.0
    if not rate > 0.0:
        raise DomainError(f"LZ formula needs rate > 0, got {rate!r}")
    return math.exp(-math.pi * delta0 * delta0 / (2.0 * hbar * rate))


def _log_sinh(x):
    """log(sinh(x)) for x > 0 without overflow."""
    return x + math.log(-math.expm1(-2.0 * x)) - math.log(2.0)


def dk_probability_for_field(a, b, delta0):
    """DK formula for an explicit field z = a tanh(bt), x = delta0."""
    if not (b > 0.0 and delta0 > 0.0):
        raise DomainError("DK formula needs b > 0 and delta0 > 0")
    num_arg = math.pi * abs(a) / b
    den_arg = math.pi * math.hypot(a, delta0) / b
    if num_arg == 0.0:
        return 0.0
    if den_arg > LOG_SPACE_THRESHOLD:
        p = math.exp(2.0 * (_log_sinh(num_arg) - _log_sinh(den_arg)))
    else:
        p = (math.sinh(num_arg) / math.sinh(den_arg)) ** 2
    return min(max(p, 0.0), 1.0)


def dk_probability(p):
    """DK estimate for the generalized model with alpha > 0 and beta > 0."""
    a, b = dk_fit_from_gen_lz(p)
    return FormulaResult(dk_probability_for_field(a, b, p.delta0), "dk", DK_NOTE)


def sl_probability(p, hbar=1.0):
    """Superlinear estimate for beta <= 0."""
    if p.beta > 0.0:
        raise DomainError("the SL formula needs beta <= 0")
    rate = p.alpha - p.beta
    if rate <= 0.0:
        raise DomainError("the SL formula needs alpha - beta > 0")
    value = math.exp(-math.pi * p.delta0 * p.delta0 / (2.0 * hbar * rate))
    return FormulaResult(value, "sl", SL_NOTE)


def lz_result(p, hbar=1.0):
    """lz_probability(delta0, alpha) wrapped as a FormulaResult."""
    return FormulaResult(lz_probability(p.delta0, p.alpha, hbar), "lz", LZ_NOTE)


def sudden_result(p):
    return FormulaResult(sudden_limit_probability(p), "sudden", SUDDEN_NOTE)


def adiabaticity_parameter(p, hbar=1.0):
    """delta0^2 / (hbar |alpha - beta|); infinite when alpha == beta."""
    diff = abs(p.alpha - p.beta)
    if diff == 0.0:
        return math.inf
    return p.delta0 * p.delta0 / (hbar * diff)


def ddp_gap_function(p, t):
    """Analytic continuation sqrt(delta0^2 + alpha^2 t^2)/2 to complex t.

    It does not depend on beta, which is why the plain DDP formula gives the
    LZ value for every beta. The zero sits at t = i delta0/alpha.
    """
    if p.alpha <= 0.0:
        raise DomainError("the DDP gap function needs alpha > 0")
    t = complex(t)
    return 0.5 * cmath.sqrt(p.delta0 * p.delta0 + (p.alpha * t) ** 2)


def ddp_crossing_time(p):
    """Complex zero t_c = i delta0 / alpha of the gap function."""
    if p.alpha <= 0.0:
        raise DomainError("the DDP gap function needs alpha > 0")
    return complex(0.0, p.delta0 / p.alpha)


def comparisons(p, tags=("lz", "dk", "sl"), hbar=1.0):
    """Formula values for ``p``; out-of-domain formulas map to None."""
    out = {}
    for tag in tags:
        try:
            if tag == "lz":
                out[tag] = lz_result(p, hbar).p
            elif tag == "dk":
                out[tag] = dk_probability(p).p
            elif tag == "sl":
                out[tag] = sl_probability(p, hbar).p
            else:
                raise InvalidArgumentError(f"unknown comparison formula {tag!r}")
        except DomainError:
            out[tag] = None
    return out
