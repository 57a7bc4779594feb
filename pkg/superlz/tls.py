"""Two-level-system primitives: fields, states, eigensystems, plane geometry.

Sign convention throughout the package: H = -x*sx - y*sy - z*sz, i.e.
H = -r.sigma. Energies, times and hbar follow the caller's unit system.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from superlz.errors import InvalidArgumentError, OutOfPlaneError

# A component below this modulus (of a unit vector) does not fix the gauge.
GAUGE_THRESHOLD = 1e-12
PLANE_TOLERANCE = 1e-12


@dataclass(frozen=True, slots=True)
class FieldVector:
    """Field r = (x, y, z) of H = -r.sigma at one instant."""

    x: float
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise InvalidArgumentError(f"non-finite field component in {self!r}")

    @property
    def magnitude(self):
        """|r|; the eigenvalues are -|r| and +|r|."""
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def gap(self):
        """Instantaneous gap E+ - E- = 2|r|."""
        return 2.0 * self.magnitude

    def scaled(self, factor):
        return FieldVector(self.x * factor, self.y * factor, self.z * factor)

    def as_tuple(self):
        return (self.x, self.y, self.z)


@dataclass(frozen=True, slots=True)
class StateVector:
    """Two complex amplitudes of a TLS wavefunction."""

    a0: complex
    a1: complex

    def norm(self):
        return math.sqrt(abs(self.a0) ** 2 + abs(self.a1) ** 2)

    def normalized(self):
        n = self.norm()
        if n == 0.0:
            raise InvalidArgumentError("cannot normalize the zero vector")
        return StateVector(self.a0 / n, self.a1 / n)

    def inner(self, other):
        """<self|other>."""
        return self.a0.conjugate() * other.a0 + self.a1.conjugate() * other.a1

    def is_physical(self, tol=1e-9):
        return abs(self.norm() - 1.0) <= tol

    def times_phase(self, phi):
        phase = cmath.exp(1j * phi)
        return StateVector(self.a0 * phase, self.a1 * phase)

    def as_array(self):
        return np.array([self.a0, self.a1], dtype=complex)

    @classmethod
    def from_array(cls, values):
        return cls(complex(values[0]), complex(values[1]))


@dataclass(frozen=True, slots=True)
class Eigensystem:
    """Instantaneous eigenpairs; '-' is always the ground state."""

    e_minus: float
    e_plus: float
    v_minus: StateVector
    v_plus: StateVector
    degenerate: bool = False

    @property
    def gap(self):
        return self.e_plus - self.e_minus


def hamiltonian_matrix(f):
    """Assemble -x*sx - y*sy - z*sz as a 2x2 complex Hermitian matrix."""
    if not isinstance(f, FieldVector):
        f = FieldVector(*f)
    return np.array(
        [[-f.z, -f.x + 1j * f.y],
         [-f.x - 1j * f.y, f.z]],
        dtype=complex,
    )


def fix_gauge(v):
    """Normalize and make the first nonzero component real and positive."""
    v = v.normalized()
    if abs(v.a0) > GAUGE_THRESHOLD:
        phase = v.a0.conjugate() / abs(v.a0)
        return StateVector(complex(abs(v.a0)), v.a1 * phase)
    phase = v.a1.conjugate() / abs(v.a1)
    return StateVector(v.a0 * phase, complex(abs(v.a1)))


def eigensystem(f):
    """Analytic diagonalization of H = -r.sigma.

    The unnormalized eigenvectors are chosen from the pair of algebraically
    equivalent forms that avoids cancellation (by the sign of z). A null
    field returns the computational basis with ``degenerate=True``.
    """
    if not isinstance(f, FieldVector):
        f = FieldVector(*f)
    r = f.magnitude
    if r == 0.0:
        return Eigensystem(0.0, 0.0, StateVector(1 + 0j, 0j), StateVector(0j, 1 + 0j), degenerate=True)

    x, y, z = f.x, f.y, f.z
    if z >= 0.0:
        v_minus = StateVector(complex(r + z), complex(x, y))
        v_plus = StateVector(complex(-x, y), complex(r + z))
    else:
        v_minus = StateVector(complex(x, -y), complex(r - z))
        v_plus = StateVector(complex(r - z), complex(-x, -y))

    return Eigensystem(-r, r, fix_gauge(v_minus), fix_gauge(v_plus))


def bloch_angle(f, tol=PLANE_TOLERANCE):
    """Field angle theta = atan2(z, x) of an xz-plane field, in (-pi, pi]."""
    scale = max(f.magnitude, 1.0)
    if abs(f.y) > tol * scale:
        raise OutOfPlaneError(f"field has y = {f.y!r}; expected an xz-plane field")
    return math.atan2(f.z, f.x)


def bloch_polar_angle(f, tol=PLANE_TOLERANCE):
    """theta_bs = pi/2 - theta, the eigenvector angle from the Bloch z axis."""
    return math.pi / 2.0 - bloch_angle(f, tol)


def residual(f, energy, v):
    """Relative residual ||H v - E v|| / max(|r|, tiny)."""
    h = hamiltonian_matrix(f)
    vec = v.as_array()
    return float(np.linalg.norm(h @ vec - energy * vec)) / max(f.magnitude, np.finfo(float).tiny)
