"""The unknown rotation, its generator, and the Euler / pulse decomposition used to run it on hardware."""
import math
from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np

from errors import ContractViolation
from numeric import CMat, CVec, I2, hermitian_eig, pauli_dot

TWO_PI = 2.0 * math.pi
BOUNDARY_TOL = 1e-12
NATIVE_PULSE_ANGLES = (math.pi / 2, math.pi)

PARAM_NAMES = ('alpha', 'theta', 'phi')


def _wrap_alpha(alpha: float) -> float:
    # maps to [-pi, pi]; +pi is kept as +pi
    wrapped= math.remainder(alpha, TWO_PI)
    if wrapped == -math.pi and alpha > 0:
        return math.pi
    return wrapped


@dataclass(frozen=True)
class RotationParams:
    """Rotation angle ``alpha`` about the axis (theta, phi), all in radians."""
    alpha: float
    theta: float
    phi: float

    def __post_init__(self):
        for name in PARAM_NAMES:
            value= getattr(self, name)
            if not math.isfinite(value):
                raise ContractViolation(f'{name} must be finite, got {value!r}')
        if not -math.pi <= self.alpha <= math.pi:
            raise ContractViolation(f'alpha must lie in [-pi, pi], got {self.alpha!r}')
        if not 0.0 <= self.theta <= math.pi:
            raise ContractViolation(f'theta must lie in [0, pi], got {self.theta!r}')
        if not 0.0 <= self.phi < TWO_PI:
            raise ContractViolation(f'phi must lie in [0, 2 pi), got {self.phi!r}')

    @classmethod
    def normalized(cls, alpha: float, theta: float, phi: float) -> 'RotationParams':
        """Map any finite triple to the canonical ranges, keeping the same rotation."""
        theta= math.remainder(theta, TWO_PI)
        if theta < 0:
            theta, phi= -theta, phi + math.pi
        if theta > math.pi:
            theta, phi= TWO_PI - theta, phi + math.pi
        phi= phi % TWO_PI
        if phi >= TWO_PI:
            phi= 0.0
        return cls(_wrap_alpha(alpha), theta, phi)

    def shifted(self, index: int, step: float) -> 'RotationParams':
        values= [self.alpha, self.theta, self.phi]
        values[index]+= step
        return RotationParams.normalized(*values)

    def with_alpha(self, alpha: float) -> 'RotationParams':
        return replace(self, alpha=alpha)

    @property
    def axis(self) -> np.ndarray:
        st= math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.alpha, self.theta, self.phi)


@dataclass(frozen=True)
class EulerAngles:
    theta_u: float
    phi_u: float
    lambda_u: float

    def __post_init__(self):
        for value in (self.theta_u, self.phi_u, self.lambda_u):
            if not math.isfinite(value):
                raise ContractViolation(f'Euler angles must be finite, got {self!r}')


@dataclass(frozen=True)
class PulseSpec:
    """Resonant pulse R(angle, phase); only pi/2 and pi pulses unless ``general`` is set."""
    angle: float
    phase: float
    general: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.angle) and math.isfinite(self.phase)):
            raise ContractViolation(f'pulse angle and phase must be finite, got {self!r}')
        if not self.general and not any(abs(self.angle - a) < BOUNDARY_TOL for a in NATIVE_PULSE_ANGLES):
            raise ContractViolation(f'pulse angle {self.angle!r} is not pi/2 or pi; pass general=True to allow it')


def axis_from_angles(theta: float, phi: float) -> np.ndarray:
    st= math.sin(theta)
    return np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


def axis_unitary(p: RotationParams) -> CMat:
    """exp(-i alpha n.sigma / 2)."""
    half= p.alpha / 2
    return math.cos(half) * I2 - 1j * math.sin(half) * pauli_dot(p.axis)


def generator_matrix(theta: float, phi: float) -> CMat:
    """A = -n.sigma / 2, so that U = exp(i alpha A)."""
    return -0.5 * pauli_dot(axis_from_angles(theta, phi))


def generator_eigenbasis(theta: float, phi: float) -> Tuple[CVec, CVec]:
    """Return ``(a_plus, a_minus)``, the +1/2 and -1/2 eigenvectors of A."""
    _, vecs= hermitian_eig(generator_matrix(theta, phi))
    return vecs[:, 1], vecs[:, 0]


def to_euler(p: RotationParams) -> EulerAngles:
    if abs(math.pi - abs(p.alpha)) < BOUNDARY_TOL:
        # tan(alpha/2) diverges; closed form for the half-turn
        sgn= float(np.sign(math.pi - 2 * p.theta))
        return EulerAngles(
            theta_u=math.pi - abs(math.pi - 2 * p.theta),
            phi_u=sgn * math.pi / 2 + p.phi - math.pi / 2,
            lambda_u=sgn * math.pi / 2 - p.phi + math.pi / 2,
        )

    chi= math.atan(math.tan(p.alpha / 2) * math.cos(p.theta))
    return EulerAngles(
        theta_u=2 * math.asin(math.sin(p.alpha / 2) * math.sin(p.theta)),
        phi_u=chi + p.phi - math.pi / 2,
        lambda_u=chi - p.phi + math.pi / 2,
    )


def from_euler(e: EulerAngles) -> CMat:
    c, s= math.cos(e.theta_u / 2), math.sin(e.theta_u / 2)
    return np.array([
        [c, -np.exp(1j * e.lambda_u) * s],
        [np.exp(1j * e.phi_u) * s, np.exp(1j * (e.phi_u + e.lambda_u)) * c],
    ], dtype=complex)


def r_pulse(s: PulseSpec) -> CMat:
    c, sn= math.cos(s.angle / 2), math.sin(s.angle / 2)
    return np.array([
        [c, -1j * np.exp(-1j * s.phase) * sn],
        [-1j * np.exp(1j * s.phase) * sn, c],
    ], dtype=complex)


def rz_pulses(angle: float) -> List[PulseSpec]:
    """Z rotation by ``angle`` as two pi pulses, in application order."""
    return [PulseSpec(math.pi, 0.0), PulseSpec(math.pi, angle / 2)]


def pulse_sequence(e: EulerAngles) -> List[PulseSpec]:
    """Pulses in application order (first element is played first)."""
    return rz_pulses(e.theta_u + e.phi_u + e.lambda_u) + [
        PulseSpec(math.pi / 2, e.theta_u + e.phi_u),
        PulseSpec(math.pi / 2, e.phi_u - math.pi),
    ]


def sequence_unitary(pulses: Sequence[PulseSpec]) -> CMat:
    u= I2.copy()
    for pulse in pulses:
        u= r_pulse(pulse) @ u
    return u


def random_rotation_params(rng: np.random.Generator) -> RotationParams:
    """Uniform alpha and an axis drawn uniformly from the sphere."""
    alpha= rng.uniform(-math.pi, math.pi)
    theta= math.acos(rng.uniform(-1.0, 1.0))
    phi= rng.uniform(0.0, TWO_PI)
    return RotationParams(alpha, theta, phi)
