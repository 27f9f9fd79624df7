"""Classical and quantum Fisher information over the rotation parameters (alpha, theta, phi)."""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Tuple, Union

import numpy as np

from errors import ContractViolation, FIDivergenceError, NonIdentifiable, PoleError
from numeric import CMat, dagger, hermitian_eig, is_hermitian
from rotations import RotationParams, axis_unitary
from states import DensityMx, PureState

logger = logging.getLogger(__name__)

FD_STEP = 1e-5
ZERO_PROB = 1e-12
ZERO_DERIVATIVE = 1e-9
SLD_SUPPORT = 1e-10
QFI_FLOOR = -1e-8
BLOCK_EIG_MIN = 1e-10
DECOUPLED_TOL = 1e-9
SCHUR_MIN = 1e-7
POLE_TOL = 1e-12

QUAD_COS_NODES = 32
QUAD_PHI_NODES = 64


@dataclass(frozen=True, eq=False)
class FisherMatrix3:
    """Real symmetric PSD 3x3 matrix in parameter order (alpha, theta, phi)."""
    entries: np.ndarray

    def __post_init__(self):
        m= np.asarray(self.entries, dtype=float)
        if m.shape != (3, 3) or not np.all(np.isfinite(m)):
            raise ContractViolation(f'Fisher matrix must be a finite 3x3 array, got shape {m.shape}')
        if np.max(np.abs(m - m.T)) > 1e-9:
            raise ContractViolation('Fisher matrix is not symmetric within 1e-9')
        m= (m + m.T) / 2
        lowest= float(np.linalg.eigvalsh(m)[0])
        if lowest < -1e-8:
            raise ContractViolation(f'Fisher matrix is not PSD: eigenvalue {lowest:.3e}')
        object.__setattr__(self, 'entries', m)

    @property
    def alpha_alpha(self) -> float:
        return float(self.entries[0, 0])

    def __getitem__(self, idx):
        return self.entries[idx]

    def __add__(self, other: 'FisherMatrix3') -> 'FisherMatrix3':
        return FisherMatrix3(self.entries + other.entries)

    def scaled(self, weight: float) -> 'FisherMatrix3':
        return FisherMatrix3(weight * self.entries)

    @classmethod
    def zeros(cls) -> 'FisherMatrix3':
        return cls(np.zeros((3, 3)))


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Risk weights over (alpha, theta, phi); the default puts all weight on alpha."""
    entries: np.ndarray = field(default_factory=lambda: np.diag([1.0, 0.0, 0.0]))

    def __post_init__(self):
        w= np.asarray(self.entries, dtype=float)
        if w.shape != (3, 3) or np.max(np.abs(w - w.T)) > 1e-12:
            raise ContractViolation('weight matrix must be a symmetric 3x3 array')
        if np.linalg.eigvalsh(w)[0] < -1e-12:
            raise ContractViolation('weight matrix must be positive semidefinite')
        object.__setattr__(self, 'entries', w)

    def is_alpha_only(self) -> bool:
        return np.allclose(self.entries, np.diag([self.entries[0, 0], 0.0, 0.0]))

    def bound(self, info: FisherMatrix3, n_shots: int = 1) -> Union[float, NonIdentifiable]:
        """Scalar risk lower bound tr(W I^-1) / N."""
        if n_shots < 1:
            raise ContractViolation(f'n_shots must be >= 1, got {n_shots}')
        if self.is_alpha_only():
            inv11= schur_alpha_bound(info)
            if isinstance(inv11, NonIdentifiable):
                return inv11
            return self.entries[0, 0] * inv11 / n_shots
        if np.linalg.eigvalsh(info.entries)[0] <= BLOCK_EIG_MIN:
            return NonIdentifiable('Fisher matrix is singular and the weight involves the axis angles')
        return float(np.trace(self.entries @ np.linalg.inv(info.entries))) / n_shots


@dataclass(frozen=True, eq=False)
class SLDTriple:
    lambda_alpha: CMat
    lambda_theta: CMat
    lambda_phi: CMat

    def __post_init__(self):
        for name in ('lambda_alpha', 'lambda_theta', 'lambda_phi'):
            if not is_hermitian(getattr(self, name), 1e-9):
                raise ContractViolation(f'{name} is not Hermitian within 1e-9')

    def __iter__(self):
        return iter((self.lambda_alpha, self.lambda_theta, self.lambda_phi))


class DistributionFamily:
    """Wraps a deterministic map RotationParams -> outcome distribution and checks every output."""

    def __init__(self, evaluator: Callable, name: str = ''):
        self.evaluator= evaluator
        self.name= name or getattr(evaluator, '__name__', 'family')

    def __call__(self, p: RotationParams):
        dist= self.evaluator(p)
        probs= np.asarray(dist.probs, dtype=float)
        if np.any(probs < -1e-12) or np.any(probs > 1 + 1e-12) or abs(probs.sum() - 1.0) > 1e-10:
            raise ContractViolation(f'{self.name} returned an invalid distribution at {p}: {probs.tolist()}')
        return dist

    def __repr__(self):
        return f'DistributionFamily({self.name})'


def _central_difference(fn: Callable, at: RotationParams, index: int, h: float = FD_STEP):
    return (fn(at.shifted(index, h)) - fn(at.shifted(index, -h))) / (2 * h)


def fi_from_distribution(fam: Callable, at: RotationParams) -> FisherMatrix3:
    """Classical FIM sum_k (d_i p_k)(d_j p_k) / p_k with central differences."""
    base= fam(at)
    labels= list(base.labels)
    probs= np.asarray(base.probs, dtype=float)

    def probs_at(q: RotationParams) -> np.ndarray:
        dist= fam(q)
        if list(dist.labels) != labels:
            raise ContractViolation(f'outcome labels changed between evaluations: {labels} vs {list(dist.labels)}')
        return np.asarray(dist.probs, dtype=float)

    grads= np.array([_central_difference(probs_at, at, i) for i in range(3)])
    info= np.zeros((3, 3))
    for k, label in enumerate(labels):
        dp= grads[:, k]
        if probs[k] < ZERO_PROB:
            if np.max(np.abs(dp)) >= ZERO_DERIVATIVE:
                raise FIDivergenceError(label, probs[k], float(np.max(np.abs(dp))))
            logger.debug('outcome %r has vanishing probability and derivative; skipped', label)
            continue
        info+= np.outer(dp, dp) / probs[k]
    return FisherMatrix3(info)


def qfi_pure(family: Callable[[RotationParams], PureState], at: RotationParams) -> float:
    """4 (<d psi|d psi> - |<psi|d psi>|^2) for the alpha derivative of a pure-state family."""
    psi= family(at).vec

    def aligned(q: RotationParams) -> np.ndarray:
        vec= family(q).vec
        ov= np.vdot(vec, psi)
        if abs(ov) > 0:
            vec= vec * (ov / abs(ov))
        return vec

    dpsi= (aligned(at.shifted(0, FD_STEP)) - aligned(at.shifted(0, -FD_STEP))) / (2 * FD_STEP)
    value= 4.0 * (np.vdot(dpsi, dpsi).real - abs(np.vdot(psi, dpsi)) ** 2)
    if value < QFI_FLOOR:
        logger.warning('pure-state QFI came out at %.3e; clipped to 0', value)
    return max(float(value), 0.0)


def symmetric_log_derivative(rho: CMat, drho: CMat) -> CMat:
    """Solve d rho = (L rho + rho L) / 2 in the eigenbasis of rho; zero on the kernel."""
    vals, vecs= hermitian_eig(rho)
    d= dagger(vecs) @ drho @ vecs
    denom= vals[:, None] + vals[None, :]
    support= denom >= SLD_SUPPORT
    sld= np.zeros_like(d)
    sld[support]= 2.0 * d[support] / denom[support]
    sld= vecs @ sld @ dagger(vecs)
    return (sld + dagger(sld)) / 2


def sld_residual(rho: CMat, drho: CMat, sld: CMat) -> float:
    return float(np.max(np.abs(drho - (sld @ rho + rho @ sld) / 2)))


def qfim_sld(family: Callable[[RotationParams], DensityMx], at: RotationParams) -> Tuple[FisherMatrix3, SLDTriple]:
    rho= family(at).mat
    drhos= [_central_difference(lambda q: family(q).mat, at, i) for i in range(3)]
    slds= [symmetric_log_derivative(rho, d) for d in drhos]

    info= np.zeros((3, 3))
    for i in range(3):
        for j in range(i, 3):
            value= 0.5 * np.trace(slds[i] @ drhos[j] + slds[j] @ drhos[i]).real
            info[i, j]= info[j, i]= value
    return FisherMatrix3(info), SLDTriple(*slds)


def convex_qfim(weighted_families: Iterable[Tuple[float, Callable]], at: RotationParams) -> FisherMatrix3:
    """QFIM of a tag-distinguishable mixture: sum_j p_j QFIM_j."""
    total= np.zeros((3, 3))
    for weight, family in weighted_families:
        total+= weight * qfim_sld(family, at)[0].entries
    return FisherMatrix3(total)


def schur_alpha_bound(m: FisherMatrix3) -> Union[float, NonIdentifiable]:
    """(I^-1)_11 through the Schur complement of the axis block."""
    info= m.entries
    i_aa= info[0, 0]
    coupling= info[1:, 0]
    block= info[1:, 1:]

    if np.linalg.eigvalsh(block)[0] > BLOCK_EIG_MIN:
        schur= i_aa - coupling @ np.linalg.solve(block, coupling)
        if schur <= SCHUR_MIN * max(1.0, i_aa):
            return NonIdentifiable(f'Schur complement {schur:.3e} vanishes; alpha is not separable from the axis')
        return float(1.0 / schur)

    if np.max(np.abs(coupling)) <= DECOUPLED_TOL:
        if i_aa <= ZERO_PROB:
            return NonIdentifiable('axis block is singular and the alpha information vanishes')
        return float(1.0 / i_aa)
    return NonIdentifiable('axis block is singular and coupled to alpha')


def cramer_rao_bound(info: float, n_shots: int) -> float:
    """Variance floor 1 / (N I) for an unbiased estimator of alpha."""
    if n_shots < 1:
        raise ContractViolation(f'n_shots must be >= 1, got {n_shots}')
    if info <= 0:
        return math.inf
    return 1.0 / (n_shots * info)


def sphere_nodes(n_cos: int = QUAD_COS_NODES, n_phi: int = QUAD_PHI_NODES):
    """Product rule on the sphere: Gauss-Legendre in cos(theta), trapezoid in phi. Weights sum to 1."""
    x, w= np.polynomial.legendre.leggauss(n_cos)
    phis= 2 * math.pi * np.arange(n_phi) / n_phi
    nodes= []
    for xi, wi in zip(x, w):
        theta= math.acos(xi)
        for phi in phis:
            nodes.append((theta, float(phi), wi / (2.0 * n_phi)))
    return nodes


def sphere_average_qfi(probe: PureState, alpha: float, n_cos: int = QUAD_COS_NODES,
                       n_phi: int = QUAD_PHI_NODES) -> float:
    """Average over rotation axes of the alpha-QFI of a single-qubit probe."""
    if probe.dim != 2:
        raise ContractViolation('sphere_average_qfi takes a single-qubit probe')

    def family(q: RotationParams) -> PureState:
        return PureState(axis_unitary(q) @ probe.vec)

    total= 0.0
    for theta, phi, weight in sphere_nodes(n_cos, n_phi):
        total+= weight * qfi_pure(family, RotationParams.normalized(alpha, theta, phi))
    return total


def finite_fidelity_fi(f: float, alpha: float) -> float:
    """FI of the agnostic protocol when the singlet is prepared with fidelity f."""
    if not 0.0 <= f <= 1.0:
        raise ContractViolation(f'fidelity must lie in [0, 1], got {f!r}')
    c= math.cos(alpha)
    lower= -5.0 + 2.0 * f + (4.0 * f - 1.0) * c
    upper= 1.0 + 2.0 * f + (4.0 * f - 1.0) * c
    if abs(lower) <= POLE_TOL or abs(upper) <= POLE_TOL:
        raise PoleError(f, alpha)
    return -((1.0 - 4.0 * f) ** 2) * math.sin(alpha) ** 2 / (lower * upper)
