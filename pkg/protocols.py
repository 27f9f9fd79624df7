"""Sensing protocols as exact outcome-distribution families over RotationParams.

Every protocol function is pure: the same (kind, noise, params) always gives
the same OutcomeDistribution.
"""
import math
import numbers
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, ClassVar, Dict, List, Tuple, Union

import numpy as np

from errors import ContractViolation
from information import DistributionFamily, fi_from_distribution
from numeric import I2, CMat, hermitian_eig, kron, pauli_dot, unit_vector
from rotations import RotationParams, axis_unitary
from states import (AncillaTaggedEnsemble, BellKind, DensityMx, PureState, bell_state,
                    depolarize, depolarized_singlet, projector, rho_star)

ADAPTIVE = 'adaptive'

X_AXIS = np.array([1.0, 0.0, 0.0])
Y_AXIS = np.array([0.0, 1.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])

SIGNS = ('+', '-')
JOINT_LABELS = ('++', '+-', '-+', '--')
AGNOSTIC_LABELS = ('0', '1')
BELL_ORDER = (BellKind.PsiPlus, BellKind.PsiMinus, BellKind.PhiPlus, BellKind.PhiMinus)

PROB_FLOOR = -1e-12


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    labels: Tuple
    probs: np.ndarray

    def __post_init__(self):
        labels= tuple(self.labels)
        probs= np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or len(labels) != probs.shape[0]:
            raise ContractViolation(f'{len(labels)} labels for {probs.shape} probabilities')
        if len(set(labels)) != len(labels):
            raise ContractViolation(f'outcome labels must be distinct, got {labels}')
        if np.any(probs < PROB_FLOOR) or abs(probs.sum() - 1.0) > 1e-10:
            raise ContractViolation(f'not a probability vector: {probs.tolist()}')
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'probs', np.clip(probs, 0.0, 1.0))

    def __len__(self):
        return len(self.labels)

    def prob(self, label) -> float:
        return float(self.probs[self.labels.index(label)])

    def as_dict(self) -> Dict:
        return dict(zip(self.labels, self.probs.tolist()))

    def coarse_grain(self, mapping: Callable) -> 'OutcomeDistribution':
        merged: Dict = {}
        for label, prob in zip(self.labels, self.probs):
            key= mapping(label)
            merged[key]= merged.get(key, 0.0) + prob
        return OutcomeDistribution(tuple(merged), np.array(list(merged.values())))


@dataclass(frozen=True)
class NoiseSpec:
    prep_fidelity: float = 1.0
    n_entangling_gates_meas: int = 0

    def __post_init__(self):
        if not 0.0 <= self.prep_fidelity <= 1.0:
            raise ContractViolation(f'prep_fidelity must lie in [0, 1], got {self.prep_fidelity!r}')
        if self.n_entangling_gates_meas not in (0, 1):
            raise ContractViolation(f'n_entangling_gates_meas must be 0 or 1, got {self.n_entangling_gates_meas!r}')

    @property
    def noiseless(self) -> bool:
        return self.prep_fidelity == 1.0 and self.n_entangling_gates_meas == 0


NOISELESS = NoiseSpec()


class ProtocolKind:
    name: ClassVar[str] = ''


@dataclass(frozen=True, eq=False)
class SingleQubit(ProtocolKind):
    """Probe prepared along sin(lam) x + cos(lam) z and measured along ``obs_axis``."""
    name: ClassVar[str] = 'single_qubit'
    lam: float = 0.0
    obs_axis: np.ndarray = field(default_factory=lambda: Y_AXIS.copy())

    def __post_init__(self):
        if not isinstance(self.lam, numbers.Real) or not math.isfinite(self.lam):
            raise ContractViolation(f'lam must be a finite number, got {self.lam!r}')
        object.__setattr__(self, 'lam', float(self.lam))
        object.__setattr__(self, 'obs_axis', unit_vector(self.obs_axis, 'obs_axis'))


def _axis_or_adaptive(value, name):
    if isinstance(value, str):
        if value != ADAPTIVE:
            raise ContractViolation(f"{name} must be a unit 3-vector or '{ADAPTIVE}', got {value!r}")
        return value
    return unit_vector(value, name)


@dataclass(frozen=True, eq=False)
class Hindsight(ProtocolKind):
    """Singlet probe-ancilla pair; the ancilla axis may be chosen once the rotation axis is known."""
    name: ClassVar[str] = 'hindsight'
    ancilla_axis: Union[np.ndarray, str] = ADAPTIVE
    probe_axis: Union[np.ndarray, str] = field(default_factory=lambda: Y_AXIS.copy())

    def __post_init__(self):
        object.__setattr__(self, 'ancilla_axis', _axis_or_adaptive(self.ancilla_axis, 'ancilla_axis'))
        object.__setattr__(self, 'probe_axis', _axis_or_adaptive(self.probe_axis, 'probe_axis'))


@dataclass(frozen=True)
class Agnostic(ProtocolKind):
    name: ClassVar[str] = 'agnostic'


@dataclass(frozen=True)
class BellBasis(ProtocolKind):
    name: ClassVar[str] = 'bell_basis'


@dataclass(frozen=True, eq=False)
class AncillaTagged(ProtocolKind):
    name: ClassVar[str] = 'ancilla_tagged'
    ensemble: AncillaTaggedEnsemble = field(default_factory=rho_star)


def _binary(amplitude_plus: complex, amplitude_minus: complex) -> OutcomeDistribution:
    p_plus, p_minus= abs(amplitude_plus) ** 2, abs(amplitude_minus) ** 2
    total= p_plus + p_minus
    return OutcomeDistribution(SIGNS, np.array([p_plus / total, p_minus / total]))


def measure_qubit(state: PureState, axis) -> OutcomeDistribution:
    """Projective measurement of a pure qubit along ``axis``; labels '+' / '-'."""
    _, vecs= hermitian_eig(pauli_dot(unit_vector(axis)))
    return _binary(np.vdot(vecs[:, 1], state.vec), np.vdot(vecs[:, 0], state.vec))


def probe_initial_state(lam: float) -> PureState:
    """Pure state with Bloch vector sin(lam) x + cos(lam) z."""
    return PureState(np.array([math.cos(lam / 2), math.sin(lam / 2)], dtype=complex))


def single_qubit_protocol(lam: float, obs_axis, p: RotationParams) -> OutcomeDistribution:
    evolved= PureState(axis_unitary(p) @ probe_initial_state(lam).vec)
    return measure_qubit(evolved, obs_axis)


def adaptive_ancilla_axis(p: RotationParams) -> np.ndarray:
    """z turned into the plane orthogonal to the rotation axis by the shortest arc; x when the axis is z."""
    n= p.axis
    projected= Z_AXIS - np.dot(Z_AXIS, n) * n
    norm= np.linalg.norm(projected)
    if norm < 1e-12:
        return X_AXIS.copy()
    return projected / norm


def _resolve_axes(kind: Hindsight, p: RotationParams) -> Tuple[np.ndarray, np.ndarray]:
    ancilla= adaptive_ancilla_axis(p) if isinstance(kind.ancilla_axis, str) else kind.ancilla_axis
    if isinstance(kind.probe_axis, str):
        probe= np.cross(p.axis, ancilla)
        norm= np.linalg.norm(probe)
        if norm < 1e-12:
            raise ContractViolation('adaptive probe axis is undefined when the ancilla axis is parallel to the rotation axis')
        probe= probe / norm
    else:
        probe= kind.probe_axis
    return probe, ancilla


def _sign_projector(axis, sign: str) -> CMat:
    s= 1.0 if sign == '+' else -1.0
    return (I2 + s * pauli_dot(axis)) / 2


def evolve_probe(rho: DensityMx, p: RotationParams) -> DensityMx:
    """Apply U (x) 1 to a two-qubit state."""
    return rho.evolve(kron(axis_unitary(p), I2))


@lru_cache(maxsize=64)
def prepared_pair(noise: NoiseSpec) -> DensityMx:
    return depolarized_singlet(noise.prep_fidelity)


def joint_distribution(rho: DensityMx, probe_axis, ancilla_axis) -> OutcomeDistribution:
    probs= []
    for label in JOINT_LABELS:
        op= kron(_sign_projector(probe_axis, label[0]), _sign_projector(ancilla_axis, label[1]))
        probs.append(rho.expectation(op))
    return OutcomeDistribution(JOINT_LABELS, np.array(probs))


def hindsight_protocol(ancilla_axis_mode, p: RotationParams, noise: NoiseSpec = NOISELESS,
                       probe_axis=None) -> OutcomeDistribution:
    kind= Hindsight(ancilla_axis_mode, Y_AXIS if probe_axis is None else probe_axis)
    probe, ancilla= _resolve_axes(kind, p)
    return joint_distribution(evolve_probe(prepared_pair(noise), p), probe, ancilla)


def correlator(dist: OutcomeDistribution) -> float:
    """Expectation of the probe sign times the ancilla sign."""
    signs= {'+': 1.0, '-': -1.0}
    return float(sum(signs[label[0]] * signs[label[1]] * prob for label, prob in zip(dist.labels, dist.probs)))


def marginal(dist: OutcomeDistribution, position: int) -> OutcomeDistribution:
    return dist.coarse_grain(lambda label: label[position])


def agnostic_protocol(p: RotationParams, noise: NoiseSpec = NOISELESS) -> OutcomeDistribution:
    """Project the evolved pair onto the singlet; outcome '0' is the singlet answer."""
    rho= evolve_probe(prepared_pair(noise), p)
    if noise.n_entangling_gates_meas == 1:
        rho= depolarize(rho, noise.prep_fidelity)
    p0= rho.expectation(projector(bell_state(BellKind.PsiMinus).vec))
    return OutcomeDistribution(AGNOSTIC_LABELS, np.array([p0, 1.0 - p0]))


def bell_basis_protocol(p: RotationParams) -> OutcomeDistribution:
    """Bell-basis measurement of (U (x) 1)|singlet>; labels are BellKind values."""
    evolved= kron(axis_unitary(p), I2) @ bell_state(BellKind.PsiMinus).vec
    amps= [np.vdot(bell_state(kind).vec, evolved) for kind in BELL_ORDER]
    probs= np.abs(np.array(amps)) ** 2
    return OutcomeDistribution(tuple(kind.value for kind in BELL_ORDER), probs / probs.sum())


def ancilla_tagged_protocol(ens: AncillaTaggedEnsemble, p: RotationParams) -> List[Tuple[float, OutcomeDistribution]]:
    u= axis_unitary(p)
    return [(c.p, measure_qubit(PureState(u @ c.state.vec), c.meas_axis)) for c in ens]


def tagged_joint_distribution(ens: AncillaTaggedEnsemble, p: RotationParams) -> OutcomeDistribution:
    """One distribution over (tag, sign) pairs; its FI is the p_j-weighted sum of per-tag FIs."""
    labels, probs= [], []
    for c, (weight, dist) in zip(ens, ancilla_tagged_protocol(ens, p)):
        for label, prob in zip(dist.labels, dist.probs):
            labels.append(f'{c.tag}{label}')
            probs.append(weight * prob)
    return OutcomeDistribution(tuple(labels), np.array(probs))


def tagged_fi(ens: AncillaTaggedEnsemble, p: RotationParams) -> Tuple[float, List[float]]:
    """Overall alpha-FI of the tagged protocol and the per-component values."""
    per_component= []
    for index, c in enumerate(ens):
        fam= DistributionFamily(lambda q, i=index: ancilla_tagged_protocol(ens, q)[i][1], name=f'tag{c.tag}')
        per_component.append(fi_from_distribution(fam, p).alpha_alpha)
    total= sum(c.p * fi for c, fi in zip(ens, per_component))
    return total, per_component


def protocol_distribution(kind: ProtocolKind, p: RotationParams, noise: NoiseSpec = NOISELESS) -> OutcomeDistribution:
    if isinstance(kind, SingleQubit):
        return single_qubit_protocol(kind.lam, kind.obs_axis, p)
    if isinstance(kind, Hindsight):
        probe, ancilla= _resolve_axes(kind, p)
        return joint_distribution(evolve_probe(prepared_pair(noise), p), probe, ancilla)
    if isinstance(kind, Agnostic):
        return agnostic_protocol(p, noise)
    if isinstance(kind, BellBasis):
        return bell_basis_protocol(p)
    if isinstance(kind, AncillaTagged):
        return tagged_joint_distribution(kind.ensemble, p)
    raise ContractViolation(f'unknown protocol kind {kind!r}')


def protocol_family(kind: ProtocolKind, noise: NoiseSpec = NOISELESS) -> DistributionFamily:
    return DistributionFamily(lambda q: protocol_distribution(kind, q, noise), name=kind.name)


def state_family(kind: ProtocolKind, noise: NoiseSpec = NOISELESS) -> Callable[[RotationParams], DensityMx]:
    """Pre-measurement state as a function of the rotation, for QFIM computations."""
    if isinstance(kind, SingleQubit):
        start= probe_initial_state(kind.lam).density()
        return lambda q: start.evolve(axis_unitary(q))
    if isinstance(kind, (Hindsight, Agnostic, BellBasis)):
        pair= prepared_pair(NOISELESS if isinstance(kind, BellBasis) else noise)
        return lambda q: evolve_probe(pair, q)
    raise ContractViolation(f'{kind.name} is a mixture of tagged states; use tagged_state_families')


def tagged_state_families(ens: AncillaTaggedEnsemble) -> List[Tuple[float, Callable[[RotationParams], DensityMx]]]:
    families= []
    for c in ens:
        start= c.state.density()
        families.append((c.p, lambda q, s=start: s.evolve(axis_unitary(q))))
    return families


def protocol_kind_from_name(name: str, **options) -> ProtocolKind:
    kinds= {cls.name: cls for cls in (SingleQubit, Hindsight, Agnostic, BellBasis, AncillaTagged)}
    if name not in kinds:
        raise ContractViolation(f'unknown protocol {name!r}; expected one of {sorted(kinds)}')
    try:
        return kinds[name](**options)
    except TypeError as e:
        raise ContractViolation(f'bad options for {name}: {e}') from e
