"""State constructors, Bloch-vector maps and the fidelity functional.

Two-qubit basis order is |00>, |01>, |10>, |11> with the probe as the first
tensor factor and the ancilla as the second.
"""
import enum
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from errors import ContractViolation, NotPositiveError
from numeric import (TOL, CMat, CVec, I2, X, Y, Z, as_cvec, dagger, floor_eigenvalues,
                     hermitian_eig, matrix_sqrt_psd, require_hermitian, unit_vector)

SQRT_HALF = 1.0 / math.sqrt(2.0)

TRACE_TOL = 1e-10
EIG_FLOOR = 1e-9
FIDELITY_EIG_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class PureState:
    vec: CVec

    def __post_init__(self):
        vec= as_cvec(self.vec)
        norm= np.linalg.norm(vec)
        if abs(norm - 1.0) > TOL.norm:
            raise ContractViolation(f'state vector must have unit norm, got {norm!r}')
        object.__setattr__(self, 'vec', vec)

    @property
    def dim(self) -> int:
        return self.vec.shape[0]

    def density(self) -> 'DensityMx':
        return DensityMx(np.outer(self.vec, np.conj(self.vec)))

    def overlap(self, other: 'PureState') -> complex:
        return complex(np.vdot(self.vec, other.vec))


@dataclass(frozen=True, eq=False)
class DensityMx:
    mat: CMat

    def __post_init__(self):
        mat= require_hermitian(self.mat)
        tr= np.trace(mat)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ContractViolation(f'density matrix must have unit trace, got {tr!r}')
        vals, _= hermitian_eig(mat)
        if vals[0] < -EIG_FLOOR:
            raise NotPositiveError(float(vals[0]), EIG_FLOOR)
        object.__setattr__(self, 'mat', (mat + dagger(mat)) / 2)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def expectation(self, observable: CMat) -> float:
        return float(np.real(np.trace(self.mat @ observable)))

    def evolve(self, u: CMat) -> 'DensityMx':
        return DensityMx(u @ self.mat @ dagger(u))


class BellKind(enum.Enum):
    PhiPlus = 'PhiPlus'
    PhiMinus = 'PhiMinus'
    PsiPlus = 'PsiPlus'
    PsiMinus = 'PsiMinus'


_BELL_AMPLITUDES = {
    BellKind.PhiPlus: (1, 0, 0, 1),
    BellKind.PhiMinus: (1, 0, 0, -1),
    BellKind.PsiPlus: (0, 1, 1, 0),
    BellKind.PsiMinus: (0, 1, -1, 0),
}


@dataclass(frozen=True, eq=False)
class TaggedComponent:
    p: float
    state: PureState
    tag: int
    meas_axis: np.ndarray

    def __post_init__(self):
        if self.state.dim != 2:
            raise ContractViolation('tagged components carry single-qubit probe states')
        object.__setattr__(self, 'meas_axis', unit_vector(self.meas_axis, 'meas_axis'))


@dataclass(frozen=True, eq=False)
class AncillaTaggedEnsemble:
    """Probe states |psi_j> prepared with probability p_j, each recorded by a classical tag j."""
    components: Tuple[TaggedComponent, ...] = field(default_factory=tuple)

    def __post_init__(self):
        comps= tuple(self.components)
        if not comps:
            raise ContractViolation('ensemble needs at least one component')
        probs= np.array([c.p for c in comps], dtype=float)
        if np.any(probs < 0):
            raise ContractViolation(f'component probabilities must be non-negative, got {probs.tolist()}')
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ContractViolation(f'component probabilities must sum to 1, got {probs.sum()!r}')
        tags= [c.tag for c in comps]
        if len(set(tags)) != len(tags):
            raise ContractViolation(f'tags must be distinct, got {tags}')
        object.__setattr__(self, 'components', comps)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)


def projector(vec) -> CMat:
    vec= as_cvec(vec)
    return np.outer(vec, np.conj(vec))


def bell_state(kind: BellKind) -> PureState:
    return PureState(SQRT_HALF * np.array(_BELL_AMPLITUDES[BellKind(kind)], dtype=complex))


def singlet() -> PureState:
    return bell_state(BellKind.PsiMinus)


def bloch_vector(rho: DensityMx) -> np.ndarray:
    if rho.dim != 2:
        raise ContractViolation('Bloch vectors are defined for single-qubit states')
    return np.array([rho.expectation(X), rho.expectation(Y), rho.expectation(Z)])


def density_from_bloch(r) -> DensityMx:
    r= np.asarray(r, dtype=float)
    if r.shape != (3,) or np.linalg.norm(r) > 1.0 + 1e-9:
        raise ContractViolation(f'Bloch vector must be a real 3-vector with norm <= 1, got {r!r}')
    return DensityMx((I2 + r[0] * X + r[1] * Y + r[2] * Z) / 2)


def pure_state_from_bloch(direction) -> PureState:
    """The pure qubit state whose Bloch vector is the unit vector ``direction``."""
    n= unit_vector(direction, 'direction')
    theta= math.acos(max(-1.0, min(1.0, n[2])))
    phi= math.atan2(n[1], n[0])
    return PureState(np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)]))


def fidelity(rho: DensityMx, sigma: DensityMx) -> float:
    if rho.dim != sigma.dim:
        raise ContractViolation(f'fidelity needs equal dimensions, got {rho.dim} and {sigma.dim}')
    # eigenvalues at round-off level would otherwise add ~sqrt(1e-17) each
    root= matrix_sqrt_psd(rho.mat, rel_floor=FIDELITY_EIG_FLOOR)
    inner= root @ sigma.mat @ root
    vals, _= hermitian_eig((inner + dagger(inner)) / 2)
    f= float(np.sum(np.sqrt(floor_eigenvalues(vals, FIDELITY_EIG_FLOOR)))) ** 2
    return min(max(f, 0.0), 1.0)


def depolarize(rho: DensityMx, f: float) -> DensityMx:
    """f rho + (1 - f)/3 (I - rho) on two qubits; leaves the singlet with fidelity f."""
    if not 0.0 <= f <= 1.0:
        raise ContractViolation(f'fidelity must lie in [0, 1], got {f!r}')
    if rho.dim != 4:
        raise ContractViolation('depolarize acts on two-qubit states')
    return DensityMx(f * rho.mat + (1.0 - f) / 3.0 * (np.eye(4) - rho.mat))


def depolarized_singlet(f: float) -> DensityMx:
    return depolarize(singlet().density(), f)


def rho_star() -> AncillaTaggedEnsemble:
    """Equal mixture of |z+>, |x+>, |y+>, each measured along its own axis."""
    axes= (np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
    return AncillaTaggedEnsemble(tuple(
        TaggedComponent(p=1.0 / 3.0, state=pure_state_from_bloch(axis), tag=tag, meas_axis=axis)
        for tag, axis in enumerate(axes)
    ))


def reduced_probe_state(ens: AncillaTaggedEnsemble) -> DensityMx:
    return DensityMx(sum(c.p * projector(c.state.vec) for c in ens))


def tagged_density(ens: AncillaTaggedEnsemble) -> DensityMx:
    """sum_j p_j |psi_j><psi_j| (x) |j><j| for ensembles whose tags fit on one ancilla qubit."""
    mats= []
    for c in ens:
        if c.tag not in (0, 1):
            raise ContractViolation(f'tag {c.tag} does not fit on a single ancilla qubit')
        ket= np.zeros(2, dtype=complex)
        ket[c.tag]= 1.0
        mats.append(c.p * np.kron(projector(c.state.vec), projector(ket)))
    return DensityMx(sum(mats))


def partial_trace(rho: DensityMx, keep: str = 'probe') -> DensityMx:
    if rho.dim != 4:
        raise ContractViolation('partial trace needs a two-qubit state')
    t= rho.mat.reshape(2, 2, 2, 2)
    if keep == 'probe':
        return DensityMx(np.einsum('ijkj->ik', t))
    if keep == 'ancilla':
        return DensityMx(np.einsum('jijk->ik', t))
    raise ContractViolation(f"keep must be 'probe' or 'ancilla', got {keep!r}")


def random_pure_state(rng: np.random.Generator, dim: int = 2) -> PureState:
    if dim not in (2, 4):
        raise ContractViolation(f'dim must be 2 or 4, got {dim}')
    v= rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState(v / np.linalg.norm(v))


def random_density_matrix(rng: np.random.Generator, dim: int = 2) -> DensityMx:
    """Hilbert-Schmidt random state from a square Ginibre matrix."""
    if dim not in (2, 4):
        raise ContractViolation(f'dim must be 2 or 4, got {dim}')
    g= rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m= g @ dagger(g)
    return DensityMx(m / np.trace(m).real)
