"""Dense complex linear algebra for one- and two-qubit operators.

Everything here works on ``numpy.ndarray`` values of dtype ``complex128`` and
shape (2, 2) / (4, 4) for operators, (2,) / (4,) for state vectors. Functions
never mutate their inputs.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from errors import ContractViolation, ConvergenceError, NotHermitianError, NotPositiveError

logger = logging.getLogger(__name__)

CMat = np.ndarray
CVec = np.ndarray

DIMS = (2, 4)


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-10
    norm: float = 1e-12
    psd: float = 1e-10
    jacobi_offdiag: float = 1e-13
    jacobi_max_sweeps: int = 100
    global_phase: float = 1e-9
    canonical_phase: float = 1e-12


TOL = Tolerances()

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {'I': I2, 'X': X, 'Y': Y, 'Z': Z}


def as_cmat(m) -> CMat:
    arr= np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] not in DIMS:
        raise ContractViolation(f'expected a square matrix of dimension 2 or 4, got shape {arr.shape}')
    if not np.all(np.isfinite(arr)):
        raise ContractViolation('matrix has non-finite entries')
    return arr


def as_cvec(v) -> CVec:
    arr= np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.shape[0] not in DIMS:
        raise ContractViolation(f'expected a vector of dimension 2 or 4, got shape {arr.shape}')
    if not np.all(np.isfinite(arr)):
        raise ContractViolation('vector has non-finite entries')
    return arr


def dagger(m: CMat) -> CMat:
    return np.conj(np.asarray(m)).T


def trace(m: CMat) -> complex:
    return complex(np.trace(as_cmat(m)))


def kron(a: CMat, b: CMat) -> CMat:
    """Tensor product of two single-qubit operators; ``a`` acts on the first (probe) factor."""
    a, b= as_cmat(a), as_cmat(b)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ContractViolation(f'kron takes two dim-2 operators, got {a.shape} and {b.shape}')
    return np.kron(a, b)


def kron_vec(u: CVec, v: CVec) -> CVec:
    u, v= as_cvec(u), as_cvec(v)
    if u.shape != (2,) or v.shape != (2,):
        raise ContractViolation(f'kron_vec takes two dim-2 vectors, got {u.shape} and {v.shape}')
    return np.kron(u, v)


def hermiticity_error(m: CMat) -> float:
    m= np.asarray(m, dtype=complex)
    return float(np.max(np.abs(m - dagger(m))))


def is_hermitian(m: CMat, tol: float = TOL.hermitian) -> bool:
    return hermiticity_error(m) <= tol


def require_hermitian(m, tol: float = TOL.hermitian) -> CMat:
    m= as_cmat(m)
    err= hermiticity_error(m)
    if err > tol:
        raise NotHermitianError(err, tol)
    return m


def is_unitary(u: CMat, tol: float = TOL.hermitian) -> bool:
    u= as_cmat(u)
    return float(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0])))) <= tol


def canonical_phase(v: CVec) -> CVec:
    """Rotate the global phase so the first non-negligible component is real and positive."""
    v= np.asarray(v, dtype=complex)
    for comp in v:
        if abs(comp) > TOL.canonical_phase:
            return v * (abs(comp) / comp)
    return v


def _eig2(m: CMat) -> Tuple[np.ndarray, CMat]:
    a, d= m[0, 0].real, m[1, 1].real
    b= m[0, 1]
    mean, delta= (a + d) / 2, (a - d) / 2
    r= np.hypot(delta, abs(b))
    if r == 0.0:
        return np.array([mean, mean]), np.eye(2, dtype=complex)

    if delta >= 0:
        v_plus= np.array([r + delta, np.conj(b)], dtype=complex)
    else:
        v_plus= np.array([b, r - delta], dtype=complex)
    v_plus/= np.linalg.norm(v_plus)
    v_minus= np.array([-np.conj(v_plus[1]), np.conj(v_plus[0])])
    return np.array([mean - r, mean + r]), np.column_stack([v_minus, v_plus])


def _offdiag_max(a: CMat) -> float:
    return float(np.max(np.abs(a - np.diag(np.diag(a)))))


def _eig_jacobi(m: CMat) -> Tuple[np.ndarray, CMat]:
    n= m.shape[0]
    a= m.copy()
    v= np.eye(n, dtype=complex)
    scale= max(1.0, float(np.max(np.abs(m))))
    tol= TOL.jacobi_offdiag * scale

    for sweep in range(TOL.jacobi_max_sweeps):
        if _offdiag_max(a) < tol:
            logger.debug('jacobi converged after %d sweeps', sweep)
            return np.real(np.diag(a)).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq= a[p, q]
                mag= abs(apq)
                if mag < tol * 1e-3:
                    continue
                # unit phase making a[p, q] real, then a real Jacobi rotation
                phase= apq / mag
                tau= (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if tau == 0.0:
                    t= 1.0
                else:
                    t= np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c= 1.0 / np.sqrt(1.0 + t * t)
                s= t * c

                j= np.eye(n, dtype=complex)
                j[p, p]= c
                j[p, q]= s
                j[q, p]= -s * np.conj(phase)
                j[q, q]= c * np.conj(phase)
                a= dagger(j) @ a @ j
                a= (a + dagger(a)) / 2
                v= v @ j

    if _offdiag_max(a) < tol:
        return np.real(np.diag(a)).copy(), v
    raise ConvergenceError(f'jacobi did not converge within {TOL.jacobi_max_sweeps} sweeps '
                           f'(off-diagonal max {_offdiag_max(a):.3e})')


def hermitian_eig(m: CMat) -> Tuple[np.ndarray, CMat]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with real eigenvalues in ascending
    order and the eigenvectors as the columns of a unitary matrix, each with its
    first non-negligible component real and positive.
    """
    m= require_hermitian(m)
    herm= (m + dagger(m)) / 2
    if herm.shape[0] == 2:
        vals, vecs= _eig2(herm)
    else:
        vals, vecs= _eig_jacobi(herm)

    order= np.argsort(vals, kind='stable')
    vals= vals[order]
    vecs= vecs[:, order]
    vecs= np.column_stack([canonical_phase(vecs[:, k]) for k in range(vecs.shape[1])])
    return vals, vecs


def floor_eigenvalues(vals: np.ndarray, rel_floor: float) -> np.ndarray:
    """Clip negatives to zero and zero every eigenvalue at or below ``rel_floor`` times the largest."""
    vals= np.clip(np.asarray(vals, dtype=float), 0.0, None)
    if rel_floor > 0.0 and vals.size:
        vals[vals <= rel_floor * vals.max()]= 0.0
    return vals


def matrix_sqrt_psd(m: CMat, rel_floor: float = 0.0) -> CMat:
    vals, vecs= hermitian_eig(m)
    if vals[0] < -TOL.psd:
        raise NotPositiveError(float(vals[0]), TOL.psd)
    roots= np.sqrt(floor_eigenvalues(vals, rel_floor))
    return (vecs * roots) @ dagger(vecs)


def expm_generator(g: CMat, t: float) -> CMat:
    """exp(-i t g) for Hermitian ``g``, through the eigendecomposition of ``g``."""
    vals, vecs= hermitian_eig(g)
    return (vecs * np.exp(-1j * t * vals)) @ dagger(vecs)


def equal_up_to_global_phase(u: CMat, v: CMat, tol: float = TOL.global_phase) -> bool:
    u, v= as_cmat(u), as_cmat(v)
    if u.shape != v.shape:
        return False
    return abs(abs(np.trace(dagger(u) @ v)) - u.shape[0]) <= tol


def pauli_dot(axis) -> CMat:
    """n.sigma for a real 3-vector ``axis``."""
    nx, ny, nz= (float(c) for c in axis)
    return nx * X + ny * Y + nz * Z


def unit_vector(v, name: str = 'axis') -> np.ndarray:
    v= np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ContractViolation(f'{name} must be a finite real 3-vector, got {v!r}')
    norm= np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-9:
        raise ContractViolation(f'{name} must have unit norm, got |{name}| = {norm!r}')
    return v / norm
