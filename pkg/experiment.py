"""Simulated experiment: shots, readout error, unfolding, tomography, sweep fits and estimation.

Randomness always flows from ``numpy.random.default_rng`` (PCG64) seeded with
explicit integers; Monte Carlo replicas draw from ``SeedSequence(seed).spawn``
children so the output depends only on (inputs, seed).
"""
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize
from sklearn.linear_model import LinearRegression
from tqdm import tqdm

from errors import ContractViolation, FitError, FlatLikelihoodError
from information import FisherMatrix3, fi_from_distribution
from numeric import I2, X, Y, Z, hermitian_eig, kron
from protocols import (Agnostic, NOISELESS, NoiseSpec, OutcomeDistribution, ProtocolKind,
                       protocol_distribution, protocol_family)
from rotations import RotationParams
from states import DensityMx

logger = logging.getLogger(__name__)

RNG_NAME = 'numpy.random.PCG64'

PROBE_READOUT_FIDELITY = 0.978
ANCILLA_READOUT_FIDELITY = 0.989
# the singlet leaves the disentangling gates as |11>
AGNOSTIC_READOUT_GROUPS = ((3,), (0, 1, 2))

# Measured device parameters; documentation only, nothing is simulated from them.
DEVICE_PARAMETERS = {
    'ancilla': {'qubit_freq_ghz': 4.2, 'anharmonicity_mhz': 212, 'dispersive_shift_khz': 230,
                'resonator_freq_ghz': 6.94, 'resonator_linewidth_khz': 270, 't1_us': 32, 't2_star_us': 41,
                'readout_fidelity': ANCILLA_READOUT_FIDELITY},
    'probe': {'qubit_freq_ghz': 4.65, 'anharmonicity_mhz': 180, 'dispersive_shift_khz': 250,
              'resonator_freq_ghz': 7.09, 'resonator_linewidth_khz': 206, 't1_us': 31, 't2_star_us': 39,
              'readout_fidelity': PROBE_READOUT_FIDELITY},
}

UNFOLD_TOL = 1e-10
GRID_POINTS = 256
GOLDEN_TOL = 1e-8
ESTIMATE_CACHE_SIZE = 4096
MIN_SWEEP_POINTS = 5

PAULI_LETTERS = ('I', 'X', 'Y', 'Z')
_PAULI = {'I': I2, 'X': X, 'Y': Y, 'Z': Z}
TWO_BODY_KEYS = tuple(a + b for a in 'XYZ' for b in 'XYZ')
ALL_KEYS = tuple(a + b for a in PAULI_LETTERS for b in PAULI_LETTERS if a + b != 'II')
MEASUREMENT_LABELS = ('++', '+-', '-+', '--')


# ---------------------------------------------------------------- readout

@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Row-stochastic readout model: rows are true outcomes, columns observed ones."""
    entries: np.ndarray

    def __post_init__(self):
        c= np.asarray(self.entries, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ContractViolation(f'confusion matrix must be square, got shape {c.shape}')
        if np.any(c < 0) or np.any(c > 1):
            raise ContractViolation('confusion matrix entries must lie in [0, 1]')
        if np.max(np.abs(c.sum(axis=1) - 1.0)) > 1e-12:
            raise ContractViolation(f'confusion matrix rows must sum to 1, got {c.sum(axis=1).tolist()}')
        object.__setattr__(self, 'entries', c)

    @property
    def n_outcomes(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int) -> 'ConfusionMatrix':
        return cls(np.eye(n))

    @classmethod
    def symmetric(cls, fidelity: float) -> 'ConfusionMatrix':
        if not 0.0 <= fidelity <= 1.0:
            raise ContractViolation(f'readout fidelity must lie in [0, 1], got {fidelity!r}')
        return cls(np.array([[fidelity, 1.0 - fidelity], [1.0 - fidelity, fidelity]]))

    @classmethod
    def product(cls, first: 'ConfusionMatrix', second: 'ConfusionMatrix') -> 'ConfusionMatrix':
        return cls(np.kron(first.entries, second.entries))

    def coarse_grained(self, groups: Sequence[Sequence[int]]) -> 'ConfusionMatrix':
        """Merge outcomes into ``groups``; true outcomes inside a group are weighted equally."""
        flat= sorted(i for g in groups for i in g)
        if flat != list(range(self.n_outcomes)):
            raise ContractViolation(f'groups {groups} do not partition {self.n_outcomes} outcomes')
        merged= np.array([[self.entries[np.ix_(list(src), list(dst))].sum(axis=1).mean() for dst in groups]
                          for src in groups])
        return ConfusionMatrix(merged / merged.sum(axis=1, keepdims=True))

    @classmethod
    def block_diagonal(cls, block: 'ConfusionMatrix', copies: int) -> 'ConfusionMatrix':
        return cls(np.kron(np.eye(copies), block.entries))

    @classmethod
    def default(cls, n_qubits: int = 2) -> 'ConfusionMatrix':
        """Symmetric per-qubit errors at the measured fidelities, probe first."""
        probe= cls.symmetric(PROBE_READOUT_FIDELITY)
        if n_qubits == 1:
            return probe
        if n_qubits == 2:
            return cls.product(probe, cls.symmetric(ANCILLA_READOUT_FIDELITY))
        raise ContractViolation(f'n_qubits must be 1 or 2, got {n_qubits}')

    def to_dict(self) -> Dict:
        return {'entries': self.entries.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping) -> 'ConfusionMatrix':
        return cls(np.array(data['entries'], dtype=float))

    @classmethod
    def load(cls, path: str) -> 'ConfusionMatrix':
        with open(path, 'r') as f:
            return cls.from_dict(json.load(f))

    def save(self, path: str):
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2)


def readout_for(n_outcomes: int, readout: Union[str, ConfusionMatrix, None],
                bell_pair: bool = False) -> Optional[ConfusionMatrix]:
    """Resolve 'ideal' / 'default' / a matrix to a confusion matrix over ``n_outcomes`` results.

    ``bell_pair`` marks the two-outcome singlet test, which is read out on both
    qubits; a two-qubit matrix is then coarse-grained onto singlet / not singlet.
    """
    if readout is None or readout == 'ideal':
        return None
    if readout == 'default':
        readout= ConfusionMatrix.default(2 if n_outcomes == 4 or bell_pair else 1)
    if not isinstance(readout, ConfusionMatrix):
        raise ContractViolation(f"readout must be 'ideal', 'default' or a ConfusionMatrix, got {readout!r}")
    if bell_pair and n_outcomes == 2 and readout.n_outcomes == 4:
        return readout.coarse_grained(AGNOSTIC_READOUT_GROUPS)
    if readout.n_outcomes == n_outcomes:
        return readout
    if n_outcomes % readout.n_outcomes == 0:
        return ConfusionMatrix.block_diagonal(readout, n_outcomes // readout.n_outcomes)
    raise ContractViolation(f'confusion matrix over {readout.n_outcomes} outcomes does not fit {n_outcomes}')


# ---------------------------------------------------------------- shots

@dataclass(frozen=True, eq=False)
class ShotTable:
    labels: Tuple
    counts: np.ndarray
    n_total: int
    seed: Optional[int] = None

    def __post_init__(self):
        counts= np.asarray(self.counts, dtype=np.int64)
        if len(self.labels) != counts.shape[0]:
            raise ContractViolation(f'{len(self.labels)} labels for {counts.shape[0]} counts')
        if np.any(counts < 0):
            raise ContractViolation('counts must be non-negative')
        if int(counts.sum()) != int(self.n_total):
            raise ContractViolation(f'counts sum to {int(counts.sum())}, expected {self.n_total}')
        object.__setattr__(self, 'labels', tuple(self.labels))
        object.__setattr__(self, 'counts', counts)
        object.__setattr__(self, 'n_total', int(self.n_total))

    def frequencies(self) -> OutcomeDistribution:
        if self.n_total == 0:
            raise ContractViolation('empty shot table has no frequencies')
        return OutcomeDistribution(self.labels, self.counts / self.n_total)

    def count(self, label) -> int:
        return int(self.counts[self.labels.index(label)])

    def to_dict(self) -> Dict:
        return {'labels': list(self.labels), 'counts': self.counts.tolist(),
                'n_total': self.n_total, 'seed': self.seed}

    @classmethod
    def from_dict(cls, data: Mapping) -> 'ShotTable':
        return cls(tuple(data['labels']), np.array(data['counts']), data['n_total'], data.get('seed'))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> 'ShotTable':
        return cls.from_dict(json.loads(text))


def _normalized(probs) -> np.ndarray:
    p= np.clip(np.asarray(probs, dtype=float), 0.0, None)
    return p / p.sum()


def sample_shots(d: OutcomeDistribution, n: int, seed: int) -> ShotTable:
    if n < 1:
        raise ContractViolation(f'number of shots must be >= 1, got {n}')
    rng= np.random.default_rng(seed)
    return ShotTable(d.labels, rng.multinomial(n, _normalized(d.probs)), n, seed)


def expected_shots(d: OutcomeDistribution, n: int) -> ShotTable:
    """Deterministic counts closest to n * p (largest-remainder rounding); touches no RNG."""
    if n < 1:
        raise ContractViolation(f'number of shots must be >= 1, got {n}')
    ideal= _normalized(d.probs) * n
    counts= np.floor(ideal).astype(np.int64)
    remainder= n - int(counts.sum())
    order= np.argsort(-(ideal - counts), kind='stable')
    counts[order[:remainder]]+= 1
    return ShotTable(d.labels, counts, n, None)


def draw_shots(d: OutcomeDistribution, n: int, seed: Optional[int]) -> ShotTable:
    return expected_shots(d, n) if seed is None else sample_shots(d, n, seed)


def apply_readout_noise(d: OutcomeDistribution, c: ConfusionMatrix) -> OutcomeDistribution:
    if c.n_outcomes != len(d):
        raise ContractViolation(f'confusion matrix has {c.n_outcomes} outcomes, distribution has {len(d)}')
    return OutcomeDistribution(d.labels, d.probs @ c.entries)


def bayesian_unfold(observed: Union[OutcomeDistribution, ShotTable], c: ConfusionMatrix,
                    max_iters: int = 1000) -> OutcomeDistribution:
    """Iterative Bayesian correction of readout error, starting from a uniform prior."""
    if isinstance(observed, ShotTable):
        labels, m= observed.labels, observed.counts.astype(float)
    else:
        labels, m= observed.labels, np.asarray(observed.probs, dtype=float)
    if c.n_outcomes != len(labels):
        raise ContractViolation(f'confusion matrix has {c.n_outcomes} outcomes, data has {len(labels)}')
    if m.sum() <= 0:
        raise ContractViolation('cannot unfold an all-zero observation')
    if max_iters < 1:
        raise ContractViolation(f'max_iters must be >= 1, got {max_iters}')
    m= m / m.sum()
    r= c.entries

    t= np.full(len(labels), 1.0 / len(labels))
    for it in range(max_iters):
        predicted= t @ r
        ratio= np.divide(m, predicted, out=np.zeros_like(m), where=predicted > 0)
        t_new= t * (r @ ratio)
        t_new/= t_new.sum()
        change= np.abs(t_new - t).sum()
        t= t_new
        if change < UNFOLD_TOL:
            logger.debug('unfolding converged after %d iterations', it + 1)
            break
    else:
        logger.warning('unfolding stopped at max_iters=%d with L1 change %.3e', max_iters, change)
    return OutcomeDistribution(labels, t)


# ---------------------------------------------------------------- tomography

@dataclass(frozen=True, eq=False)
class TomographyResult:
    rho: DensityMx
    expectation_table: Dict[str, float]
    fit_residual: float

    def to_dict(self) -> Dict:
        return {
            'rho_real': np.real(self.rho.mat).tolist(),
            'rho_imag': np.imag(self.rho.mat).tolist(),
            'expectation_table': dict(self.expectation_table),
            'fit_residual': self.fit_residual,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> 'TomographyResult':
        rho= np.array(data['rho_real']) + 1j * np.array(data['rho_imag'])
        return cls(DensityMx(rho), dict(data['expectation_table']), float(data['fit_residual']))


def pauli_operator(key: str) -> np.ndarray:
    return kron(_PAULI[key[0]], _PAULI[key[1]])


def pauli_expectations(rho: DensityMx) -> Dict[str, float]:
    """All 15 non-identity two-qubit Pauli expectations."""
    return {key: rho.expectation(pauli_operator(key)) for key in ALL_KEYS}


def _basis_projector(basis: str, label: str) -> np.ndarray:
    ops= []
    for letter, sign in zip(basis, label):
        s= 1.0 if sign == '+' else -1.0
        ops.append((I2 + s * _PAULI[letter]) / 2)
    return kron(*ops)


def simulate_tomography_shots(rho: DensityMx, shots: int, seed: Optional[int]) -> Dict[str, ShotTable]:
    """Sign tables for the nine product bases XX ... ZZ, one child seed per basis."""
    children= np.random.SeedSequence(seed).spawn(len(TWO_BODY_KEYS)) if seed is not None else [None] * 9
    tables= {}
    for basis, child in zip(TWO_BODY_KEYS, children):
        probs= np.array([rho.expectation(_basis_projector(basis, label)) for label in MEASUREMENT_LABELS])
        dist= OutcomeDistribution(MEASUREMENT_LABELS, probs)
        if child is None:
            tables[basis]= expected_shots(dist, shots)
        else:
            rng= np.random.default_rng(child)
            tables[basis]= ShotTable(MEASUREMENT_LABELS, rng.multinomial(shots, _normalized(dist.probs)), shots, seed)
    return tables


def expectations_from_tables(tables: Mapping[str, ShotTable]) -> Dict[str, float]:
    """Correlators from each basis; local terms averaged over the bases that contain them."""
    sign= {'+': 1.0, '-': -1.0}
    sums= {key: [] for key in ALL_KEYS}
    for basis, table in tables.items():
        if basis not in TWO_BODY_KEYS:
            raise ContractViolation(f'unknown measurement basis {basis!r}')
        freqs= table.counts / table.n_total
        two, first, second= 0.0, 0.0, 0.0
        for label, f in zip(table.labels, freqs):
            two+= sign[label[0]] * sign[label[1]] * f
            first+= sign[label[0]] * f
            second+= sign[label[1]] * f
        sums[basis].append(two)
        sums[basis[0] + 'I'].append(first)
        sums['I' + basis[1]].append(second)
    return {key: float(np.mean(values)) for key, values in sums.items() if values}


def tomography_two_qubit(expectations: Union[Mapping[str, float], Mapping[str, ShotTable]]) -> TomographyResult:
    """Linear inversion followed by projection onto the closest-spectrum density matrix.

    Accepts the 9 two-body correlators (local terms taken as 0), all 15 Pauli
    expectations, or per-basis ShotTables keyed by basis name ('XY', ...).
    """
    values= dict(expectations)
    if values and all(isinstance(v, ShotTable) for v in values.values()):
        values= expectations_from_tables(values)

    keys= set(values)
    if keys == set(TWO_BODY_KEYS):
        table= {key: float(values.get(key, 0.0)) for key in ALL_KEYS}
    elif keys == set(ALL_KEYS):
        table= {key: float(values[key]) for key in ALL_KEYS}
    else:
        raise ContractViolation(f'expected 9 correlators or 15 Pauli expectations, got {len(keys)} keys: {sorted(keys)}')
    for key, value in table.items():
        if abs(value) > 1.0 + 1e-9:
            raise ContractViolation(f'expectation {key} = {value!r} lies outside [-1, 1]')

    rho_lin= np.eye(4, dtype=complex) / 4
    for key, value in table.items():
        rho_lin= rho_lin + value * pauli_operator(key) / 4

    vals, vecs= hermitian_eig(rho_lin)
    if vals[0] < 0:
        logger.warning('clipping negative eigenvalues of the linear estimate: %s', vals[vals < 0].tolist())
    clipped= np.clip(vals, 0.0, None)
    clipped/= clipped.sum()
    rho= (vecs * clipped) @ np.conj(vecs).T
    residual= float(np.linalg.norm(rho - rho_lin))
    return TomographyResult(DensityMx(rho), table, residual)


# ---------------------------------------------------------------- sweep fits

@dataclass(frozen=True)
class SinusoidFit:
    """P(alpha) = offset + a_cos cos(alpha) + a_sin sin(alpha)."""
    offset: float
    a_cos: float
    a_sin: float
    residual: float

    @property
    def amplitude(self) -> float:
        return math.hypot(self.a_cos, self.a_sin)

    @property
    def phase(self) -> float:
        return math.atan2(self.a_sin, self.a_cos)

    def value(self, alpha: float) -> float:
        return self.offset + self.a_cos * math.cos(alpha) + self.a_sin * math.sin(alpha)

    def derivative(self, alpha: float) -> float:
        return -self.a_cos * math.sin(alpha) + self.a_sin * math.cos(alpha)


def fit_sinusoid(alphas: Sequence[float], values: Sequence[float], weights: Optional[Sequence[float]] = None) -> SinusoidFit:
    alphas= np.asarray(alphas, dtype=float)
    values= np.asarray(values, dtype=float)
    features= np.column_stack([np.cos(alphas), np.sin(alphas)])
    if np.linalg.matrix_rank(np.column_stack([np.ones_like(alphas), features])) < 3:
        raise FitError('sweep points do not determine a sinusoid')
    reg= LinearRegression().fit(features, values, sample_weight=weights)
    pred= reg.predict(features)
    residual= float(np.sqrt(np.mean((pred - values) ** 2)))
    logger.debug('sinusoid fit rms residual %.3e', residual)
    return SinusoidFit(float(reg.intercept_), float(reg.coef_[0]), float(reg.coef_[1]), residual)


def fit_fi_from_sweep(samples: Sequence[Tuple[float, Union[ShotTable, OutcomeDistribution]]], at_alpha: float,
                      readout: Optional[ConfusionMatrix] = None) -> float:
    """FI at ``at_alpha`` from per-outcome sinusoid fits: sum_k P_k'^2 / P_k.

    For two outcomes this is P'^2 (1/P + 1/(1-P)). Shot tables are weighted by
    their shot count and readout-corrected with ``bayesian_unfold`` first when a
    confusion matrix is given; exact distributions enter with unit weight.
    """
    if len(samples) < MIN_SWEEP_POINTS:
        raise ContractViolation(f'need at least {MIN_SWEEP_POINTS} sweep points, got {len(samples)}')
    alphas= np.array([a for a, _ in samples], dtype=float)
    if alphas.max() - alphas.min() < math.pi / 2 - 1e-12 or not alphas.min() <= at_alpha <= alphas.max():
        raise ContractViolation(f'sweep [{alphas.min():.3f}, {alphas.max():.3f}] must span pi/2 around {at_alpha:.3f}')

    labels= samples[0][1].labels
    rows, weights= [], []
    for _, obs in samples:
        if obs.labels != labels:
            raise ContractViolation('all sweep points must share outcome labels')
        if isinstance(obs, OutcomeDistribution):
            rows.append(obs.probs)
            weights.append(1.0)
            continue
        dist= bayesian_unfold(obs, readout) if readout is not None else obs.frequencies()
        rows.append(dist.probs)
        weights.append(float(obs.n_total))
    freqs= np.array(rows)

    info= 0.0
    for k, label in enumerate(labels):
        fit= fit_sinusoid(alphas, freqs[:, k], weights)
        p= fit.value(at_alpha)
        if not 0.0 < p < 1.0:
            if abs(fit.derivative(at_alpha)) < 1e-12 and abs(p) < 1e-9:
                continue
            raise FitError(f'fitted probability of {label!r} at alpha={at_alpha:.4f} is {p:.4f}, outside (0, 1)',
                           fit.residual)
        info+= fit.derivative(at_alpha) ** 2 / p
    return float(info)


# ---------------------------------------------------------------- estimation

@dataclass(frozen=True, eq=False)
class EstimatorResult:
    alpha_hat: float
    n_shots: int
    protocol: ProtocolKind
    log_likelihood: float
    at_boundary: bool = False


@dataclass(eq=False)
class EstimationModel:
    """Protocol, noise and the known rotation axis; alpha is the only unknown."""
    kind: ProtocolKind
    noise: NoiseSpec = NOISELESS
    theta: float = math.pi / 2
    phi: float = 0.0
    grid_points: int = GRID_POINTS
    cache_size: int = ESTIMATE_CACHE_SIZE

    def __post_init__(self):
        # LRU keyed by the count vector
        self._estimate_cached= lru_cache(maxsize=self.cache_size)(self._maximize_key)

    @property
    def alpha_range(self) -> Tuple[float, float]:
        # P0 of the agnostic protocol is even in alpha
        if isinstance(self.kind, Agnostic):
            return (0.0, math.pi)
        return (-math.pi, math.pi)

    def params(self, alpha: float) -> RotationParams:
        return RotationParams.normalized(alpha, self.theta, self.phi)

    def distribution(self, alpha: float) -> OutcomeDistribution:
        return protocol_distribution(self.kind, self.params(alpha), self.noise)

    @cached_property
    def grid(self) -> np.ndarray:
        lo, hi= self.alpha_range
        return np.linspace(lo, hi, self.grid_points)

    @cached_property
    def grid_probs(self) -> np.ndarray:
        return np.array([self.distribution(a).probs for a in self.grid])

    @cached_property
    def labels(self) -> Tuple:
        return self.distribution(self.grid[0]).labels

    def fisher_information(self, alpha: float) -> FisherMatrix3:
        return fi_from_distribution(protocol_family(self.kind, self.noise), self.params(alpha))

    def log_likelihood(self, counts: np.ndarray, alpha: float) -> float:
        probs= np.clip(self.distribution(alpha).probs, 1e-300, None)
        return float(np.dot(counts, np.log(probs)))

    def estimate(self, counts: np.ndarray) -> Tuple[float, float, bool]:
        return self._estimate_cached(tuple(int(c) for c in counts))

    def cache_info(self):
        return self._estimate_cached.cache_info()

    def _maximize_key(self, key: Tuple[int, ...]) -> Tuple[float, float, bool]:
        return self._maximize(np.asarray(key, dtype=float))

    def _maximize(self, counts: np.ndarray) -> Tuple[float, float, bool]:
        grid_ll= np.log(np.clip(self.grid_probs, 1e-300, None)) @ counts
        spread= grid_ll.max() - grid_ll.min()
        if spread <= 1e-12 * (1.0 + abs(grid_ll.max())):
            raise FlatLikelihoodError(f'log-likelihood varies by {spread:.3e} over alpha in {self.alpha_range}; '
                                      f'{self.kind.name} carries no information about alpha here')

        i= int(np.argmax(grid_ll))
        lo, hi= self.alpha_range
        neg_ll= lambda a: -self.log_likelihood(counts, float(np.clip(a, lo, hi)))
        at_boundary= i in (0, len(self.grid) - 1)
        if at_boundary:
            inner= 1 if i == 0 else len(self.grid) - 2
            bounds= tuple(sorted((self.grid[i], self.grid[inner])))
            res= optimize.minimize_scalar(neg_ll, bounds=bounds, method='bounded', options={'xatol': GOLDEN_TOL})
        else:
            try:
                res= optimize.minimize_scalar(neg_ll, bracket=(self.grid[i - 1], self.grid[i], self.grid[i + 1]),
                                              method='golden', tol=GOLDEN_TOL)
            except ValueError:
                logger.warning('golden-section bracket rejected at alpha=%.6f; using bounded search', self.grid[i])
                res= optimize.minimize_scalar(neg_ll, bounds=(self.grid[i - 1], self.grid[i + 1]),
                                              method='bounded', options={'xatol': GOLDEN_TOL})
        alpha_hat= float(np.clip(res.x, lo, hi))
        at_boundary= at_boundary and min(abs(alpha_hat - lo), abs(alpha_hat - hi)) < 1e-6
        if at_boundary:
            logger.warning('likelihood maximum on the search boundary at alpha=%.6f', alpha_hat)
        return alpha_hat, -float(res.fun), at_boundary


def mle_estimate_alpha(shots: ShotTable, model: EstimationModel) -> EstimatorResult:
    if tuple(shots.labels) != tuple(model.labels):
        raise ContractViolation(f'shot labels {shots.labels} do not match model outcomes {model.labels}')
    alpha_hat, ll, at_boundary= model.estimate(shots.counts)
    return EstimatorResult(alpha_hat, shots.n_total, model.kind, ll, at_boundary)


@dataclass(frozen=True, eq=False)
class MonteCarloResult:
    alpha_true: float
    n_shots: int
    estimates: np.ndarray
    fisher_information: float

    @property
    def replicas(self) -> int:
        return len(self.estimates)

    @property
    def variance(self) -> float:
        return float(np.var(self.estimates, ddof=1))

    @property
    def bias(self) -> float:
        return float(np.mean(self.estimates) - self.alpha_true)

    @property
    def scaled_variance(self) -> float:
        """N var(alpha_hat) I_alpha; 1 when the Cramer-Rao bound is saturated."""
        return self.n_shots * self.variance * self.fisher_information

    @property
    def variance_stderr(self) -> float:
        return self.variance * math.sqrt(2.0 / (self.replicas - 1))

    @property
    def crb(self) -> float:
        return 1.0 / (self.n_shots * self.fisher_information)


def monte_carlo_crb(model: EstimationModel, alpha_true: float, n_shots: int, replicas: int, seed: int,
                    workers: Optional[int] = None, progress: bool = False) -> MonteCarloResult:
    """Repeat sample -> MLE on independent child streams and collect the estimates in replica order."""
    if replicas < 2:
        raise ContractViolation(f'need at least 2 replicas, got {replicas}')
    probs= _normalized(model.distribution(alpha_true).probs)
    children= np.random.SeedSequence(seed).spawn(replicas)

    def one(child):
        counts= np.random.default_rng(child).multinomial(n_shots, probs)
        return model.estimate(counts)[0]

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            estimates= list(tqdm(pool.map(one, children), total=replicas, disable=not progress))
    else:
        estimates= [one(child) for child in tqdm(children, disable=not progress)]

    info= model.fisher_information(alpha_true).alpha_alpha
    return MonteCarloResult(alpha_true, n_shots, np.array(estimates), info)
