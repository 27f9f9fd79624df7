"""Experiment configuration: JSON loading, validation and CLI overrides."""
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, Union

import numpy as np

from errors import ConfigError

VERSION = '0.3.0'

PROTOCOLS = ('single_qubit', 'hindsight', 'agnostic', 'bell_basis', 'ancilla_tagged')
READOUT_KEYWORDS = ('ideal', 'default')
PROTOCOL_OPTIONS = ('lam', 'obs_axis', 'ancilla_axis', 'probe_axis')

GridSpec = Union[List[float], Dict[str, float]]


def expand_grid(spec: GridSpec) -> List[float]:
    """An explicit list, or {"start", "stop", "num"} (endpoints included)."""
    if isinstance(spec, dict):
        return np.linspace(float(spec['start']), float(spec['stop']), int(spec['num'])).tolist()
    if isinstance(spec, (int, float)):
        return [float(spec)]
    return [float(v) for v in spec]


@dataclass
class ExperimentConfig:
    protocol: str = 'agnostic'
    protocol_options: Dict[str, Any] = field(default_factory=dict)
    theta: GridSpec = field(default_factory=lambda: [math.pi / 2])
    phi: GridSpec = field(default_factory=lambda: [0.0])
    alpha: GridSpec = field(default_factory=lambda: {'start': -math.pi, 'stop': math.pi, 'num': 25})
    at_alpha: float = 0.0
    shots: int = 0
    seed: int = 42
    prep_fidelity: float = 1.0
    n_entangling_gates_meas: int = 0
    readout: Union[str, List[List[float]]] = 'ideal'
    replicas: int = 1
    out: str = './results/output.csv'

    @property
    def theta_grid(self) -> List[float]:
        return expand_grid(self.theta)

    @property
    def phi_grid(self) -> List[float]:
        return expand_grid(self.phi)

    @property
    def alpha_grid(self) -> List[float]:
        return expand_grid(self.alpha)

    @property
    def exact(self) -> bool:
        return self.shots == 0

    def with_overrides(self, **overrides) -> 'ExperimentConfig':
        known= {f.name for f in fields(self)}
        updates= {k: v for k, v in overrides.items() if v is not None and k in known}
        merged= replace(self, **updates)
        problems= validate_dict(asdict(merged))
        if problems:
            raise ConfigError(problems)
        return merged

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        problems= validate_dict(data)
        if problems:
            raise ConfigError(problems)
        return cls(**data)


def _grid_problems(name: str, spec, lo: float, hi: float, hi_open: bool = False) -> List[str]:
    try:
        values= expand_grid(spec)
    except (KeyError, TypeError, ValueError) as e:
        return [f'{name}: not a list or a {{start, stop, num}} grid ({e})']
    if not values:
        return [f'{name}: grid is empty']
    problems= []
    for v in values:
        if not math.isfinite(v):
            problems.append(f'{name}: non-finite value {v!r}')
        elif v < lo - 1e-12 or v > hi + 1e-12 or (hi_open and v >= hi):
            bracket= ')' if hi_open else ']'
            problems.append(f'{name}: value {v!r} outside [{lo:.6g}, {hi:.6g}{bracket}')
    return problems


def _is_row_stochastic(matrix) -> bool:
    try:
        m= np.array(matrix, dtype=float)
    except (TypeError, ValueError):
        return False
    return (m.ndim == 2 and m.shape[0] == m.shape[1] and np.all(m >= 0) and np.all(m <= 1)
            and np.allclose(m.sum(axis=1), 1.0, atol=1e-12))


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _axis_problems(name: str, value) -> List[str]:
    if isinstance(value, str):
        if value == 'adaptive':
            return []
        return [f"{name}: must be 'adaptive' or a unit 3-vector, got {value!r}"]
    if isinstance(value, np.ndarray):
        value= value.tolist()
    if not isinstance(value, (list, tuple)) or len(value) != 3 or not all(_is_number(c) for c in value):
        return [f'{name}: must be a unit 3-vector of finite numbers, got {value!r}']
    norm= math.sqrt(sum(c * c for c in value))
    if abs(norm - 1.0) > 1e-9:
        return [f'{name}: must have unit norm, got {norm!r}']
    return []


def _protocol_option_problems(options) -> List[str]:
    if not isinstance(options, dict):
        return [f'protocol_options: must be an object, got {options!r}']
    problems= []
    for key, value in options.items():
        name= f'protocol_options.{key}'
        if key not in PROTOCOL_OPTIONS:
            problems.append(f'protocol_options: unknown option {key!r}')
        elif key == 'lam':
            if isinstance(value, (list, dict)):
                problems.extend(_grid_problems(name, value, -math.inf, math.inf))
            elif not _is_number(value):
                problems.append(f'{name}: must be a finite number or a grid, got {value!r}')
        elif key == 'obs_axis' and isinstance(value, str):
            problems.append(f'{name}: must be a unit 3-vector, got {value!r}')
        else:
            problems.extend(_axis_problems(name, value))
    return problems


def validate_dict(data: Dict[str, Any]) -> List[str]:
    """Every problem found, as '<field>: <problem>'; empty means valid."""
    if not isinstance(data, dict):
        return ['<root>: config must be a JSON object']
    problems= []
    known= {f.name for f in fields(ExperimentConfig)}
    for key in data:
        if key not in known:
            problems.append(f'{key}: unknown key')

    if 'protocol' in data and data['protocol'] not in PROTOCOLS:
        problems.append(f"protocol: unknown protocol {data['protocol']!r}; expected one of {list(PROTOCOLS)}")
    if 'protocol_options' in data:
        problems.extend(_protocol_option_problems(data['protocol_options']))

    for name, lo, hi, hi_open in (('theta', 0.0, math.pi, False), ('phi', 0.0, 2 * math.pi, True),
                                  ('alpha', -math.pi, math.pi, False)):
        if name in data:
            problems.extend(_grid_problems(name, data[name], lo, hi, hi_open))

    def integer(name, minimum):
        if name in data:
            value= data[name]
            if not isinstance(value, int) or isinstance(value, bool):
                problems.append(f'{name}: must be an integer, got {value!r}')
            elif value < minimum:
                problems.append(f'{name}: must be >= {minimum}, got {value}')

    integer('shots', 0)
    integer('seed', 0)
    integer('replicas', 1)

    if 'n_entangling_gates_meas' in data and data['n_entangling_gates_meas'] not in (0, 1):
        problems.append(f"n_entangling_gates_meas: must be 0 or 1, got {data['n_entangling_gates_meas']!r}")
    if 'prep_fidelity' in data:
        f= data['prep_fidelity']
        if not isinstance(f, (int, float)) or not 0.0 <= f <= 1.0:
            problems.append(f'prep_fidelity: must lie in [0, 1], got {f!r}')
    if 'at_alpha' in data and not isinstance(data['at_alpha'], (int, float)):
        problems.append(f"at_alpha: must be a number, got {data['at_alpha']!r}")

    if 'readout' in data:
        r= data['readout']
        if isinstance(r, str):
            if r not in READOUT_KEYWORDS and not os.path.isfile(r):
                problems.append(f"readout: {r!r} is neither 'ideal', 'default' nor an existing file")
        elif not _is_row_stochastic(r):
            problems.append('readout: inline matrix must be square and row-stochastic')
    return problems


def validate_config(path: str) -> List[str]:
    try:
        with open(path, 'r') as f:
            text= f.read()
    except OSError as e:
        return [f'<file>: cannot read {path}: {e.strerror}']
    try:
        data= json.loads(text)
    except json.JSONDecodeError as e:
        return [f'line {e.lineno} column {e.colno}: {e.msg}']
    return validate_dict(data)


def load_overrides(path: str) -> Dict[str, Any]:
    """The validated keys of a config file, without filling defaults."""
    problems= validate_config(path)
    if problems:
        raise ConfigError(problems)
    with open(path, 'r') as f:
        return json.load(f)


def load_config(path: str) -> ExperimentConfig:
    return ExperimentConfig.from_dict(load_overrides(path))
