"""Figure-reproduction tables: one builder per FigureId, written as CSV plus a JSON sidecar."""
import enum
import json
import logging
import math
import os
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import VERSION, ExperimentConfig, expand_grid
from experiment import (RNG_NAME, ConfusionMatrix, ShotTable, apply_readout_noise, bayesian_unfold,
                        fit_fi_from_sweep, readout_for, sample_shots)
from information import convex_qfim, fi_from_distribution, finite_fidelity_fi, schur_alpha_bound, qfim_sld
from protocols import (Agnostic, AncillaTagged, Hindsight, NoiseSpec, OutcomeDistribution, SingleQubit,
                       Y_AXIS, Z_AXIS, ADAPTIVE, adaptive_ancilla_axis, correlator,
                       protocol_distribution, protocol_family, protocol_kind_from_name, state_family,
                       tagged_fi, tagged_state_families)
from rotations import RotationParams
from states import rho_star

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
FIDELITY_CURVES = (0.25, 0.5, 0.75, 0.94, 1.0)
SINGLE_QUBIT_LAMBDAS = (0.0, -math.pi / 4)
AGNOSTIC_AXES = {'x': (math.pi / 2, 0.0), 'y': (math.pi / 2, math.pi / 2), 'z': (0.0, 0.0)}


class FigureId(enum.Enum):
    Fig1c = 'Fig1c'
    Fig1d = 'Fig1d'
    Fig2c = 'Fig2c'
    Fig2d = 'Fig2d'
    Fig2e = 'Fig2e'
    Fig2f = 'Fig2f'
    Fig3 = 'Fig3'
    FigS1 = 'FigS1'
    FigS3 = 'FigS3'


def _grid(start, stop, num):
    return {'start': start, 'stop': stop, 'num': num}


FIGURE_DEFAULTS = {
    FigureId.Fig1c: dict(protocol='single_qubit', theta=[math.pi / 2], phi=[0.0], alpha=_grid(-math.pi, math.pi, 25),
                         at_alpha=0.0, shots=3000),
    FigureId.Fig1d: dict(protocol='single_qubit', theta=_grid(0.0, math.pi, 21), phi=[0.0],
                         alpha=_grid(-math.pi / 2, math.pi / 2, 9), at_alpha=0.0, shots=3000, replicas=5),
    FigureId.Fig2c: dict(protocol='hindsight', theta=[math.pi / 2], phi=[0.0], alpha=_grid(-math.pi, math.pi, 25),
                         shots=3000),
    FigureId.Fig2d: dict(protocol='hindsight', theta=[0.0], phi=[0.0], alpha=_grid(-math.pi, math.pi, 25), shots=3000),
    FigureId.Fig2e: dict(protocol='hindsight', theta=[0.0, math.pi / 4, math.pi / 2], phi=[0.0],
                         alpha=_grid(-math.pi, math.pi, 25), shots=3000),
    FigureId.Fig2f: dict(protocol='hindsight', theta=_grid(0.0, math.pi, 9), phi=[0.0],
                         alpha=_grid(-math.pi / 2, math.pi / 2, 13), at_alpha=0.0, shots=3000, replicas=5),
    FigureId.Fig3: dict(protocol='agnostic', alpha=_grid(-math.pi, math.pi, 25), at_alpha=-math.pi / 2, shots=3000),
    FigureId.FigS1: dict(protocol='ancilla_tagged', theta=_grid(0.0, math.pi, 7),
                         phi=[k * math.pi / 4 for k in range(8)], alpha=[1e-3], at_alpha=1e-3, shots=0),
    FigureId.FigS3: dict(protocol='agnostic', alpha=_grid(0.05, math.pi - 0.05, 60), shots=0),
}

SORT_KEYS = {
    FigureId.Fig1c: ['alpha'],
    FigureId.Fig1d: ['lambda', 'theta'],
    FigureId.Fig2c: ['alpha'],
    FigureId.Fig2d: ['alpha'],
    FigureId.Fig2e: ['theta', 'alpha'],
    FigureId.Fig2f: ['theta'],
    FigureId.Fig3: ['axis', 'alpha'],
    FigureId.FigS1: ['theta', 'phi'],
    FigureId.FigS3: ['fidelity', 'alpha'],
}


def figure_config(fig_id: FigureId, overrides: Optional[Dict] = None) -> ExperimentConfig:
    base= ExperimentConfig(**FIGURE_DEFAULTS[FigureId(fig_id)])
    base.out= f'./results/{FigureId(fig_id).value}.csv'
    return base.with_overrides(**(overrides or {}))


def resolve_readout(readout) -> Union[str, ConfusionMatrix]:
    if isinstance(readout, str) and readout not in ('ideal', 'default'):
        return ConfusionMatrix.load(readout)
    if isinstance(readout, list):
        return ConfusionMatrix(np.array(readout, dtype=float))
    return readout


def noise_of(cfg: ExperimentConfig) -> NoiseSpec:
    return NoiseSpec(cfg.prep_fidelity, cfg.n_entangling_gates_meas)


class Observer:
    """Turns exact distributions into what the simulated experiment reports.

    ``shots == 0`` returns the distribution itself and never touches the RNG;
    otherwise each call draws from the next child of ``SeedSequence(seed)``,
    applies readout error and unfolds it again.
    """

    def __init__(self, cfg: ExperimentConfig, n_children: int):
        self.shots= cfg.shots
        self.readout= resolve_readout(cfg.readout)
        self.bell_pair= cfg.protocol == Agnostic.name
        self.seeds= [] if cfg.exact else [
            int(child.generate_state(1)[0]) for child in np.random.SeedSequence(cfg.seed).spawn(n_children)
        ]
        self.cursor= 0

    def confusion(self, n_outcomes: int) -> Optional[ConfusionMatrix]:
        return readout_for(n_outcomes, self.readout, self.bell_pair)

    def sample(self, dist: OutcomeDistribution) -> Union[ShotTable, OutcomeDistribution]:
        if self.shots == 0:
            return dist
        seed= self.seeds[self.cursor]
        self.cursor+= 1
        c= self.confusion(len(dist))
        noisy= apply_readout_noise(dist, c) if c is not None else dist
        return sample_shots(noisy, self.shots, seed)

    def estimate(self, obs: Union[ShotTable, OutcomeDistribution]) -> OutcomeDistribution:
        if isinstance(obs, OutcomeDistribution):
            return obs
        c= self.confusion(len(obs.labels))
        return bayesian_unfold(obs, c) if c is not None else obs.frequencies()


def _binary_expectation(dist: OutcomeDistribution) -> float:
    return dist.prob('+') - dist.prob('-')


def _mean_stderr(values: List[float]) -> Tuple[float, float]:
    values= np.asarray(values, dtype=float)
    if len(values) < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(len(values)))


def _fi_by_sweep(kind, noise, theta, phi, cfg, observer) -> Tuple[float, float]:
    """Fitted FI at cfg.at_alpha over ``replicas`` independent sweeps."""
    estimates= []
    for _ in range(1 if cfg.exact else cfg.replicas):
        samples= [(a, observer.sample(protocol_distribution(kind, RotationParams.normalized(a, theta, phi), noise)))
                  for a in cfg.alpha_grid]
        readout= observer.confusion(len(samples[0][1].labels)) if not cfg.exact else None
        estimates.append(fit_fi_from_sweep(samples, cfg.at_alpha, readout))
    return _mean_stderr(estimates)


def _fi_theory(kind, noise, theta, phi, alpha) -> float:
    return fi_from_distribution(protocol_family(kind, noise), RotationParams.normalized(alpha, theta, phi)).alpha_alpha


def build_fig1c(cfg: ExperimentConfig):
    kind= SingleQubit(lam=cfg.protocol_options.get('lam', 0.0), obs_axis=Y_AXIS)
    theta, phi= cfg.theta_grid[0], cfg.phi_grid[0]
    observer= Observer(cfg, len(cfg.alpha_grid))
    rows, samples= [], []
    for alpha in cfg.alpha_grid:
        dist= protocol_distribution(kind, RotationParams.normalized(alpha, theta, phi))
        obs= observer.sample(dist)
        samples.append((alpha, obs))
        rows.append({'alpha': alpha, 'minus_y_theory': -_binary_expectation(dist),
                     'minus_y_measured': -_binary_expectation(observer.estimate(obs))})
    readout= None if cfg.exact else observer.confusion(2)
    summary= {'fi_fit': fit_fi_from_sweep(samples, cfg.at_alpha, readout),
              'fi_theory': _fi_theory(kind, noise_of(cfg), theta, phi, cfg.at_alpha)}
    return pd.DataFrame(rows), summary


def build_fig1d(cfg: ExperimentConfig):
    lambdas= cfg.protocol_options.get('lam', SINGLE_QUBIT_LAMBDAS)
    lambdas= expand_grid(lambdas)
    phi= cfg.phi_grid[0]
    n_sweeps= len(lambdas) * len(cfg.theta_grid) * cfg.replicas * len(cfg.alpha_grid)
    observer= Observer(cfg, n_sweeps)
    rows= []
    for lam in lambdas:
        kind= SingleQubit(lam=lam, obs_axis=Y_AXIS)
        for theta in tqdm(cfg.theta_grid, desc=f'lambda={lam:.3f}', leave=False):
            estimate, stderr= _fi_by_sweep(kind, noise_of(cfg), theta, phi, cfg, observer)
            rows.append({'lambda': lam, 'theta': theta, 'fi_estimate': estimate, 'fi_stderr': stderr,
                         'fi_theory': _fi_theory(kind, noise_of(cfg), theta, phi, cfg.at_alpha)})
    df= pd.DataFrame(rows)
    summary= {f'theta_at_max_lambda_{lam:.6f}': float(df[df['lambda'] == lam].sort_values('fi_theory')['theta'].iloc[-1])
              for lam in lambdas}
    return df, summary


def _correlator_figure(cfg: ExperimentConfig):
    theta, phi= cfg.theta_grid[0], cfg.phi_grid[0]
    noise= noise_of(cfg)
    ancilla= cfg.protocol_options.get('ancilla_axis', Z_AXIS)
    probes= {'yz': Y_AXIS, 'zz': Z_AXIS}
    observer= Observer(cfg, len(cfg.alpha_grid) * len(probes))
    rows= []
    for alpha in cfg.alpha_grid:
        p= RotationParams.normalized(alpha, theta, phi)
        row= {'alpha': alpha}
        for name, probe in probes.items():
            dist= protocol_distribution(Hindsight(ancilla_axis=ancilla, probe_axis=probe), p, noise)
            row[f'{name}_theory']= correlator(dist)
            row[f'{name}_measured']= correlator(observer.estimate(observer.sample(dist)))
        rows.append(row)
    df= pd.DataFrame(rows)
    summary= {'yz_range': float(df['yz_theory'].max() - df['yz_theory'].min()),
              'zz_range': float(df['zz_theory'].max() - df['zz_theory'].min())}
    return df, summary


def build_fig2e(cfg: ExperimentConfig):
    noise= noise_of(cfg)
    phi= cfg.phi_grid[0]
    kind= Hindsight(ancilla_axis=ADAPTIVE, probe_axis=Y_AXIS)
    observer= Observer(cfg, len(cfg.theta_grid) * len(cfg.alpha_grid))
    rows= []
    for theta in cfg.theta_grid:
        for alpha in cfg.alpha_grid:
            dist= protocol_distribution(kind, RotationParams.normalized(alpha, theta, phi), noise)
            rows.append({'theta': theta, 'alpha': alpha, 'ya_theory': correlator(dist),
                         'ya_measured': correlator(observer.estimate(observer.sample(dist)))})
    summary= {f'ancilla_axis_theta_{theta:.6f}': adaptive_ancilla_axis(RotationParams.normalized(0.0, theta, phi)).tolist()
              for theta in cfg.theta_grid}
    return pd.DataFrame(rows), summary


def build_fig2f(cfg: ExperimentConfig):
    noise= noise_of(cfg)
    phi= cfg.phi_grid[0]
    kind= Hindsight(ancilla_axis=ADAPTIVE, probe_axis=Y_AXIS)
    observer= Observer(cfg, len(cfg.theta_grid) * cfg.replicas * len(cfg.alpha_grid))
    rows= []
    for theta in tqdm(cfg.theta_grid, desc='theta', leave=False):
        estimate, stderr= _fi_by_sweep(kind, noise, theta, phi, cfg, observer)
        rows.append({'theta': theta, 'fi_estimate': estimate, 'fi_stderr': stderr,
                     'fi_theory': _fi_theory(kind, noise, theta, phi, cfg.at_alpha)})
    df= pd.DataFrame(rows)
    return df, {'fi_estimate_mean': float(df['fi_estimate'].mean())}


def build_fig3(cfg: ExperimentConfig):
    noise= noise_of(cfg)
    kind= Agnostic()
    observer= Observer(cfg, len(AGNOSTIC_AXES) * len(cfg.alpha_grid))
    rows, summary= [], {}
    for name, (theta, phi) in AGNOSTIC_AXES.items():
        samples= []
        for alpha in cfg.alpha_grid:
            dist= protocol_distribution(kind, RotationParams.normalized(alpha, theta, phi), noise)
            obs= observer.sample(dist)
            samples.append((alpha, obs))
            rows.append({'axis': name, 'alpha': alpha, 'p0': observer.estimate(obs).prob('0'),
                         'p0_theory': dist.prob('0')})
        readout= None if cfg.exact else observer.confusion(2)
        summary[f'fi_fit_{name}']= fit_fi_from_sweep(samples, cfg.at_alpha, readout)
    if cfg.n_entangling_gates_meas == 0:
        summary['fi_theory']= finite_fidelity_fi(cfg.prep_fidelity, cfg.at_alpha)
    return pd.DataFrame(rows), summary


def build_figs1(cfg: ExperimentConfig):
    ens= rho_star()
    alpha= cfg.at_alpha
    families= tagged_state_families(ens)
    rows= []
    for theta in tqdm(cfg.theta_grid, desc='theta', leave=False):
        for phi in cfg.phi_grid:
            p= RotationParams.normalized(alpha, theta, phi)
            total, per_component= tagged_fi(ens, p)
            rows.append({'theta': theta, 'phi': phi, 'fi_z': per_component[0], 'fi_x': per_component[1],
                         'fi_y': per_component[2], 'fi_mean': total,
                         'qfi_mean': convex_qfim(families, p).alpha_alpha})
    df= pd.DataFrame(rows)
    return df, {'fi_mean_average': float(df['fi_mean'].mean()), 'qfi_mean_average': float(df['qfi_mean'].mean())}


def build_figs3(cfg: ExperimentConfig):
    rows= []
    for f in FIDELITY_CURVES:
        family= protocol_family(Agnostic(), NoiseSpec(f, 0))
        for alpha in cfg.alpha_grid:
            p= RotationParams.normalized(alpha, math.pi / 2, 0.0)
            rows.append({'fidelity': f, 'alpha': alpha, 'fi': finite_fidelity_fi(f, alpha),
                         'fi_numeric': fi_from_distribution(family, p).alpha_alpha})
    df= pd.DataFrame(rows)
    summary= {'fi_at_operating_point': finite_fidelity_fi(0.94, math.pi / 2),
              'max_abs_difference': float((df['fi'] - df['fi_numeric']).abs().max())}
    return df, summary


BUILDERS: Dict[FigureId, Callable] = {
    FigureId.Fig1c: build_fig1c,
    FigureId.Fig1d: build_fig1d,
    FigureId.Fig2c: _correlator_figure,
    FigureId.Fig2d: _correlator_figure,
    FigureId.Fig2e: build_fig2e,
    FigureId.Fig2f: build_fig2f,
    FigureId.Fig3: build_fig3,
    FigureId.FigS1: build_figs1,
    FigureId.FigS3: build_figs3,
}


def write_table(df: pd.DataFrame, out: str, sidecar: Dict) -> str:
    """CSV with 17 significant digits plus ``<out>.json``; both byte-stable for a fixed config."""
    out_dir= os.path.dirname(out)
    if out_dir and not os.path.exists(out_dir):
        os.makedirs(out_dir)
    df.to_csv(out, index=False, float_format=FLOAT_FORMAT)
    with open(out + '.json', 'w') as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
    return out


def run_figure(fig_id: Union[FigureId, str], overrides: Optional[Dict] = None) -> str:
    fig_id= FigureId(fig_id)
    cfg= figure_config(fig_id, overrides)
    logger.info('building %s with %s', fig_id.value, cfg)
    df, summary= BUILDERS[fig_id](cfg)
    df= df.sort_values(SORT_KEYS[fig_id], kind='mergesort').reset_index(drop=True)
    sidecar= {'figure': fig_id.value, 'version': VERSION, 'rng': RNG_NAME, 'config': cfg.to_dict(),
              'columns': list(df.columns), 'summary': summary}
    return write_table(df, cfg.out, sidecar)


def run_sweep(cfg: ExperimentConfig) -> Tuple[pd.DataFrame, Dict]:
    """Outcome probabilities (and counts when shots > 0) over the theta x phi x alpha grid."""
    kind= protocol_kind_from_name(cfg.protocol, **cfg.protocol_options)
    noise= noise_of(cfg)
    points= [(t, f, a) for t in cfg.theta_grid for f in cfg.phi_grid for a in cfg.alpha_grid]
    observer= Observer(cfg, len(points))
    rows, summary= [], {}
    for theta, phi, alpha in tqdm(points, desc='sweep', leave=False):
        dist= protocol_distribution(kind, RotationParams.normalized(alpha, theta, phi), noise)
        row= {'theta': theta, 'phi': phi, 'alpha': alpha}
        row.update({f'p_{label}': prob for label, prob in dist.as_dict().items()})
        obs= observer.sample(dist)
        if isinstance(obs, ShotTable):
            row.update({f'n_{label}': count for label, count in zip(obs.labels, obs.counts.tolist())})
        rows.append(row)
    df= pd.DataFrame(rows).sort_values(['theta', 'phi', 'alpha'], kind='mergesort').reset_index(drop=True)
    for theta in cfg.theta_grid:
        for phi in cfg.phi_grid:
            key= f'theta_{theta:.6f}_phi_{phi:.6f}'
            summary[f'fi_theory_{key}']= _fi_theory(kind, noise, theta, phi, cfg.at_alpha)
    return df, summary


def qfim_report(protocol: str, p: RotationParams, noise: NoiseSpec, options: Optional[Dict] = None) -> Dict:
    """QFIM, classical FIM of the protocol's measurement, and the single-parameter bound for alpha."""
    kind= protocol_kind_from_name(protocol, **(options or {}))
    if isinstance(kind, AncillaTagged):
        qfim= convex_qfim(tagged_state_families(kind.ensemble), p)
    else:
        qfim= qfim_sld(state_family(kind, noise), p)[0]
    fim= fi_from_distribution(protocol_family(kind, noise), p)
    bound= schur_alpha_bound(qfim)
    return {'protocol': kind.name, 'params': list(p.as_tuple()), 'qfim': qfim.entries.tolist(),
            'fim': fim.entries.tolist(), 'alpha_bound': bound if isinstance(bound, float) else None,
            'non_identifiable': None if isinstance(bound, float) else bound.reason}
