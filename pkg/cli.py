"""Command-line entry point: figure tables, QFIM reports, single protocol evaluations and sweeps."""
import argparse
import json
import logging
import math
import sys
from typing import Dict, List, Optional

import wandb

from config import VERSION, ExperimentConfig, load_overrides, validate_config
from errors import SensingError
from experiment import RNG_NAME, ShotTable
from figures import FigureId, Observer, qfim_report, run_figure, run_sweep, write_table
from protocols import NoiseSpec, protocol_distribution, protocol_kind_from_name
from rotations import RotationParams

logger = logging.getLogger(__name__)


def add_run_flags(parser):
    parser.add_argument('--config', type=str, default=None,
                        help='experiment config JSON, merged under the flags below (default: None)')
    parser.add_argument('--shots', type=int, default=None,
                        help='shots per sweep point, 0 = exact probabilities (default: per figure)')
    parser.add_argument('--seed', type=int, default=None,
                        help='root seed of the numpy.random.PCG64 stream (default: 42)')
    parser.add_argument('--fidelity', type=float, default=None,
                        help='singlet preparation fidelity (default: 1.0)')
    parser.add_argument('--readout', type=str, default=None,
                        help="readout model: ideal, default or a confusion matrix JSON path (default: ideal)")
    parser.add_argument('--replicas', type=int, default=None,
                        help='independent sweeps per FI estimate (default: per figure)')
    parser.add_argument('--out', type=str, default=None,
                        help='output CSV path; a JSON sidecar is written next to it (default: ./results/<figure>.csv)')
    parser.add_argument('--wandb_project', type=str, default=None,
                        help='log the summary to this wandb project (default: off)')


def add_point_flags(parser):
    parser.add_argument('--protocol', type=str, default='agnostic',
                        help='single_qubit, hindsight, agnostic, bell_basis or ancilla_tagged (default: agnostic)')
    parser.add_argument('--alpha', type=float, default=math.pi / 2,
                        help='rotation angle (default: pi/2)')
    parser.add_argument('--theta', type=float, default=math.pi / 2,
                        help='polar angle of the rotation axis (default: pi/2)')
    parser.add_argument('--phi', type=float, default=0.0,
                        help='azimuth of the rotation axis (default: 0)')
    parser.add_argument('--fidelity', type=float, default=1.0,
                        help='singlet preparation fidelity (default: 1.0)')
    parser.add_argument('--gates', type=int, default=0,
                        help='entangling gates in the measurement, 0 or 1 (default: 0)')


def get_config(argv: Optional[List[str]] = None):
    parser = argparse.ArgumentParser(prog='phase-sensing', description=f'phase-sensing {VERSION}')
    parser.add_argument('--log_level', type=str, default='WARNING',
                        help='python logging level (default: WARNING)')
    sub= parser.add_subparsers(dest='command', required=True)

    figure= sub.add_parser('figure', help='write the data table of one figure')
    figure.add_argument('figure_id', type=str, choices=[f.value for f in FigureId])
    add_run_flags(figure)

    sweep= sub.add_parser('sweep', help='outcome probabilities over the grid of a config file')
    add_run_flags(sweep)

    qfim= sub.add_parser('qfim', help='QFIM, FIM and alpha bound of a protocol at one point')
    add_point_flags(qfim)

    protocol= sub.add_parser('protocol', help='outcome distribution of a protocol at one point')
    add_point_flags(protocol)
    protocol.add_argument('--shots', type=int, default=0,
                          help='draw this many shots as well (default: 0)')
    protocol.add_argument('--seed', type=int, default=42,
                          help='random seed (default: 42)')

    validate= sub.add_parser('validate', help='check a config file')
    validate.add_argument('path', type=str)
    return parser.parse_args(argv)


def overrides_from(args) -> Dict:
    overrides= load_overrides(args.config) if args.config else {}
    flags= {'shots': args.shots, 'seed': args.seed, 'prep_fidelity': args.fidelity, 'readout': args.readout,
            'replicas': args.replicas, 'out': args.out}
    overrides.update({k: v for k, v in flags.items() if v is not None})
    return overrides


def report(args, name: str, out: str, summary_path: str):
    if not args.wandb_project:
        return
    with open(summary_path, 'r') as f:
        sidecar= json.load(f)
    run= wandb.init(project= args.wandb_project, name= name, config= sidecar['config'])
    run.log({k: v for k, v in sidecar['summary'].items() if isinstance(v, (int, float))})
    run.summary['table']= out
    run.finish()


def cmd_figure(args) -> int:
    print(f'figure {args.figure_id} start!')
    out= run_figure(args.figure_id, overrides_from(args))
    report(args, args.figure_id, out, out + '.json')
    print(f'figure {args.figure_id} fin! -> {out}')
    return 0


def cmd_sweep(args) -> int:
    cfg= ExperimentConfig().with_overrides(**overrides_from(args))
    print(f'sweep {cfg.protocol} start!')
    df, summary= run_sweep(cfg)
    sidecar= {'figure': None, 'version': VERSION, 'rng': RNG_NAME, 'config': cfg.to_dict(),
              'columns': list(df.columns), 'summary': summary}
    out= write_table(df, cfg.out, sidecar)
    report(args, f'sweep_{cfg.protocol}', out, out + '.json')
    print(f'sweep {cfg.protocol} fin! -> {out}')
    return 0


def _point(args):
    return RotationParams.normalized(args.alpha, args.theta, args.phi), NoiseSpec(args.fidelity, args.gates)


def cmd_qfim(args) -> int:
    p, noise= _point(args)
    print(json.dumps(qfim_report(args.protocol, p, noise), indent=2))
    return 0


def cmd_protocol(args) -> int:
    p, noise= _point(args)
    dist= protocol_distribution(protocol_kind_from_name(args.protocol), p, noise)
    result= {'protocol': args.protocol, 'params': list(p.as_tuple()), 'probs': dist.as_dict()}
    if args.shots > 0:
        cfg= ExperimentConfig(protocol=args.protocol, shots=args.shots, seed=args.seed,
                              prep_fidelity=args.fidelity, n_entangling_gates_meas=args.gates)
        table= Observer(cfg, 1).sample(dist)
        if isinstance(table, ShotTable):
            result['counts']= dict(zip(table.labels, table.counts.tolist()))
    print(json.dumps(result, indent=2))
    return 0


def cmd_validate(args) -> int:
    problems= validate_config(args.path)
    for problem in problems:
        print(problem)
    if not problems:
        print(f'{args.path}: ok')
    return 1 if problems else 0


COMMANDS = {
    'figure': cmd_figure,
    'sweep': cmd_sweep,
    'qfim': cmd_qfim,
    'protocol': cmd_protocol,
    'validate': cmd_validate,
}


def main(argv: Optional[List[str]] = None) -> int:
    args= get_config(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper(), logging.WARNING),
                        format='%(asctime)s %(name)s %(levelname)s %(message)s')
    try:
        return COMMANDS[args.command](args)
    except SensingError as e:
        print(f'error: {e}', file=sys.stderr)
        return 2
    except OSError as e:
        print(f'error: {e.strerror}: {e.filename}', file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
