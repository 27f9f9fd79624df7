import json
import math
import os

import numpy as np
import pandas as pd
import pytest

from cli import main
from config import load_config
from figures import FIDELITY_CURVES, FigureId, Observer, figure_config, qfim_report, run_figure, run_sweep
from protocols import NoiseSpec
from rotations import RotationParams

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SAMPLE = os.path.join(ROOT, 'configs', 'sample.json')


def build(tmp_path, fig_id, **overrides):
    out= run_figure(fig_id, dict(overrides, out=str(tmp_path / f'{fig_id}.csv')))
    with open(out + '.json', 'r') as f:
        sidecar= json.load(f)
    return pd.read_csv(out), sidecar


def test_figure_config_defaults_and_overrides():
    cfg= figure_config(FigureId.Fig3)
    assert cfg.out == './results/Fig3.csv'
    assert cfg.at_alpha == pytest.approx(-math.pi / 2)
    assert figure_config('Fig3', {'shots': 0}).exact


def test_fig3_exact_probabilities(tmp_path):
    df, sidecar= build(tmp_path, 'Fig3', shots=0)
    assert set(df['axis']) == {'x', 'y', 'z'}
    assert len(df) == 75
    np.testing.assert_allclose(df['p0'], np.cos(df['alpha'] / 2) ** 2, atol=1e-12)
    np.testing.assert_allclose(df['p0'], df['p0_theory'], atol=1e-15)
    for name in ('x', 'y', 'z'):
        assert sidecar['summary'][f'fi_fit_{name}'] == pytest.approx(1.0, abs=1e-6)
    assert sidecar['rng'] == 'numpy.random.PCG64'
    assert sidecar['columns'] == ['axis', 'alpha', 'p0', 'p0_theory']


def test_fig3_with_shots_tracks_theory(tmp_path):
    df, sidecar= build(tmp_path, 'Fig3', shots=3000, seed=11)
    assert np.abs(df['p0'] - df['p0_theory']).max() < 0.05
    for name in ('x', 'y', 'z'):
        assert abs(sidecar['summary'][f'fi_fit_{name}'] - 1.0) < 0.1


def test_figs3_matches_numeric_fi(tmp_path):
    df, sidecar= build(tmp_path, 'FigS3')
    assert len(df) == 300
    assert sorted(set(df['fidelity'])) == sorted(FIDELITY_CURVES)
    assert np.abs(df['fi'] - df['fi_numeric']).max() < 1e-6
    assert sidecar['summary']['fi_at_operating_point'] == pytest.approx(0.84779, abs=1e-4)


def test_fig1d_exact_landscape(tmp_path):
    df, _= build(tmp_path, 'Fig1d', shots=0)
    for lam in (0.0, -math.pi / 4):
        part= df[np.isclose(df['lambda'], lam)]
        assert len(part) == 21
        np.testing.assert_allclose(part['fi_theory'], np.sin(part['theta'] - lam) ** 2, atol=1e-6)
        np.testing.assert_allclose(part['fi_estimate'], part['fi_theory'], atol=1e-6)
        assert (part['fi_stderr'] == 0).all()


def test_observer_reads_the_singlet_test_on_both_qubits():
    agnostic= Observer(figure_config('Fig3', {'readout': 'default'}), 1).confusion(2)
    single= Observer(figure_config('Fig1c', {'readout': 'default'}), 1).confusion(2)
    assert agnostic.entries[0, 0] == pytest.approx(0.967242, abs=1e-12)
    assert single.entries[0, 0] == pytest.approx(0.978, abs=1e-12)


def test_fig1c_is_byte_identical_for_a_fixed_seed(tmp_path):
    out= str(tmp_path / 'fig1c.csv')
    contents= []
    for _ in range(2):
        run_figure('Fig1c', {'shots': 3000, 'seed': 5, 'out': out})
        with open(out, 'rb') as f, open(out + '.json', 'rb') as g:
            contents.append((f.read(), g.read()))
    assert contents[0] == contents[1]


def test_fig1c_seed_changes_the_draw(tmp_path):
    a, _= build(tmp_path, 'Fig1c', shots=3000, seed=5)
    b, _= build(tmp_path, 'Fig1c', shots=3000, seed=6)
    assert not np.array_equal(a['minus_y_measured'].values, b['minus_y_measured'].values)
    np.testing.assert_array_equal(a['minus_y_theory'].values, b['minus_y_theory'].values)


def test_exact_figures_never_touch_the_rng(tmp_path, monkeypatch):
    def forbidden(*args, **kwargs):
        raise AssertionError('random number generator used with shots=0')

    monkeypatch.setattr(np.random, 'default_rng', forbidden)
    monkeypatch.setattr(np.random, 'SeedSequence', forbidden)
    for fig_id in ('Fig1c', 'Fig2c', 'Fig3'):
        build(tmp_path, fig_id, shots=0)


def test_fig2c_and_fig2d_correlators(tmp_path):
    df, _= build(tmp_path, 'Fig2c', shots=0)
    np.testing.assert_allclose(df['yz_theory'], np.sin(df['alpha']), atol=1e-12)
    np.testing.assert_allclose(df['zz_theory'], -np.cos(df['alpha']), atol=1e-12)
    np.testing.assert_allclose(df['yz_measured'], df['yz_theory'], atol=1e-12)

    df, sidecar= build(tmp_path, 'Fig2d', shots=0)
    np.testing.assert_allclose(df['yz_theory'], 0.0, atol=1e-12)
    np.testing.assert_allclose(df['zz_theory'], -1.0, atol=1e-12)
    assert sidecar['summary']['yz_range'] == pytest.approx(0.0, abs=1e-12)


def test_fig2e_adaptive_correlator_is_full_contrast(tmp_path):
    df, _= build(tmp_path, 'Fig2e', shots=0)
    for theta in set(df['theta']):
        part= df[df['theta'] == theta]
        assert part['ya_theory'].max() - part['ya_theory'].min() == pytest.approx(2.0, abs=1e-6)


def test_fig2f_adaptive_fi_is_flat(tmp_path):
    df, _= build(tmp_path, 'Fig2f', shots=0)
    assert len(df) == 9
    np.testing.assert_allclose(df['fi_estimate'], 1.0, atol=1e-6)
    np.testing.assert_allclose(df['fi_theory'], 1.0, atol=1e-6)


def test_figs1_single_point(tmp_path):
    df, _= build(tmp_path, 'FigS1', theta=[math.pi / 5], phi=[math.pi / 9])
    assert len(df) == 1
    assert df['fi_mean'][0] == pytest.approx(2 / 3, abs=1e-6)
    assert df['qfi_mean'][0] == pytest.approx(2 / 3, abs=1e-6)
    assert len({round(df[c][0], 6) for c in ('fi_z', 'fi_x', 'fi_y')}) == 3


def test_sweep_of_sample_config():
    cfg= load_config(SAMPLE)
    df, summary= run_sweep(cfg)
    assert len(df) == 45
    labels= ('++', '+-', '-+', '--')
    np.testing.assert_allclose(df[[f'p_{k}' for k in labels]].sum(axis=1), 1.0, atol=1e-12)
    assert (df[[f'n_{k}' for k in labels]].sum(axis=1) == 3000).all()
    assert len(summary) == 5


def test_qfim_report_known_values():
    p= RotationParams(math.pi / 2, math.pi / 2, 0.0)
    bell= qfim_report('bell_basis', p, NoiseSpec())
    assert bell['alpha_bound'] == pytest.approx(1.0, abs=1e-6)
    assert bell['non_identifiable'] is None

    blind= qfim_report('single_qubit', RotationParams(1.0, 1.1, 0.3), NoiseSpec())
    assert blind['alpha_bound'] is None
    assert blind['non_identifiable']

    tagged= qfim_report('ancilla_tagged', RotationParams(1.0, 1.1, 0.3), NoiseSpec())
    assert tagged['alpha_bound'] == pytest.approx(1.5, abs=1e-6)


def test_cli_validate(tmp_path, capsys):
    assert main(['validate', SAMPLE]) == 0
    assert capsys.readouterr().out.strip().endswith(': ok')

    bad= tmp_path / 'bad.json'
    bad.write_text(json.dumps({'shots': -1}))
    assert main(['validate', str(bad)]) == 1
    assert capsys.readouterr().out.startswith('shots:')


def test_cli_figure(tmp_path, capsys):
    out= str(tmp_path / 'nested' / 'fig3.csv')
    assert main(['figure', 'Fig3', '--shots', '0', '--out', out]) == 0
    assert os.path.isfile(out) and os.path.isfile(out + '.json')
    assert 'fin!' in capsys.readouterr().out


def test_cli_figure_rejects_negative_shots(tmp_path, capsys):
    assert main(['figure', 'Fig3', '--shots', '-1', '--out', str(tmp_path / 'x.csv')]) == 2
    assert 'shots:' in capsys.readouterr().err


def test_cli_reports_unwritable_output(tmp_path, capsys):
    blocker= tmp_path / 'file'
    blocker.write_text('')
    assert main(['figure', 'FigS3', '--out', str(blocker / 'out.csv')]) == 2
    assert capsys.readouterr().err.startswith('error:')


def test_cli_qfim_and_protocol(capsys):
    assert main(['qfim', '--protocol', 'bell_basis']) == 0
    assert json.loads(capsys.readouterr().out)['alpha_bound'] == pytest.approx(1.0, abs=1e-6)

    assert main(['protocol', '--protocol', 'agnostic', '--alpha', '0', '--shots', '100', '--seed', '1']) == 0
    result= json.loads(capsys.readouterr().out)
    assert result['probs']['0'] == pytest.approx(1.0)
    assert result['counts'] == {'0': 100, '1': 0}


def test_cli_unknown_protocol(capsys):
    assert main(['qfim', '--protocol', 'teleport']) == 2
    assert capsys.readouterr().err.startswith('error:')
