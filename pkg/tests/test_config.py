import json
import math
import os

import pytest

from cli import main
from config import ExperimentConfig, expand_grid, load_config, load_overrides, validate_config, validate_dict
from errors import ConfigError

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SAMPLE = os.path.join(ROOT, 'configs', 'sample.json')


def write_json(tmp_path, data, name='config.json'):
    path= tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_expand_grid_forms():
    assert expand_grid({'start': 0.0, 'stop': 1.0, 'num': 5}) == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
    assert expand_grid([0.1, 0.2]) == [0.1, 0.2]
    assert expand_grid(0.3) == [0.3]


def test_sample_config_is_valid():
    assert validate_config(SAMPLE) == []
    cfg= load_config(SAMPLE)
    assert len(cfg.theta_grid) == 5
    assert cfg.theta_grid[-1] == pytest.approx(math.pi)
    assert len(cfg.alpha_grid) == 9
    assert not cfg.exact


def test_validation_names_the_field():
    problems= validate_dict({'shots': -1, 'theta': [0.5, 4.0], 'colour': 'red'})
    assert any(p.startswith('shots:') for p in problems)
    assert any(p.startswith('theta:') for p in problems)
    assert any(p.startswith('colour:') for p in problems)
    assert len(problems) == 3


def test_phi_range_is_half_open():
    assert validate_dict({'phi': [0.0, math.pi]}) == []
    assert validate_dict({'phi': [2 * math.pi]})[0].startswith('phi:')


def test_protocol_and_option_checks():
    assert validate_dict({'protocol': 'teleport'})[0].startswith('protocol:')
    assert validate_dict({'protocol_options': {'speed': 1}})[0].startswith('protocol_options:')
    assert validate_dict({'protocol': 'single_qubit', 'protocol_options': {'lam': 0.3}}) == []


def test_protocol_options_must_be_an_object():
    problems= validate_dict({'protocol_options': 5})
    assert len(problems) == 1 and problems[0].startswith('protocol_options:')


def test_protocol_option_values_are_checked():
    assert validate_dict({'protocol_options': {'lam': 'abc'}})[0].startswith('protocol_options.lam:')
    assert validate_dict({'protocol_options': {'lam': float('nan')}})[0].startswith('protocol_options.lam:')
    assert validate_dict({'protocol_options': {'lam': {'start': 0.0, 'stop': 1.0, 'num': 3}}}) == []
    assert validate_dict({'protocol_options': {'ancilla_axis': 'sideways'}})[0].startswith('protocol_options.ancilla_axis:')
    assert validate_dict({'protocol_options': {'probe_axis': [1.0, 1.0, 0.0]}})[0].startswith('protocol_options.probe_axis:')
    assert validate_dict({'protocol_options': {'probe_axis': [0.0, 1.0]}})[0].startswith('protocol_options.probe_axis:')
    assert validate_dict({'protocol_options': {'obs_axis': 'adaptive'}})[0].startswith('protocol_options.obs_axis:')
    assert validate_dict({'protocol_options': {'ancilla_axis': 'adaptive', 'probe_axis': [0.0, 1.0, 0.0]}}) == []


def test_cli_validate_reports_bad_protocol_options(tmp_path, capsys):
    assert main(['validate', write_json(tmp_path, {'protocol_options': 5})]) == 1
    assert capsys.readouterr().out.startswith('protocol_options:')
    bad= write_json(tmp_path, {'protocol': 'single_qubit', 'protocol_options': {'lam': 'abc'}}, 'lam.json')
    assert main(['validate', bad]) == 1
    assert main(['sweep', '--config', bad, '--out', str(tmp_path / 'out.csv')]) == 2
    assert 'protocol_options.lam' in capsys.readouterr().err


def test_readout_checks(tmp_path):
    assert validate_dict({'readout': 'ideal'}) == []
    assert validate_dict({'readout': [[0.9, 0.1], [0.1, 0.9]]}) == []
    assert validate_dict({'readout': [[0.9, 0.2], [0.1, 0.9]]})[0].startswith('readout:')
    assert validate_dict({'readout': str(tmp_path / 'missing.json')})[0].startswith('readout:')


def test_integer_fields_reject_floats_and_bools():
    assert validate_dict({'shots': 10.5})[0].startswith('shots:')
    assert validate_dict({'seed': True})[0].startswith('seed:')
    assert validate_dict({'replicas': 0})[0].startswith('replicas:')
    assert validate_dict({'n_entangling_gates_meas': 2})[0].startswith('n_entangling_gates_meas:')
    assert validate_dict({'prep_fidelity': 1.2})[0].startswith('prep_fidelity:')


def test_parse_error_reports_position(tmp_path):
    path= tmp_path / 'broken.json'
    path.write_text('{\n  "shots": 10,\n  "seed": \n}')
    problems= validate_config(str(path))
    assert len(problems) == 1
    assert problems[0].startswith('line 4')


def test_missing_file_is_a_diagnostic(tmp_path):
    problems= validate_config(str(tmp_path / 'nothing.json'))
    assert problems[0].startswith('<file>:')


def test_non_object_root(tmp_path):
    assert validate_config(write_json(tmp_path, [1, 2])) == ['<root>: config must be a JSON object']


def test_with_overrides():
    cfg= ExperimentConfig().with_overrides(shots=100, seed=None, out='x.csv')
    assert cfg.shots == 100 and cfg.seed == 42 and cfg.out == 'x.csv'
    with pytest.raises(ConfigError) as info:
        ExperimentConfig().with_overrides(shots=-5)
    assert info.value.diagnostics[0].startswith('shots:')
    assert 'invalid config' in str(info.value)


def test_load_overrides_keeps_only_given_keys(tmp_path):
    path= write_json(tmp_path, {'shots': 0, 'seed': 3})
    assert load_overrides(path) == {'shots': 0, 'seed': 3}
    cfg= load_config(path)
    assert cfg.exact and cfg.protocol == 'agnostic'
    with pytest.raises(ConfigError):
        load_overrides(write_json(tmp_path, {'shots': -1}, 'bad.json'))


def test_config_dict_round_trip():
    cfg= load_config(SAMPLE)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
