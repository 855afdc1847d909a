import csv
import io
import json
import math

import pytest

from main import build_parser, config_from_args, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_list_systems(capsys):
    code, out, _ = run(capsys, 'list-systems')
    assert code == 0
    systems = json.loads(out)
    assert [s['name'] for s in systems] == ['disk-free', 'disk-harmonic', 'disk-linear', 'particle-r3-linear']


def test_simulate_harmonic_disk(capsys):
    code, out, err = run(capsys, 'simulate', '--system', 'disk-harmonic', '--y0', '1', '1')
    assert code == 0
    assert err == ''
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:5] == ['t', 'q_1', 'q_2', 'q_3', 'q_4']
    assert rows[0][-2:] == ['energy', 'constraint_residual']
    final = [float(value) for value in rows[-1]]
    assert final[0] == 1.0
    assert final[3] == pytest.approx(1.0, abs=1e-8)
    assert final[4] == pytest.approx(math.sin(1.0), abs=1e-8)
    assert abs(final[-1]) <= 1e-10


def test_simulate_is_deterministic(capsys):
    argv = ('simulate', '--system', 'particle-r3-linear', '--y0', '0.3', '-0.2', '--t-end', '0.5')
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_simulate_json_to_file(capsys, tmp_path):
    target = tmp_path / 'out' / 'traj.json'
    code, out, _ = run(capsys, 'simulate', '--system', 'disk-free', '--y0', '1', '0',
                       '--format', 'json', '--out', str(target))
    assert code == 0
    payload = json.loads(target.read_text())
    assert payload['system'] == 'disk-free'
    assert payload['integrator']['method'] == 'rk4'
    assert payload['rows'][-1][1] == pytest.approx(1.0, abs=1e-12)
    assert 'Simulation of disk-free' in out


def test_config_file_overlaid_by_flags(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'system': 'disk-linear', 'step': 0.01, 'energy': 2.0}))
    args = build_parser().parse_args(['simulate', '--config', str(path), '--step', '0.002'])
    config = config_from_args(args)
    assert config.system == 'disk-linear'
    assert config.step == 0.002
    assert config.energy == 2.0


def test_verify_passes(capsys):
    code, out, _ = run(capsys, 'verify-maupertuis', '--system', 'disk-linear', '--energy', '2',
                       '--y0', '1', '1')
    assert code == 0
    report = json.loads(out)
    assert report['pass'] is True
    assert report['max_position_deviation'] <= 1e-6


def test_verify_with_zero_tolerance_fails(capsys):
    code, out, err = run(capsys, 'verify-maupertuis', '--system', 'disk-harmonic', '--energy', '2',
                         '--y0', '1', '0.5', '--verify-tol', '0')
    assert code == 1
    assert json.loads(out)['pass'] is False
    assert err.startswith('FAIL ')
    assert len(err.strip().splitlines()) == 1


def test_expmap_grid(capsys):
    code, out, _ = run(capsys, 'expmap', '--system', 'disk-free', '--directions', '0.7071067811865476,0',
                       '--radii', '0', '1.4142135623730951')
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ['direction', 'radius', 'q1', 'q2', 'q3', 'q4']
    assert len(rows) == 3
    assert float(rows[-1][4]) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize('argv, code', [
    (('simulate', '--system', 'unicycle'), 'UnknownSystem'),
    (('simulate', '--system', 'disk-free', '--q0', '1', '2'), 'ValidationError'),
    (('verify-maupertuis', '--system', 'disk-harmonic'), 'ValidationError'),
    (('verify-maupertuis', '--system', 'disk-harmonic', '--energy', '0'), 'ValidationError'),
    (('simulate', '--system', 'disk-free', '--v0', '0', '1', '0', '0'), 'NotInDistribution'),
    (('expmap', '--system', 'disk-free', '--radii', '1', '0.5'), 'ValidationError'),
])
def test_invalid_input(capsys, argv, code):
    exit_code, _, err = run(capsys, *argv)
    assert exit_code == 2
    assert err.startswith(f"ERROR {code}: ")
    assert len(err.strip().splitlines()) == 1


def test_numerical_failure(capsys):
    # the steering angle turns around exactly on the zero-velocity surface
    exit_code, _, err = run(capsys, 'verify-maupertuis', '--system', 'disk-linear', '--energy', '0.5',
                            '--y0', '0', '1', '--t-end', '2')
    assert exit_code == 3
    assert err.startswith('ERROR HillBoundary: ')


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(['simulate', '--method', 'euler'])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert err.startswith('ERROR ValidationError: ')
    assert len(err.strip().splitlines()) == 1


def test_expmap_has_no_trajectory_flags(capsys):
    with pytest.raises(SystemExit) as exc:
        main(['expmap', '--system', 'disk-free', '--y0', '1', '0'])
    assert exc.value.code == 2
    assert capsys.readouterr().err.startswith('ERROR ValidationError: ')


@pytest.mark.parametrize('payload', [
    {'system': 'disk-free', 'y0': [1.0, 0.0]},
    {'system': 'disk-free', 't_end': 2.0},
])
def test_expmap_rejects_trajectory_settings_from_config(capsys, tmp_path, payload):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps(payload))
    exit_code, _, err = run(capsys, 'expmap', '--config', str(path), '--radii', '0', '1')
    assert exit_code == 2
    assert err.startswith('ERROR ValidationError: ')


def test_expression_failure_is_numerical(capsys, tmp_path):
    # the second frame component is undefined once q1 passes 1
    path = tmp_path / 'shrinking.json'
    path.write_text(json.dumps({'n': 2, 'm': 1, 'potential': '0', 'frame': [['1', 'sqrt(1 - q1)']]}))
    exit_code, _, err = run(capsys, 'simulate', '--system', str(path), '--y0', '1', '--t-end', '2')
    assert exit_code == 3
    assert err.startswith('ERROR ExpressionDomain: ')
    assert len(err.strip().splitlines()) == 1
