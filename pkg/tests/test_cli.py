import csv
import io
import math

import pytest

import cli
from cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, RunConfig, run_cli


def _csv(text):
    lines = [line for line in text.splitlines() if not line.startswith('#')]
    return list(csv.reader(io.StringIO('\n'.join(lines))))


def test_defaults():
    cfg = RunConfig()
    assert (cfg.samples, cfg.depth, cfg.seed, cfg.format) == (201, 4, 42, 'csv')


def test_config_file_then_flags(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# overrides\nseed = 7\ndepth = 2\ntol = tree_levels=0.5, slope_identity=0.25\n")
    args = cli.build_parser().parse_args(['tree', '--config', str(path), '--depth', '3'])
    cfg = cli.make_config(args)
    assert cfg.seed == 7
    assert cfg.depth == 3
    assert cfg.tolerances == {'tree_levels': 0.5, 'slope_identity': 0.25}


def test_unknown_config_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("colour = blue\n")
    assert run_cli(['tree', '--config', str(path)]) == EXIT_USAGE


def test_usage_errors():
    assert run_cli([]) == EXIT_USAGE
    assert run_cli(['dance']) == EXIT_USAGE
    assert run_cli(['profile']) == EXIT_USAGE
    assert run_cli(['tree', '--depth', '31']) == EXIT_USAGE
    assert run_cli(['profile', '--energy', '-1', '--format', 'text']) == EXIT_USAGE
    assert run_cli(['flow', '--field', 'H']) == EXIT_USAGE
    assert run_cli(['verify', '--tol', 'no_such_check=1']) == EXIT_USAGE


def test_tree_text(capsys):
    assert run_cli(['tree', '--depth', '3', '--format', 'text']) == EXIT_OK
    out = capsys.readouterr().out
    assert "1/4  2/5  3/5  3/4  4/3  5/3  5/2  4/1" in out
    assert "5/3  7/3  4/1  7/1  -7/1  -4/1  -7/3  -5/3" in out


def test_tree_depth_zero_csv(capsys):
    assert run_cli(['tree', '--depth', '0']) == EXIT_OK
    rows = _csv(capsys.readouterr().out)
    assert rows[1][3:] == ['1', '1', '∞']


def test_profile_below_critical_energy(tmp_path):
    out = tmp_path / "profile.csv"
    assert run_cli(['profile', '--energy', '-2', '--output', str(out)]) == EXIT_OK
    rows = _csv(out.read_text())
    corners = {row[2]: float(row[0]) for row in rows[1:] if row[2].startswith('corner')}
    assert corners['corner_a'] == pytest.approx(0.2258, abs=1e-4)
    assert corners['corner_b'] == pytest.approx(0.2985, abs=1e-4)
    components = {row[2] for row in rows[1:]}
    assert {'bounded', 'unbounded'} <= components


def test_profile_above_critical_energy(capsys):
    assert run_cli(['profile', '--energy', '-1']) == EXIT_OK
    components = {row[2] for row in _csv(capsys.readouterr().out)[1:]}
    assert 'connected' in components
    assert 'bounded' not in components


def test_profile_at_large_energy_widens_window(capsys):
    assert run_cli(['profile', '--energy', '10']) == EXIT_OK
    rows = _csv(capsys.readouterr().out)[1:]
    components = {row[2] for row in rows}
    assert 'connected' in components
    assert 'bounded' not in components
    assert max(float(row[0]) for row in rows) == pytest.approx(2.0 * 5.0025, abs=1e-3)


def test_profile_svg_with_csv_alongside(tmp_path):
    svg = tmp_path / "critical.svg"
    assert run_cli(['profile', '--energy', '-1.5', '--format', 'svg', '--output', str(svg)]) == EXIT_OK
    assert b"<svg" in svg.read_bytes()
    rows = _csv((tmp_path / "critical.csv").read_text())
    assert rows[0] == ['t', 'g', 'component', 'c']


def test_profile_is_deterministic(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli(['profile', '--energy', '-1.7', '--output', str(first)])
    run_cli(['profile', '--energy', '-1.7', '--output', str(second)])
    assert first.read_bytes() == second.read_bytes()


def test_orbits_window(capsys):
    assert run_cli(['orbits', '--max-sum', '3', '--energy', '-1.55']) == EXIT_OK
    rows = _csv(capsys.readouterr().out)
    flags = {(row[0], row[1]): row[-1] for row in rows[1:]}
    assert flags[('2', '1')] == 'true' and flags[('1', '2')] == 'true'
    assert flags[('1', '1')] == 'false'


def test_orbits_empty_window(capsys):
    assert run_cli(['orbits', '--max-sum', '5', '--energy', '2']) == EXIT_OK
    rows = _csv(capsys.readouterr().out)
    assert all(row[-1] == 'false' for row in rows[1:])


def test_orbits_critical_window_edge(capsys):
    assert run_cli(['orbits', '--max-sum', '2']) == EXIT_OK
    rows = _csv(capsys.readouterr().out)
    assert float(rows[1][4]) == -1.5


def test_flow_equilibrium(capsys):
    assert run_cli(['flow', '--field', 'K', '--q', '1,0', '--p', '0,-1', '--T', '5']) == EXIT_OK
    rows = _csv(capsys.readouterr().out)[1:]
    first = [float(x) for x in rows[0][1:]]
    for row in rows:
        assert [float(x) for x in row[1:]] == pytest.approx(first, abs=1e-12)


def test_flow_circular_orbit_closes(capsys):
    assert run_cli(['flow', '--field', 'H', '--q', '1,0', '--p', '0,1', '--T', repr(2 * math.pi)]) == EXIT_OK
    rows = _csv(capsys.readouterr().out)
    last = [float(x) for x in rows[-1][1:5]]
    assert last == pytest.approx([1.0, 0.0, 0.0, 1.0], abs=1e-9)


def test_flow_second_kind_orbit(capsys):
    assert run_cli(['flow', '--orbit', '2,1', '--rotating', '--samples', '51']) == EXIT_OK
    out = capsys.readouterr().out
    header = [line for line in out.splitlines() if line.startswith('#')]
    assert any(line.startswith('# symmetry_residual=') for line in header)
    residual = float(next(line for line in header if 'symmetry_residual' in line).split('=')[1])
    assert residual < 1e-6
    assert len(_csv(out)) == 1 + 51


def test_flow_collision_is_reported(capsys):
    assert run_cli(['flow', '--field', 'H', '--q', '1,0', '--p', '0,0', '--T', '2']) == EXIT_OK
    assert "# status: near collision" in capsys.readouterr().out


def test_verify_subset(tmp_path):
    report = tmp_path / "report.csv"
    assert run_cli(['verify', '--only', 'tree', '--output', str(report)]) == EXIT_OK
    rows = _csv(report.read_text())
    assert rows[0] == ['check', 'n_samples', 'max_residual', 'tolerance', 'pass']
    assert all(row[-1] == 'true' for row in rows[1:])


def test_verify_failure_exit_code(capsys):
    assert run_cli(['verify', '--only', 'regularization', '--tol', 'symplectic=1e-12']) == EXIT_FAILED
    rows = _csv(capsys.readouterr().out)
    failing = [row[0] for row in rows[1:] if row[-1] == 'false']
    assert failing == ['symplectic']
