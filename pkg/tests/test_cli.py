"""
End-to-end tests of the command-line surface with click's CliRunner.
"""
import json
import math

import pytest
from click.testing import CliRunner

import cli as cli_module
from acceptance import AcceptanceSuite
from cli import cli
from errors import IntegrationError, RefinementError


@pytest.fixture
def runner():
    return CliRunner()


def run_json(runner, args):
    result = runner.invoke(cli, args + ['--quiet'])
    return result, (json.loads(result.stdout) if result.stdout.strip() else None)


# =============================================================================
# 1. CURVATURE AUDIT
# =============================================================================


class TestCurvatureAudit:

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_default_tensor_passes(self, runner, n):
        result, report = run_json(runner, ['curvature-audit', '--n', str(n), '--samples', '100000', '--seed', str(n)])
        assert result.exit_code == 0
        assert report['violations'] == 0
        assert report['min'] >= 1 - 1e-9 and report['max'] <= 4 + 1e-9

    def test_n1_planes_read_four(self, runner):
        result, report = run_json(runner, ['curvature-audit', '--n', '1', '--samples', '100000', '--seed', '1'])
        assert result.exit_code == 0
        assert abs(report['min'] - 4.0) <= 1e-9 and abs(report['max'] - 4.0) <= 1e-9

    def test_bad_tensor_fails(self, runner):
        result, report = run_json(runner, ['curvature-audit', '--samples', '2000', '--bad-tensor'])
        assert result.exit_code == 1
        assert report['violations'] > 0

    def test_fixed_seed_is_byte_identical(self, runner):
        args = ['curvature-audit', '--samples', '500', '--seed', '3', '--quiet']
        assert runner.invoke(cli, args).stdout == runner.invoke(cli, args).stdout

    def test_invalid_flag_is_usage_error(self, runner):
        assert runner.invoke(cli, ['curvature-audit', '--n', '0']).exit_code == 2
        assert runner.invoke(cli, ['curvature-audit', '--method', 'guess']).exit_code == 2


# =============================================================================
# 2. GEODESIC
# =============================================================================


class TestGeodesic:

    def test_closed_orbit(self, runner):
        result, payload = run_json(runner, ['geodesic', '--n', '1', '--T', repr(2 * math.pi),
                                            '--steps', '6284', '--direction', '0'])
        assert result.exit_code == 0
        series = payload['series']
        assert abs(series['re_z0'][-1] - 1.0) <= 1e-6
        assert abs(series['im_z0'][-1]) <= 1e-6
        assert max(abs(h - 0.5) for h in series['h']) <= 1e-8
        assert max(series['closed_form_gap']) <= 1e-6

    def test_csv_columns(self, runner):
        result = runner.invoke(cli, ['geodesic', '--n', '1', '--T', '1', '--format', 'csv', '--quiet'])
        assert result.exit_code == 0
        header = result.stdout.splitlines()[0]
        assert header == 't,re_z0,im_z0,re_z1,im_z1,re_p0,im_p0,re_p1,im_p1,h,u0,closed_form_gap'

    def test_malformed_direction(self, runner):
        assert runner.invoke(cli, ['geodesic', '--n', '2', '--direction', '9']).exit_code == 2

    def test_integration_failure_reports_time(self, runner, monkeypatch):
        def blow_up(lam0, T, steps=None):
            raise IntegrationError("Non-finite state", 1.2345)
        monkeypatch.setattr(cli_module, 'integrate_extremal', blow_up)
        result = runner.invoke(cli, ['geodesic', '--T', '2', '--quiet'])
        assert result.exit_code == 1
        assert "t = 1.234500" in result.stderr
        assert result.stdout == ""


# =============================================================================
# 3. CONJUGATE TIMES AND BOUNDS
# =============================================================================


class TestConjugate:

    def test_n2_first_time(self, runner):
        result, payload = run_json(runner, ['conjugate', '--n', '2', '--T', '3.3'])
        assert result.exit_code == 0
        for report in payload['reports'].values():
            assert len(report['entries']) == 1
            assert abs(report['entries'][0]['time'] - math.pi) <= 1e-4
            assert report['entries'][0]['multiplicity'] == 3
        assert all(item['agree'] for item in payload['agreement'])

    def test_short_horizon_is_empty(self, runner):
        result, payload = run_json(runner, ['conjugate', '--T', '0.5'])
        assert result.exit_code == 0
        assert all(report['entries'] == [] for report in payload['reports'].values())

    def test_printed_normalization_reports_disagreement(self, runner):
        result, payload = run_json(runner, ['conjugate', '--u0', '1', '--T', '4', '--normalization', 'printed'])
        assert result.exit_code == 1
        assert not all(item['agree'] for item in payload['agreement'])

    def test_refinement_failure_suggests_more_steps(self, runner, monkeypatch):
        def crowded(*args, **kwargs):
            raise RefinementError(3.1415, 3.1418, 1e-3)
        monkeypatch.setattr(cli_module, 'conjugate_times_structural', crowded)
        result = runner.invoke(cli, ['conjugate', '--T', '3.3', '--quiet'])
        assert result.exit_code == 1
        assert "raise --steps" in result.stderr
        assert result.stdout == ""

    def test_out_file(self, runner, tmp_path):
        target = tmp_path / 'closed.json'
        result = runner.invoke(cli, ['conjugate', '--method', 'closed', '--T', '7', '--out', str(target), '--quiet'])
        assert result.exit_code == 0
        assert json.loads(target.read_text())['reports']['closed_form']['total'] == 7


class TestBounds:

    def test_csv_sweep(self, runner):
        result = runner.invoke(cli, ['bounds', '--n', '2', '--u0-grid', '0,1', '--T-grid', '2,4',
                                     '--format', 'csv', '--quiet'])
        assert result.exit_code == 0
        lines = result.stdout.splitlines()
        assert lines[0].startswith('u0,T,dc,z_lower,predicted,measured,z_upper,pass')
        assert len(lines) == 5

    def test_bad_grid(self, runner):
        assert runner.invoke(cli, ['bounds', '--T-grid', 'two']).exit_code == 2


# =============================================================================
# 4. SELFTEST
# =============================================================================


class QuickSuite(AcceptanceSuite):
    """Only the cheap criteria, so the command wiring can be tested quickly"""

    def run(self):
        for criterion, name, check in [(9, "tan-root counter", self.check_tan_roots),
                                       (2, "conservation", self.check_conservation)]:
            passed, detail = check()
            self.record(criterion, name, passed, detail)
        self.print_summary()
        return self.results


class TestSelftest:

    def test_json_summary(self, runner, monkeypatch):
        monkeypatch.setattr(cli_module, 'AcceptanceSuite', QuickSuite)
        result = runner.invoke(cli, ['selftest', '--format', 'json', '--quiet'])
        assert result.exit_code == 0
        summary = json.loads(result.stdout)
        assert [item['criterion'] for item in summary] == [9, 2]
        assert all(set(item) == {'criterion', 'name', 'passed', 'detail'} for item in summary)

    def test_failures_are_named(self, runner, monkeypatch):
        class Broken(QuickSuite):
            def check_tan_roots(self):
                return False, "forced"
        monkeypatch.setattr(cli_module, 'AcceptanceSuite', Broken)
        result = runner.invoke(cli, ['selftest', '--format', 'json', '--quiet'])
        assert result.exit_code == 1
        assert json.loads(result.stdout)[0] == {
            'criterion': 9, 'name': 'tan-root counter', 'passed': False, 'detail': 'forced'}
