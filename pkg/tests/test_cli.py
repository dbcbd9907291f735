import json

import pandas as pd
import pytest

from scripts.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, main


def _report(out):
    return json.loads((out / 'report.json').read_text())


class TestConstructSet:
    def test_writes_set_files(self, tmp_path):
        out = tmp_path / 'set'
        code = main(['construct-set', '--h', 'sqrt', '--measure', '0.5', '--depth', '6', '--out', str(out)])
        assert code == EXIT_PASS
        document = json.loads((out / 'set.json').read_text())
        assert document['audit']['passed']
        assert document['config']['depth'] == 6
        assert len(pd.read_csv(out / 'gaps.csv')) == 63
        assert (out / 'domain.svg').exists()

    def test_failed_audit_exits_one(self, tmp_path, capsys):
        code = main(['construct-set', '--h', 'constant:1', '--depth', '2', '--out', str(tmp_path)])
        assert code == EXIT_FAIL
        assert 'Set audit failed' in capsys.readouterr().err

    @pytest.mark.parametrize('argv', [
        ['construct-set', '--measure', '7'],
        ['construct-set', '--depth', '30'],
        ['construct-set', '--h', 'cubic'],
        ['construct-set', '--h', 'missing.json'],
        ['construct-set', '--depth', 'six'],
    ])
    def test_usage_errors(self, argv):
        assert main(argv) == EXIT_USAGE


class TestVerify:
    def test_lemma_arc(self, tmp_path):
        code = main(['verify', 'lemma-arc', '--out', str(tmp_path)])
        assert code == EXIT_PASS
        report = _report(tmp_path)
        assert report['passed']
        assert report['n_rows'] == 5000
        assert report['summary']['L_decreasing_points'] > 0
        assert report['first_failure'] is None
        assert report['config']['wos']['seed'] == 0

    def test_regularization(self, tmp_path):
        assert main(['verify', 'regularization', '--horizon', '200', '--out', str(tmp_path)]) == EXIT_PASS

    def test_legendre(self, tmp_path):
        code = main(['verify', 'legendre', '--c', 'one_over_n', '--horizon', '1000', '--out', str(tmp_path)])
        assert code == EXIT_PASS
        assert _report(tmp_path)['summary']['n0'] is not None

    def test_failing_suite_reports_row(self, tmp_path, capsys):
        code = main(['verify', 'cantor-audit', '--h', 'constant:1', '--out', str(tmp_path)])
        assert code == EXIT_FAIL
        assert 'failed at row 0' in capsys.readouterr().err
        assert _report(tmp_path)['first_failure']['row'] == 0

    def test_unknown_suite(self):
        assert main(['verify', 'everything']) == EXIT_USAGE

    def test_missing_set_file(self, tmp_path):
        code = main(['verify', 'subordination', '--set', str(tmp_path / 'absent.json'),
                     '--samples', '100', '--out', str(tmp_path)])
        assert code == EXIT_USAGE

    @pytest.mark.slow
    def test_arc_montecarlo(self, tmp_path):
        code = main(['verify', 'arc-montecarlo', '--samples', '100000', '--seed', '7', '--out', str(tmp_path)])
        assert code == EXIT_PASS


class TestRender:
    def test_render_from_set_file(self, tmp_path):
        set_dir = tmp_path / 'set'
        assert main(['construct-set', '--depth', '3', '--out', str(set_dir)]) == EXIT_PASS
        out = tmp_path / 'figures'
        assert main(['render', '--set', str(set_dir / 'set.json'), '--out', str(out)]) == EXIT_PASS
        assert (out / 'domain.svg').exists()
        assert (out / 'mapping.svg').exists()
        assert not (out / 'moments.svg').exists()

    def test_output_is_deterministic(self, tmp_path):
        for name in ('a', 'b'):
            assert main(['render', '--depth', '2', '--out', str(tmp_path / name)]) == EXIT_PASS
        for figure in ('domain.svg', 'mapping.svg'):
            assert (tmp_path / 'a' / figure).read_bytes() == (tmp_path / 'b' / figure).read_bytes()

    def test_moments_figure(self, tmp_path):
        code = main(['render', '--depth', '1', '--c', 'one_over_log', '--horizon', '16', '--out', str(tmp_path)])
        assert code == EXIT_PASS
        assert (tmp_path / 'moments.svg').exists()

    def test_missing_set(self, tmp_path):
        assert main(['render', '--set', str(tmp_path / 'absent.json')]) == EXIT_USAGE
