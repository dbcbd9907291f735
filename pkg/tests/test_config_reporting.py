import json
import logging
import math

import numpy as np
import pandas as pd
import pytest
from jsonschema import ValidationError

from scripts.config import RunConfig, load_run_config, load_schema
from scripts.errors import ConfigError
from scripts.reporting import (
    REPORT_SCHEMA_VERSION,
    VerificationStats,
    first_failing_row,
    setup_logger,
    to_jsonable,
    write_report,
)
from scripts.update_schema import SUITES, update_workflow_schema


class TestSchema:
    def test_required_keys(self):
        schema = load_schema()
        assert 'lemma-arc' in schema['workflow_steps']
        assert schema['config']['h'] == 'sqrt'
        assert schema['report_schema']['properties']['schema_version']['const'] == REPORT_SCHEMA_VERSION

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_schema(tmp_path / 'absent.json')

    def test_missing_keys(self, tmp_path):
        path = tmp_path / 'schema.json'
        path.write_text(json.dumps({'config': {}}))
        with pytest.raises(ConfigError):
            load_schema(path)

    def test_generator_matches_checked_in_file(self, tmp_path):
        path = tmp_path / 'workflow_schema.json'
        update_workflow_schema(path)
        generated = load_schema(path)
        assert generated == load_schema()
        assert generated['workflow_steps'] == SUITES


class TestRunConfig:
    def test_defaults(self):
        config = load_run_config()
        assert config.h == 'sqrt'
        assert config.c == 'one_over_log'
        assert config.measure == pytest.approx(math.pi)
        assert config.max_gap == 0.1
        assert config.wos.samples == 100_000
        assert config.set_file is None

    def test_overrides_route_walk_keys(self):
        config = load_run_config({'samples': 10, 'seed': 7, 'depth': 3, 'tol': None})
        assert config.wos.samples == 10
        assert config.wos.seed == 7
        assert config.depth == 3
        assert config.tol == 1e-6

    @pytest.mark.parametrize('overrides', [
        {'measure': 2 * math.pi}, {'depth': -1}, {'L': 0.7}, {'samples': 0}, {'h': 5},
    ])
    def test_invalid_values(self, overrides):
        with pytest.raises(ConfigError):
            load_run_config(overrides)

    def test_dict_round_trip(self):
        config = load_run_config({'seed': 3, 'out': 'elsewhere'})
        again = RunConfig.from_dict(config.to_dict())
        assert again == config
        assert again.out_dir.name == 'elsewhere'

    def test_unknown_keys(self):
        data = RunConfig().to_dict()
        data['colour'] = 'blue'
        with pytest.raises(ConfigError):
            RunConfig.from_dict(data)

    def test_with_overrides(self):
        config = RunConfig().with_overrides(workers=4, depth=2, h=None)
        assert config.wos.workers == 4
        assert config.depth == 2
        assert config.h == 'sqrt'


class TestReporting:
    def test_logger_configured_once(self, tmp_path):
        first = setup_logger('ReportingTest', 'reporting_test.log', log_dir=tmp_path)
        second = setup_logger('ReportingTest', 'reporting_test.log', log_dir=tmp_path)
        assert first is second
        assert len(first.handlers) == 2
        assert first.level == logging.INFO
        assert (tmp_path / 'reporting_test.log').exists()

    def test_to_jsonable(self):
        value = {'a': np.float64(1.5), 'b': np.array([1, 2]), 'c': 1 + 2j, 'd': np.bool_(True)}
        assert to_jsonable(value) == {'a': 1.5, 'b': [1, 2], 'c': [1.0, 2.0], 'd': True}

    def test_first_failing_row(self):
        rows = pd.DataFrame({'n': [1, 2, 3], 'passed': [True, False, False]})
        assert first_failing_row(rows) == {'n': 2, 'passed': False, 'row': 1}
        assert first_failing_row(rows.iloc[:1]) is None

    def test_write_report(self, tmp_path):
        rows = pd.DataFrame({'n': [1, 2], 'value': [0.5, 0.25], 'passed': [True, False]})
        schema = load_schema()['report_schema']
        json_path, csv_path = write_report(tmp_path / 'suite', 'demo', rows, False,
                                           {'count': np.int64(2)}, {'seed': 0}, schema)
        document = json.loads(json_path.read_text())
        assert document['schema_version'] == REPORT_SCHEMA_VERSION
        assert document['passed'] is False
        assert document['n_rows'] == 2
        assert document['first_failure']['row'] == 1
        assert document['summary'] == {'count': 2}
        pd.testing.assert_frame_equal(pd.read_csv(csv_path), rows)

    def test_report_schema_rejects_bad_document(self, tmp_path):
        schema = dict(load_schema()['report_schema'])
        schema['properties'] = dict(schema['properties'], suite={'type': 'integer'})
        with pytest.raises(ValidationError):
            write_report(tmp_path, 'demo', pd.DataFrame({'passed': [True]}), True, {}, {}, schema)

    def test_stats(self):
        stats = VerificationStats()
        stats.record('a', True)
        stats.record('b', False, 'row 3')
        stats.record_error('c', RuntimeError('boom'))
        summary = stats.get_summary()
        assert (summary['total'], summary['passed'], summary['failed'], summary['errored']) == (3, 1, 1, 1)
        assert not stats.all_passed
