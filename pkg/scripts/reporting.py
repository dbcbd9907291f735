"""Logging setup, report writing and run statistics shared by the suites."""

import json
import logging
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from jsonschema import validate

REPORT_SCHEMA_VERSION = "1.0"

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logger(name: str, log_file: str, log_dir: Union[str, Path] = 'logs',
                 level: int = logging.INFO) -> logging.Logger:
    """
    Setup a named logger writing to the console and to ``log_dir/log_file``.

    Calling it twice for the same name returns the already configured logger.
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)
    if logger.handlers:
        return logger

    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)

    c_handler = logging.StreamHandler()
    f_handler = logging.FileHandler(log_dir / log_file)

    log_format = logging.Formatter(LOG_FORMAT)
    c_handler.setFormatter(log_format)
    f_handler.setFormatter(log_format)

    logger.addHandler(c_handler)
    logger.addHandler(f_handler)
    return logger


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and nested containers into plain JSON types."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, Path):
        return str(value)
    return value


def first_failing_row(rows: pd.DataFrame, column: str = 'passed') -> Optional[Dict]:
    """Return the first row whose ``column`` is False, as a dict."""
    if rows.empty or column not in rows.columns:
        return None
    failing = rows.loc[~rows[column].astype(bool)]
    if failing.empty:
        return None
    record = failing.iloc[0].to_dict()
    record['row'] = int(failing.index[0])
    return to_jsonable(record)


def write_report(out_dir: Union[str, Path], suite: str, rows: pd.DataFrame,
                 passed: bool, summary: Dict, config: Dict,
                 report_schema: Optional[Dict] = None) -> Tuple[Path, Path]:
    """
    Write ``report.json`` and ``report.csv`` for one verification suite.

    Parameters
    ----------
    out_dir : Path
        Destination directory, created when missing
    suite : str
        Suite name echoed into the report
    rows : pd.DataFrame
        Row-level results; must contain a boolean ``passed`` column
    passed : bool
        Overall verdict of the suite
    summary : Dict
        Suite-specific aggregate values
    config : Dict
        Serialized run configuration (config echo)
    report_schema : Dict, optional
        JSON Schema the report document is validated against

    Returns
    -------
    Tuple[Path, Path]
        Paths of the JSON and CSV files
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    document = {
        'schema_version': REPORT_SCHEMA_VERSION,
        'suite': suite,
        'passed': bool(passed),
        'n_rows': int(len(rows)),
        'first_failure': first_failing_row(rows),
        'summary': to_jsonable(summary),
        'config': to_jsonable(config),
    }
    if report_schema is not None:
        validate(instance=document, schema=report_schema)

    json_path = out_dir / 'report.json'
    csv_path = out_dir / 'report.csv'
    with open(json_path, 'w') as f:
        json.dump(document, f, indent=2)
    rows.to_csv(csv_path, index=False)
    return json_path, csv_path


class VerificationStats:
    """Track suite outcomes over a multi-suite run."""

    def __init__(self):
        self.total_suites = 0
        self.passed: List[str] = []
        self.failed: List[Tuple[str, str]] = []
        self.errored: List[Tuple[str, str]] = []
        self.start_time = time.time()

    def record(self, suite: str, passed: bool, detail: str = '') -> None:
        self.total_suites += 1
        if passed:
            self.passed.append(suite)
        else:
            self.failed.append((suite, detail))

    def record_error(self, suite: str, error: Exception) -> None:
        self.total_suites += 1
        self.errored.append((suite, str(error)))

    def get_summary(self) -> Dict[str, Any]:
        """Get run summary"""
        elapsed_time = time.time() - self.start_time
        return {
            'total': self.total_suites,
            'passed': len(self.passed),
            'failed': len(self.failed),
            'errored': len(self.errored),
            'elapsed_time': elapsed_time,
            'pass_rate': (len(self.passed) / self.total_suites * 100
                          if self.total_suites > 0 else 0)
        }

    @property
    def all_passed(self) -> bool:
        return not self.failed and not self.errored

    def print_detailed_report(self):
        """Print detailed verification report"""
        summary = self.get_summary()

        print("\n" + "=" * 50)
        print("Verification Summary")
        print("=" * 50)
        print(f"Total Suites: {summary['total']}")
        print(f"Passed: {summary['passed']} ({summary['pass_rate']:.1f}%)")
        print(f"Failed: {len(self.failed)}")
        print(f"Errored: {len(self.errored)}")
        print(f"Total Time: {summary['elapsed_time']:.1f} seconds")

        if self.failed:
            print("\nFailed Suites:")
            for suite, detail in self.failed:
                print(f"- {suite}: {detail}")

        if self.errored:
            print("\nErrored Suites:")
            for suite, error in self.errored:
                print(f"- {suite}: {error}")
