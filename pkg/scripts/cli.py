"""
Command-line driver: construct-set, verify and render.

Exit codes: 0 pass, 1 assertion failure, 2 usage or configuration error.

    python -m scripts.cli construct-set --h sqrt --measure 0.5 --depth 6
    python -m scripts.cli verify legendre --c one_over_n --horizon 10000
    python -m scripts.cli verify proposition --set out/set.json --h sqrt --samples 100000 --seed 7
    python -m scripts.cli render --L 0.1 --t 0.785 --depth 4
"""

import argparse
import json
import logging
import sys
from typing import Dict, List, Optional

from scripts.circle_sets import ArcSet, audit_cantor_set, build_cantor_set, split_long_gaps
from scripts.config import RunConfig, load_run_config, load_schema
from scripts.errors import (
    ArgumentError,
    ConfigError,
    ContractViolation,
    DomainError,
    EstimateAborted,
    QuadratureError,
)
from scripts.majorants import load_majorant, load_sequence
from scripts.reporting import setup_logger, to_jsonable
from scripts.rendering import render_domain, render_mapping, render_moments
from scripts.spectral_moments import moment_bound_check
from scripts.verification import VerificationRunner

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

USAGE_ERRORS = (ArgumentError, DomainError, ContractViolation, ConfigError,
                FileNotFoundError, json.JSONDecodeError)
RUN_ERRORS = (EstimateAborted, QuadratureError)


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--h', help="majorant: library name or JSON file")
    parser.add_argument('--c', help="sequence: one_over_n, one_over_log or JSON file")
    parser.add_argument('--depth', type=int, help="Cantor construction stages")
    parser.add_argument('--measure', type=float, help="target measure of E in radians")
    parser.add_argument('--max-gap', dest='max_gap', type=float, help="split gaps longer than this")
    parser.add_argument('--samples', type=int, help="walk-on-spheres walks")
    parser.add_argument('--eps-shell', dest='eps_shell', type=float, help="walk termination distance")
    parser.add_argument('--max-steps', dest='max_steps', type=int, help="step cap per walk")
    parser.add_argument('--seed', type=int, help="64-bit seed of all randomness")
    parser.add_argument('--workers', type=int, help="worker processes for walks")
    parser.add_argument('--horizon', type=int, help="largest n of sequence tables")
    parser.add_argument('--tol', type=float, help="relative quadrature tolerance")
    parser.add_argument('--L', type=float, help="Omega_L radius in (0, 0.5]")
    parser.add_argument('--t', type=float, help="arc angle in (0, pi/2]")
    parser.add_argument('--set', dest='set_file', help="set.json to use instead of a fresh build")
    parser.add_argument('--out', help="output directory")


def build_parser(suites: List[str]) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='python -m scripts.cli',
        description="Construct h-Beurling-Carleson sets and verify harmonic measure estimates",
    )
    commands = parser.add_subparsers(dest='command', required=True)

    construct = commands.add_parser('construct-set', help="build a Cantor-type set and its domain")
    _add_common_flags(construct)

    verify = commands.add_parser('verify', help="run a verification suite")
    verify.add_argument('suite', choices=suites + ['all'])
    _add_common_flags(verify)

    render = commands.add_parser('render', help="write domain and mapping figures")
    _add_common_flags(render)
    return parser


def _overrides(args: argparse.Namespace) -> Dict:
    keys = ['h', 'c', 'depth', 'measure', 'max_gap', 'samples', 'eps_shell', 'max_steps',
            'seed', 'workers', 'horizon', 'tol', 'L', 't', 'set_file', 'out']
    return {key: getattr(args, key) for key in keys}


def cmd_construct_set(config: RunConfig, logger: logging.Logger) -> int:
    """Write set.json, gaps.csv and domain.svg; exit 0 when the audit passes."""
    h = load_majorant(config.h)
    E = build_cantor_set(h, config.measure, config.depth)
    audit = audit_cantor_set(E, h, config.measure)

    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    document = E.to_dict()
    document['audit'] = audit.to_dict()
    document['config'] = config.to_dict()
    with open(out_dir / 'set.json', 'w') as f:
        json.dump(to_jsonable(document), f, indent=2)
    E.gaps_frame().to_csv(out_dir / 'gaps.csv', index=False)

    domain_set = E if config.max_gap is None else split_long_gaps(E, config.max_gap)
    render_domain(domain_set, out_dir / 'domain.svg', config.max_gap)
    logger.info(f"Built set with {E.n_gaps} gaps, measure {E.measure:.6f} -> {out_dir}")

    if not audit.passed:
        print(f"Set audit failed: {json.dumps(to_jsonable(audit.to_dict()))}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_PASS


def cmd_verify(config: RunConfig, suite: str, schema: Dict, logger: logging.Logger) -> int:
    runner = VerificationRunner(config, schema)
    if suite == 'all':
        stats = runner.run_all()
        stats.print_detailed_report()
        return EXIT_PASS if stats.all_passed else EXIT_FAIL

    result = runner.run(suite)
    if result.passed:
        return EXIT_PASS
    failing = result.rows.loc[~result.rows['passed'].astype(bool)] if 'passed' in result.rows else result.rows.iloc[0:0]
    if failing.empty:
        print(f"Suite {suite} failed: {json.dumps(to_jsonable(result.summary))}", file=sys.stderr)
    else:
        row = to_jsonable(failing.iloc[0].to_dict())
        print(f"Suite {suite} failed at row {int(failing.index[0])}: {json.dumps(row)}", file=sys.stderr)
    return EXIT_FAIL


def cmd_render(config: RunConfig, with_moments: bool, logger: logging.Logger) -> int:
    out_dir = config.out_dir
    if config.set_file:
        E = ArcSet.from_json(config.set_file)
    else:
        E = build_cantor_set(load_majorant(config.h), config.measure, config.depth)
    domain_set = E if config.max_gap is None else split_long_gaps(E, config.max_gap)
    render_domain(domain_set, out_dir / 'domain.svg', config.max_gap)
    render_mapping(config.L, config.t, out_dir / 'mapping.svg')
    if with_moments:
        table = moment_bound_check(load_sequence(config.c, config.horizon + 1), config.horizon, config.tol)
        render_moments(table.rows, out_dir / 'moments.svg')
    logger.info(f"Rendered figures -> {out_dir}")
    return EXIT_PASS


def main(argv: Optional[List[str]] = None) -> int:
    try:
        schema = load_schema()
    except (ConfigError, json.JSONDecodeError) as e:
        print(f"error: {str(e)}", file=sys.stderr)
        return EXIT_USAGE

    parser = build_parser(list(schema['workflow_steps']))
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_PASS

    logger = setup_logger('PrivalovCLI', 'cli.log')
    try:
        config = load_run_config(_overrides(args))
        if args.command == 'construct-set':
            return cmd_construct_set(config, logger)
        if args.command == 'verify':
            return cmd_verify(config, args.suite, schema, logger)
        return cmd_render(config, args.c is not None, logger)
    except USAGE_ERRORS as e:
        logger.error(f"Usage error: {str(e)}")
        print(f"error: {str(e)}", file=sys.stderr)
        return EXIT_USAGE
    except RUN_ERRORS as e:
        logger.error(f"Run failed: {str(e)}")
        print(f"error: {str(e)}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
