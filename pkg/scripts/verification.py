"""
Verification suites. Every suite returns a table with a boolean ``passed``
column and a summary; VerificationRunner writes them as report.json and
report.csv and keeps score over multi-suite runs.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from scripts.circle_sets import (
    ArcSet,
    audit_cantor_set,
    build_cantor_set,
    carleson_comparison,
    carleson_sum,
    split_long_gaps,
)
from scripts.config import RunConfig, load_schema
from scripts.conformal import (
    JoukowskiMap,
    PrivalovDomain,
    distortion_ratio,
    ell_L_comparison,
    joukowski_forward,
    joukowski_inverse,
)
from scripts.errors import PrivalovError
from scripts.harmonic_measure import (
    Polynomial,
    WalkOnSpheres,
    arc_measure_bound,
    arc_measure_exact,
    component_partition,
    e_measure_monotonicity,
    integrability_functional,
    omega_L_arc_estimate,
    subharmonicity_check,
    subordination_check,
)
from scripts.majorants import (
    PositiveSequence,
    RegularMajorant,
    cap_sequence,
    check_regularization_properties,
    h_from_sequence,
    legendre_dominance_table,
    legendre_grid_search,
    legendre_inf,
    load_majorant,
    load_sequence,
    log_spaced_indices,
    named_majorant,
    regularize_sequence,
)
from scripts.reporting import VerificationStats, setup_logger, write_report
from scripts.spectral_moments import moment, moment_bound_check

ARC_GRID = (50, 100)  # (L, t) grid of the closed-form arc check
ARC_TOL = 1e-12
JOUKOWSKI_LS = (0.01, 0.05, 0.1, 0.3, 0.5)
JOUKOWSKI_SAMPLES = 10_000
JOUKOWSKI_TOL = 1e-10
DISTORTION_PAIRS = 100_000
DISTORTION_CHUNK = 10_000
LEGENDRE_NS = (100, 1000, 10_000)
LEGENDRE_CS = (0.1, 0.5, 0.9)
LEGENDRE_TOL = 1e-8
GRID_CHECKS = 10
GRID_RTOL = 1e-4
CLOSED_FORM_NS = (0, 1, 10, 100, 1000)
CLOSED_FORM_TOL = 1e-8
RANDOM_SEQUENCES = 100
AUDIT_DEPTHS = range(1, 11)
SUBORDINATION_DEPTH = 4
SUBORDINATION_ARCS = ((0.0, 1.0), (0.25, 0.75))
SUBHARMONIC_POLYNOMIALS = 20
SUBHARMONIC_MAX_DEGREE = 20
MEAN_VALUE_POLYNOMIALS = 5


@dataclass
class SuiteResult:
    rows: pd.DataFrame
    passed: bool
    summary: Dict = field(default_factory=dict)


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


class VerificationRunner:
    """
    Runs the verification suites of the toolkit against one RunConfig.

    Parameters
    ----------
    config : RunConfig
        Run configuration, echoed into every report
    schema : Dict, optional
        Loaded workflow schema (defaults to workflow_schema.json)
    """

    def __init__(self, config: RunConfig, schema: Optional[Dict] = None):
        self.config = config
        self.schema = schema or load_schema()
        self.logger = setup_logger('VerificationRunner', 'verification.log')
        self.suites: Dict[str, Callable[[], SuiteResult]] = {
            'lemma-arc': self.suite_lemma_arc,
            'arc-montecarlo': self.suite_arc_montecarlo,
            'joukowski': self.suite_joukowski,
            'distortion': self.suite_distortion,
            'legendre': self.suite_legendre,
            'regularization': self.suite_regularization,
            'moments': self.suite_moments,
            'cantor-audit': self.suite_cantor_audit,
            'carleson': self.suite_carleson,
            'proposition': self.suite_proposition,
            'subordination': self.suite_subordination,
            'subharmonic': self.suite_subharmonic,
        }

    # -- shared inputs -------------------------------------------------------

    @property
    def majorant(self) -> RegularMajorant:
        return load_majorant(self.config.h)

    def target_set(self, depth: Optional[int] = None) -> ArcSet:
        """The set under test: --set file, or a fresh Cantor build."""
        if self.config.set_file and depth is None:
            return ArcSet.from_json(self.config.set_file)
        depth = self.config.depth if depth is None else depth
        return build_cantor_set(self.majorant, self.config.measure, depth)

    def domain_set(self, E: ArcSet) -> ArcSet:
        """E with gaps split below max_gap, as used to build domains."""
        if self.config.max_gap is None:
            return E
        return split_long_gaps(E, self.config.max_gap)

    # -- running and reporting -------------------------------------------------

    def run(self, suite: str, out_dir: Optional[Path] = None) -> SuiteResult:
        """Run one suite and write its report files."""
        if suite not in self.suites:
            raise KeyError(f"Unknown suite: {suite}")
        out_dir = Path(out_dir) if out_dir is not None else self.config.out_dir
        self.logger.info(f"Running suite {suite}")
        result = self.suites[suite]()
        json_path, _ = write_report(
            out_dir, suite, result.rows, result.passed, result.summary,
            self.config.to_dict(), self.schema['report_schema'],
        )
        status = 'PASS' if result.passed else 'FAIL'
        self.logger.info(f"Suite {suite}: {status} ({len(result.rows)} rows) -> {json_path}")
        return result

    def run_all(self) -> VerificationStats:
        """Run every suite in workflow order, each into its own subdirectory."""
        stats = VerificationStats()
        for suite in tqdm(self.schema['workflow_steps'], desc="Verification suites"):
            try:
                result = self.run(suite, self.config.out_dir / suite)
                stats.record(suite, result.passed, self._failure_detail(result))
            except PrivalovError as e:
                self.logger.error(f"Error in suite {suite}: {str(e)}")
                stats.record_error(suite, e)
        return stats

    @staticmethod
    def _failure_detail(result: SuiteResult) -> str:
        if result.passed or result.rows.empty or 'passed' not in result.rows:
            return ''
        failing = result.rows.loc[~result.rows['passed'].astype(bool)]
        if failing.empty:
            return 'suite-level check failed'
        return f"first failing row {int(failing.index[0])}"

    # -- closed forms and maps -------------------------------------------------

    def suite_lemma_arc(self) -> SuiteResult:
        """Closed-form arc measure against its bound on the full (L, t) grid."""
        n_L, n_t = ARC_GRID
        Ls = 0.5 * np.arange(1, n_L + 1) / n_L
        ts = 0.5 * math.pi * np.arange(1, n_t + 1) / n_t
        L, t = np.meshgrid(Ls, ts, indexing='ij')
        exact = arc_measure_exact(L.ravel(), t.ravel())
        bound = arc_measure_bound(L.ravel(), t.ravel())

        # the measure grows with t for fixed L; in L it does not once x^2 cos t > 1
        grid = exact.reshape(n_L, n_t)
        t_monotone = np.ones_like(grid, dtype=bool)
        t_monotone[:, 1:] = np.diff(grid, axis=1) >= -ARC_TOL
        L_drops = int((np.diff(grid, axis=0) < -ARC_TOL).sum())

        rows = pd.DataFrame({
            'L': L.ravel(), 't': t.ravel(), 'exact': exact, 'bound': bound,
            't_monotone': t_monotone.ravel(),
            'passed': (exact <= bound + ARC_TOL) & t_monotone.ravel(),
        })
        violations = int((~rows['passed']).sum())
        return SuiteResult(rows, violations == 0, {
            'grid_points': len(rows),
            'violations': violations,
            'L_decreasing_points': L_drops,
            'max_ratio': float((rows['exact'] / rows['bound']).max()),
        })

    def suite_arc_montecarlo(self) -> SuiteResult:
        """Walk-on-spheres estimate of the arc measure in Omega_L against the closed form."""
        cfg = self.config
        estimate, exact = omega_L_arc_estimate(cfg.L, cfg.t, cfg.wos)
        deviation = abs(estimate.value - exact)
        passed = deviation <= 3.0 * estimate.stderr
        rows = pd.DataFrame([{
            'L': cfg.L, 't': cfg.t, 'estimate': estimate.value, 'stderr': estimate.stderr,
            'exact': exact, 'deviation': deviation, 'samples': estimate.samples,
            'aborted': estimate.aborted, 'passed': passed,
        }])
        return SuiteResult(rows, passed, {'seed': cfg.wos.seed, 'exact': exact,
                                          'estimate': estimate.value, 'stderr': estimate.stderr})

    def suite_joukowski(self) -> SuiteResult:
        """Round trip phi_L^-1(phi_L(z)) = z on random points of Omega_L."""
        rng = _rng(self.config.wos.seed, 1)
        rows = []
        for L in JOUKOWSKI_LS:
            m = JoukowskiMap(L)
            z = np.empty(0, dtype=complex)
            while z.size < JOUKOWSKI_SAMPLES:
                cand = rng.uniform(-2.0, 2.0, JOUKOWSKI_SAMPLES) + 1j * rng.uniform(1e-3, 2.0, JOUKOWSKI_SAMPLES)
                z = np.concatenate([z, cand[np.abs(cand) > 1.01 * L]])
            z = z[:JOUKOWSKI_SAMPLES]
            back = joukowski_inverse(m, joukowski_forward(m, z))
            residual = float(np.max(np.abs(back - z)))
            rows.append({'L': L, 'samples': z.size, 'max_residual': residual,
                         'passed': residual <= JOUKOWSKI_TOL})
        frame = pd.DataFrame(rows)
        return SuiteResult(frame, bool(frame['passed'].all()),
                           {'max_residual': float(frame['max_residual'].max())})

    def suite_distortion(self) -> SuiteResult:
        """Cayley distortion ratio in [1/2, 2] on random pairs of the right half-disk."""
        rng = _rng(self.config.wos.seed, 2)

        def sample(count: int) -> np.ndarray:
            r = np.sqrt(rng.uniform(0.0, 1.0, count))
            theta = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, count)
            return r * np.exp(1j * theta)

        rows = []
        for chunk in range(DISTORTION_PAIRS // DISTORTION_CHUNK):
            z1, z2 = sample(DISTORTION_CHUNK), sample(DISTORTION_CHUNK)
            distinct = z1 != z2
            ratio = distortion_ratio(z1[distinct], z2[distinct])
            violations = int(((ratio < 0.5) | (ratio > 2.0)).sum())
            rows.append({'chunk': chunk, 'pairs': int(distinct.sum()),
                         'min_ratio': float(ratio.min()), 'max_ratio': float(ratio.max()),
                         'violations': violations, 'passed': violations == 0})

        E = self.target_set()
        scales = ell_L_comparison(E.gap_lengths())
        frame = pd.DataFrame(rows)
        passed = bool(frame['passed'].all()) and bool(scales['passed'].all())
        return SuiteResult(frame, passed, {
            'min_ratio': float(frame['min_ratio'].min()),
            'max_ratio': float(frame['max_ratio'].max()),
            'gap_scale_checks': len(scales),
            'gap_scale_failures': int((~scales['passed']).sum()),
        })

    # -- sequences, Legendre infima and moments ----------------------------------

    def _sequence_majorant(self) -> Tuple[PositiveSequence, RegularMajorant, float]:
        horizon = self.config.horizon
        c = load_sequence(self.config.c, horizon + 1)
        _, c_reg, factor = cap_sequence(c, horizon + 1)
        return c_reg, h_from_sequence(c_reg, horizon, concavify=True), factor

    def suite_legendre(self) -> SuiteResult:
        """Closed form for constant h, the dominance table and the grid-search cross-check."""
        rows = []
        for n in LEGENDRE_NS:
            for c in LEGENDRE_CS:
                result = legendre_inf(n, named_majorant(f'constant:{c * c}'))
                expected = 2.0 * c * math.sqrt(n)
                rel = abs(result.inf_value - expected) / expected
                arg = abs(result.argmin - c / math.sqrt(n))
                rows.append({'kind': 'constant', 'n': n, 'c': c, 'inf_value': result.inf_value,
                             'bound': expected, 'error': max(rel, arg),
                             'passed': rel <= LEGENDRE_TOL and arg <= LEGENDRE_TOL})

        c_reg, h, factor = self._sequence_majorant()
        horizon = self.config.horizon
        table = legendre_dominance_table(c_reg, h, ns=log_spaced_indices(horizon))
        for record in table.rows.to_dict('records'):
            asserted = table.n0 is not None and record['n'] >= table.n0
            rows.append({'kind': 'dominance', 'n': record['n'], 'inf_value': record['inf_value'],
                         'bound': record['bound'], 'asserted': asserted,
                         'passed': record['passed'] or not asserted})

        rng = _rng(self.config.wos.seed, 3)
        for n in sorted(rng.integers(1, horizon + 1, GRID_CHECKS).tolist()):
            exact = legendre_inf(n, h).inf_value
            grid = legendre_grid_search(n, h).inf_value
            rel = (grid - exact) / exact
            rows.append({'kind': 'grid', 'n': n, 'inf_value': exact, 'grid_value': grid,
                         'error': rel, 'passed': -1e-12 <= rel <= GRID_RTOL})

        frame = pd.DataFrame(rows)
        passed = bool(frame['passed'].all()) and table.n0 is not None
        return SuiteResult(frame, passed, {'n0': table.n0, 'horizon': horizon,
                                           'scale_factor': factor, 'sequence': self.config.c})

    def suite_regularization(self) -> SuiteResult:
        """c_n = 1/n regularizes to 1/sqrt(n); properties (i)-(iii) on random sequences."""
        horizon = self.config.horizon
        c_reg = regularize_sequence(PositiveSequence.from_rule('one_over_n', horizon), horizon)
        expected = 1.0 / np.sqrt(np.arange(1, horizon + 1))
        deviation = float(np.max(np.abs(c_reg.terms - expected) / expected))
        rows = [{'kind': 'one_over_n', 'sequence': 0, 'deviation': deviation,
                 'dominates': True, 'nonincreasing': True, 'slow_decay': True,
                 'passed': deviation <= 1e-10}]

        rng = _rng(self.config.wos.seed, 4)
        n = np.arange(1, 201, dtype=float)
        for k in range(RANDOM_SEQUENCES):
            c = PositiveSequence(rng.uniform(0.05, 1.0, n.size) / np.log(n + 2.0))
            props = check_regularization_properties(c, regularize_sequence(c, 100))
            rows.append({'kind': 'random', 'sequence': k + 1, **props, 'passed': all(props.values())})
        frame = pd.DataFrame(rows)
        return SuiteResult(frame, bool(frame['passed'].all()),
                           {'one_over_n_deviation': deviation, 'random_sequences': RANDOM_SEQUENCES})

    def suite_moments(self) -> SuiteResult:
        """Moment table of the configured sequence plus the closed form G = 1 - x."""
        cfg = self.config
        table = moment_bound_check(load_sequence(cfg.c, cfg.horizon + 1), cfg.horizon, cfg.tol)
        rows = table.rows.rename(columns={'passed': 'bound_ok'}).assign(kind='table')
        rows['asserted'] = rows['n'] >= table.n0 if table.n0 is not None else False
        rows['passed'] = rows['implication_ok'] & (~rows['asserted'] | (rows['bound_ok'] & rows['err_ok']))

        x_log = named_majorant('x_log')
        closed = []
        for n in CLOSED_FORM_NS:
            value, err = moment(x_log, n, tol=CLOSED_FORM_TOL)
            exact = 1.0 / ((n + 1) * (n + 2))
            rel = abs(value - exact) / exact
            closed.append({'kind': 'closed_form', 'n': n, 'moment': value, 'err': err,
                           'bound': exact, 'error': rel, 'passed': rel <= CLOSED_FORM_TOL})

        frame = pd.concat([rows, pd.DataFrame(closed)], ignore_index=True)
        passed = table.passed and all(r['passed'] for r in closed)
        return SuiteResult(frame, passed, {'n0': table.n0, 'status': table.status,
                                           'scale_factor': table.scale_factor,
                                           'augmented': table.augmented})

    # -- sets ---------------------------------------------------------------

    def suite_cantor_audit(self) -> SuiteResult:
        """Measure, Carleson sum and arc-length audit of depth 1..10 builds."""
        h = self.majorant
        rows = []
        for depth in tqdm(AUDIT_DEPTHS, desc="Cantor audits"):
            E = build_cantor_set(h, self.config.measure, depth)
            audit = audit_cantor_set(E, h, self.config.measure)
            rows.append({'depth': depth, 'n_gaps': E.n_gaps, **audit.to_dict()})
        frame = pd.DataFrame(rows)
        return SuiteResult(frame, bool(frame['passed'].all()),
                           {'h': self.config.h, 'measure': self.config.measure})

    def suite_carleson(self) -> SuiteResult:
        """Carleson and Khrushchev sums of the builds up to the configured depth."""
        h = self.majorant
        rows = []
        for depth in range(1, self.config.depth + 1):
            E = build_cantor_set(h, self.config.measure, depth)
            comparison = carleson_comparison(E, h)
            partials = carleson_sum(E, h).stage_partials
            rows.append({'depth': depth, 'n_gaps': E.n_gaps, **comparison,
                         'passed': comparison['carleson_sum'] <= 2.0
                         and all(b >= a for a, b in zip(partials, partials[1:]))})
        frame = pd.DataFrame(rows)
        return SuiteResult(frame, bool(frame['passed'].all()) if len(frame) else True,
                           {'h': self.config.h})

    # -- Monte Carlo on the Privalov domain ---------------------------------------

    def suite_proposition(self) -> SuiteResult:
        """
        Per-gap integrability functional against 8 pi h(|gap|), and the
        totals of builds of depth 2..depth with shrinking increments.
        """
        cfg = self.config
        h = self.majorant

        totals: List[Tuple[int, float, float]] = []
        report = None
        if cfg.set_file is None:
            for depth in range(min(2, cfg.depth), cfg.depth + 1):
                E_d = self.domain_set(build_cantor_set(h, cfg.measure, depth))
                report = integrability_functional(E_d, h, cfg.wos, cfg.max_gap)
                totals.append((depth, report.total, report.total_stderr))
        else:
            report = integrability_functional(self.domain_set(self.target_set()), h, cfg.wos, cfg.max_gap)

        gap_rows = report.per_gap.assign(kind='gap')
        increment_rows = []
        increments = [(d, t - tp, math.hypot(s, sp))
                      for (dp, tp, sp), (d, t, s) in zip(totals, totals[1:])]
        for (d0, inc0, s0), (d1, inc1, s1) in zip(increments, increments[1:]):
            increment_rows.append({'kind': 'increment', 'depth': d1, 'value': abs(inc1),
                                   'bound': abs(inc0), 'stderr': s1,
                                   'passed': abs(inc1) <= abs(inc0) + 3.0 * (s0 + s1)})
        frame = pd.concat([gap_rows, pd.DataFrame(increment_rows)], ignore_index=True)
        return SuiteResult(frame, bool(frame['passed'].all()), {
            'seed': cfg.wos.seed,
            'samples': report.samples,
            'aborted': report.aborted,
            'n_gaps': len(report.per_gap),
            'total': report.total,
            'total_stderr': report.total_stderr,
            'empirical_constant': report.empirical_constant,
            'ratio_min': report.ratio_min,
            'ratio_max': report.ratio_max,
            'depth_totals': [{'depth': d, 'total': t, 'stderr': s} for d, t, s in totals],
        })

    def suite_subordination(self) -> SuiteResult:
        """Single-gap domains dominate the full domain on the three largest gaps."""
        cfg = self.config
        depth = SUBORDINATION_DEPTH if cfg.set_file is None else None
        E = self.domain_set(self.target_set(depth))
        walks = WalkOnSpheres(PrivalovDomain(E, cfg.max_gap), cfg.wos).run(0j)

        largest = np.argsort(-E.gap_lengths(), kind='stable')[:3]
        rows = []
        for gap in largest.tolist():
            for B in SUBORDINATION_ARCS:
                report = subordination_check(E, gap, B, cfg.wos, cfg.max_gap, walks=walks)
                rows.append({'kind': 'gap', 's0': B[0], 's1': B[1], **report.to_row()})

        on_E = walks.estimate(component_partition(walks.completed_hits)).get('E')
        monotone = on_E is not None and e_measure_monotonicity(E, on_E)
        rows.append({'kind': 'monotonicity', 'estimate_E': on_E.value if on_E else 0.0,
                     'stderr_E': on_E.stderr if on_E else 0.0,
                     'estimate_single': E.measure / (2.0 * math.pi), 'passed': monotone})
        frame = pd.DataFrame(rows)
        return SuiteResult(frame, bool(frame['passed'].all()),
                           {'seed': cfg.wos.seed, 'gaps': largest.tolist()})

    def suite_subharmonic(self) -> SuiteResult:
        """
        log|p(0)| against boundary averages of log|p| for random polynomials,
        and equality in the gap-free disk for polynomials without zeros in it.
        """
        cfg = self.config
        depth = SUBORDINATION_DEPTH if cfg.set_file is None else None
        E = self.domain_set(self.target_set(depth))
        walks = WalkOnSpheres(PrivalovDomain(E, cfg.max_gap), cfg.wos).run(0j)
        rng = _rng(cfg.wos.seed, 5)

        rows = []
        for k in range(SUBHARMONIC_POLYNOMIALS):
            p = Polynomial.random(rng, int(rng.integers(1, SUBHARMONIC_MAX_DEGREE + 1)))
            report = subharmonicity_check(p, E, cfg.wos, cfg.max_gap, walks=walks)
            rows.append({'kind': 'domain', 'polynomial': k, 'degree': p.degree,
                         'log_abs_p0': report.log_abs_p0, 'mean': report.mean,
                         'stderr': report.stderr, 'reprojected': report.reprojected,
                         'passed': report.passed})

        disk = ArcSet.full_circle()
        disk_walks = WalkOnSpheres(PrivalovDomain(disk), cfg.wos).run(0j)
        root_free = [Polynomial([-2.0, 1.0])] + [
            Polynomial.random(rng, int(rng.integers(1, SUBHARMONIC_MAX_DEGREE + 1)), roots_outside=True)
            for _ in range(MEAN_VALUE_POLYNOMIALS)
        ]
        for k, p in enumerate(root_free):
            report = subharmonicity_check(p, disk, cfg.wos, walks=disk_walks)
            rows.append({'kind': 'disk', 'polynomial': k, 'degree': p.degree,
                         'log_abs_p0': report.log_abs_p0, 'mean': report.mean,
                         'stderr': report.stderr, 'reprojected': report.reprojected,
                         'passed': report.deviation <= 3.0})
        frame = pd.DataFrame(rows)
        return SuiteResult(frame, bool(frame['passed'].all()), {'seed': cfg.wos.seed})
