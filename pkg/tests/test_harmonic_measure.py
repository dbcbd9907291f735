import dataclasses
import math

import numpy as np
import pandas as pd
import pytest

from scripts.circle_sets import ArcSet
from scripts.conformal import PrivalovDomain
from scripts.errors import ArgumentError, ContractViolation, EstimateAborted
from scripts.harmonic_measure import (
    ABORTED,
    Polynomial,
    WalkOnSpheres,
    WosConfig,
    arc_measure_bound,
    arc_measure_exact,
    component_partition,
    e_measure_monotonicity,
    halfplane_measure,
    integrability_functional,
    omega_L_arc_estimate,
    semicircle_partition,
    subharmonicity_check,
    subordination_check,
    whole_boundary_partition,
    wos_estimate,
)
from scripts.majorants import named_majorant

TWO_GAPS = [(0.0, 0.1), (1.0, 1.1)]


class TestClosedForms:
    def test_halfplane(self):
        assert halfplane_measure(-math.inf, math.inf) == pytest.approx(1.0)
        assert halfplane_measure(0.0, math.inf) == pytest.approx(0.5)
        assert halfplane_measure(-1.0, 1.0) == pytest.approx(0.5)
        with pytest.raises(ArgumentError):
            halfplane_measure(1.0, 0.0)

    @pytest.mark.parametrize('L', [0.01, 0.1, 0.5])
    @pytest.mark.parametrize('t', [0.3, math.pi / 4, math.pi / 2])
    def test_exact_matches_arctan_difference(self, L, t):
        x = 2 * L / (1 - L * L)
        direct = (math.atan(x) - math.atan(x * math.cos(t))) / math.pi
        assert arc_measure_exact(L, t) == pytest.approx(direct, rel=1e-9, abs=1e-15)

    def test_reference_value(self):
        assert arc_measure_exact(0.1, math.pi / 4) == pytest.approx(0.018286, abs=5e-6)
        assert arc_measure_exact(0.1, math.pi / 2) == pytest.approx(2 * math.atan(0.1) / math.pi, rel=1e-12)

    def test_bound_dominates_exact(self):
        L, t = np.meshgrid(np.linspace(0.01, 0.5, 50), np.linspace(0.01, math.pi / 2, 100))
        assert np.all(arc_measure_exact(L, t) <= arc_measure_bound(L, t) * (1 + 1e-12))

    def test_monotone_in_t(self):
        t = np.linspace(0.01, math.pi / 2, 200)
        for L in (0.05, 0.3, 0.5):
            assert np.all(np.diff(arc_measure_exact(np.full_like(t, L), t)) >= 0)

    def test_not_monotone_in_L(self):
        # x^2 cos t > 1 for both radii at t = 0.3
        assert arc_measure_exact(0.5, 0.3) < arc_measure_exact(0.45, 0.3)

    @pytest.mark.parametrize('L, t', [(0.0, 0.5), (0.6, 0.5), (0.1, 0.0), (0.1, 2.0)])
    def test_argument_ranges(self, L, t):
        with pytest.raises(ArgumentError):
            arc_measure_exact(L, t)


class TestConfig:
    def test_defaults(self):
        cfg = WosConfig()
        assert cfg.eps_shell == 1e-6
        assert cfg.samples == 100_000
        assert cfg.to_dict()['block_size'] == 4096

    @pytest.mark.parametrize('field, value', [('eps_shell', 0.0), ('samples', 0), ('seed', -1), ('seed', 2 ** 64)])
    def test_invalid(self, field, value):
        with pytest.raises(ArgumentError):
            WosConfig(**{field: value})


class TestWalkOnSpheres:
    def test_full_disk_halves(self, small_wos):
        estimates = wos_estimate(PrivalovDomain(ArcSet.full_circle()), 0j, semicircle_partition, small_wos)
        upper = estimates['upper']
        assert upper.samples == small_wos.samples
        assert abs(upper.value - 0.5) <= 4 * upper.stderr
        assert sum(upper.hits_by_component.values()) == small_wos.samples

    def test_whole_boundary_is_one(self, small_wos, depth4_set):
        estimates = wos_estimate(PrivalovDomain(depth4_set, None), 0j, whole_boundary_partition, small_wos)
        assert estimates['boundary'].value == 1.0

    def test_components_cover_all_walks(self, small_wos, depth4_set):
        result = WalkOnSpheres(PrivalovDomain(depth4_set, None), small_wos).run()
        labels = component_partition(result.completed_hits)
        assert len(labels) == result.completed
        assert set(labels) <= {'E'} | {f'gap_{k}' for k in range(depth4_set.n_gaps)}

    def test_same_seed_same_walks(self, small_wos):
        D = PrivalovDomain(ArcSet.from_gaps(TWO_GAPS))
        first = WalkOnSpheres(D, small_wos).run().hits
        second = WalkOnSpheres(D, small_wos).run().hits
        pd.testing.assert_frame_equal(first, second)

    def test_workers_do_not_change_results(self, small_wos):
        D = PrivalovDomain(ArcSet.from_gaps(TWO_GAPS))
        serial = WalkOnSpheres(D, small_wos).run().hits
        parallel = WalkOnSpheres(D, dataclasses.replace(small_wos, workers=2)).run().hits
        pd.testing.assert_frame_equal(serial, parallel)

    def test_exit_points_lie_on_boundary(self, small_wos):
        D = PrivalovDomain(ArcSet.from_gaps(TWO_GAPS))
        points = WalkOnSpheres(D, small_wos).run().points
        assert np.all(np.abs(points) <= 1.0 + 1e-12)
        assert np.all(D.boundary_distance_array(points) <= 1e-9)

    def test_start_must_be_inside(self, small_wos):
        D = PrivalovDomain(ArcSet.from_gaps(TWO_GAPS))
        with pytest.raises(ContractViolation):
            WalkOnSpheres(D, small_wos).run(1.5 + 0j)
        with pytest.raises(ContractViolation):
            WalkOnSpheres(D, dataclasses.replace(small_wos, eps_shell=2.0)).run()

    def test_step_cap_aborts(self, small_wos):
        D = PrivalovDomain(ArcSet.from_gaps(TWO_GAPS))
        with pytest.raises(EstimateAborted):
            WalkOnSpheres(D, dataclasses.replace(small_wos, max_steps=1)).run()

    def test_aborted_walks_are_flagged(self):
        D = PrivalovDomain(ArcSet.from_gaps(TWO_GAPS))
        cfg = WosConfig(eps_shell=1e-4, samples=4000, max_steps=8, seed=3, block_size=1000)
        with pytest.raises(EstimateAborted) as info:
            WalkOnSpheres(D, cfg).run()
        assert info.value.aborted > 0

    def test_omega_L_arc(self):
        cfg = WosConfig(eps_shell=1e-5, samples=20_000, seed=5)
        estimate, exact = omega_L_arc_estimate(0.1, math.pi / 2, cfg)
        assert exact == pytest.approx(arc_measure_exact(0.1, math.pi / 2))
        assert abs(estimate.value - exact) <= 4 * estimate.stderr


class TestChecks:
    def test_subordination(self, small_wos):
        E = ArcSet.from_gaps(TWO_GAPS)
        report = subordination_check(E, 0, (0.0, 1.0), small_wos)
        assert report.passed
        assert report.length == pytest.approx(0.1)
        assert set(report.to_row()) >= {'gap', 'estimate_E', 'estimate_single', 'passed'}

    def test_subordination_empty_arc(self, small_wos):
        report = subordination_check(ArcSet.from_gaps(TWO_GAPS), 1, (0.5, 0.5), small_wos)
        assert report.estimate_E.value == 0.0
        assert report.passed

    def test_subordination_gap_range(self, small_wos):
        with pytest.raises(ArgumentError):
            subordination_check(ArcSet.from_gaps(TWO_GAPS), 2, cfg=small_wos)

    def test_E_measure_below_full_disk_value(self, small_wos, depth4_set):
        estimates = wos_estimate(PrivalovDomain(depth4_set, None), 0j, component_partition, small_wos)
        assert e_measure_monotonicity(depth4_set, estimates['E'])

    def test_integrability(self, small_wos, depth4_set, sqrt_h):
        report = integrability_functional(depth4_set, sqrt_h, small_wos)
        assert report.passed
        assert len(report.per_gap) == depth4_set.n_gaps
        assert report.total > 0
        assert report.per_gap['hits'].sum() > 0
        assert 1.0 - 1e-9 <= report.ratio_min <= report.ratio_max <= 2.0 + 1e-9

    def test_integrability_zero_majorant(self, small_wos, depth4_set):
        report = integrability_functional(depth4_set, named_majorant('constant:0'), small_wos)
        assert report.total == 0.0
        assert report.total_stderr == 0.0
        assert report.passed


class TestPolynomial:
    def test_trailing_zeros_trimmed(self):
        p = Polynomial([1, 2, 0, 0])
        assert p.degree == 1
        assert p(1.0) == pytest.approx(3.0)

    def test_roots(self):
        np.testing.assert_allclose(Polynomial([-2, 1]).roots(), [2.0])
        np.testing.assert_allclose(Polynomial.from_roots([1, 2]).coefficients, [2, -3, 1])
        assert Polynomial([5]).roots().size == 0

    def test_random_roots_outside(self, rng):
        p = Polynomial.random(rng, 10, roots_outside=True)
        assert p.degree == 10
        assert np.all(np.abs(p.roots()) >= 1.2 - 1e-6)


class TestSubharmonicity:
    def test_root_inside_gives_strict_inequality(self, small_wos, depth4_set):
        report = subharmonicity_check(Polynomial([-0.5, 1]), depth4_set, small_wos)
        assert report.passed
        assert report.mean > report.log_abs_p0 + 3 * report.stderr

    def test_root_free_polynomial_matches_mean(self, small_wos, depth4_set):
        report = subharmonicity_check(Polynomial([-2, 1]), depth4_set, small_wos)
        assert report.log_abs_p0 == pytest.approx(math.log(2.0))
        assert report.deviation <= 4.0

    def test_vanishing_at_origin_is_trivial(self, small_wos, depth4_set):
        report = subharmonicity_check(Polynomial([0, 1]), depth4_set, small_wos)
        assert report.trivial and report.passed

    def test_zero_polynomial_rejected(self, small_wos, depth4_set):
        with pytest.raises(ArgumentError):
            subharmonicity_check(Polynomial([0]), depth4_set, small_wos)

    def test_shared_walks(self, small_wos, depth4_set):
        walks = WalkOnSpheres(PrivalovDomain(depth4_set, None), small_wos).run()
        report = subharmonicity_check(Polynomial([1, 0.5]), depth4_set, walks=walks)
        assert report.samples == walks.completed
        assert (walks.hits['gap'] != ABORTED).all()
