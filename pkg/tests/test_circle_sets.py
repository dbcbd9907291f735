import math

import numpy as np
import pytest

from scripts.circle_sets import (
    TWO_PI,
    ArcSet,
    audit_cantor_set,
    build_cantor_set,
    carleson_comparison,
    carleson_sum,
    max_arc_length,
    split_long_gaps,
)
from scripts.errors import ArgumentError
from scripts.majorants import named_majorant


class TestArcSet:
    def test_wrapping_gap(self):
        E = ArcSet.from_gaps([(6.0, 6.5)])
        assert E.wraps
        assert E.gaps.shape == (2, 2)
        assert E.n_gaps == 1
        np.testing.assert_allclose(E.gap_lengths(), [0.5])
        assert E.measure == pytest.approx(TWO_PI - 0.5)

    def test_touching_gaps_stay_separate(self):
        E = ArcSet.from_gaps([(0.1, 0.2), (0.2, 0.3)])
        assert E.n_gaps == 2

    def test_overlapping_gaps_merge(self):
        E = ArcSet.from_gaps([(0.1, 0.25), (0.2, 0.3)])
        assert E.logical_gaps() == [(0.1, 0.3)]

    @pytest.mark.parametrize('gap', [(0.2, 0.1), (0.3, 0.3), (0.0, TWO_PI)])
    def test_invalid_gaps(self, gap):
        with pytest.raises(ArgumentError):
            ArcSet.from_gaps([gap])

    def test_full_circle(self):
        E = ArcSet.full_circle()
        assert E.n_gaps == 0
        assert E.measure == TWO_PI
        assert max_arc_length(E) == pytest.approx(TWO_PI)

    def test_contains_angle(self):
        E = ArcSet.from_gaps([(1.0, 2.0)])
        inside = E.contains_angle(np.array([0.5, 1.5, 2.5, 1.5 + TWO_PI]))
        assert inside.tolist() == [True, False, True, False]

    def test_json_round_trip(self, tmp_path, depth4_set):
        path = depth4_set.to_json(tmp_path / 'set.json')
        loaded = ArcSet.from_json(path)
        np.testing.assert_array_equal(loaded.gaps, depth4_set.gaps)
        assert loaded.stages == depth4_set.stages

    def test_missing_file(self):
        with pytest.raises(FileNotFoundError):
            ArcSet.from_json('nowhere.json')

    def test_canonical_is_idempotent(self):
        E = ArcSet.from_gaps([(6.0, 6.5), (1.0, 1.2), (3.0, 3.1)])
        once = E.canonical()
        twice = once.canonical()
        assert once.wraps and twice.wraps
        np.testing.assert_allclose(once.gaps, E.gaps, atol=1e-12)
        np.testing.assert_allclose(twice.gaps, once.gaps, atol=1e-12)
        np.testing.assert_allclose(twice.gap_lengths(), [0.2, 0.1, 0.5], atol=1e-12)

    def test_gaps_frame(self):
        frame = ArcSet.from_gaps([(1.0, 1.5), (3.0, 3.25)]).gaps_frame()
        assert list(frame.columns) == ['gap', 'start', 'end', 'length']
        np.testing.assert_allclose(frame['length'], [0.5, 0.25])


class TestCantorConstruction:
    def test_gap_count_and_measure(self, sqrt_h):
        E = build_cantor_set(sqrt_h, math.pi, 6)
        assert E.n_gaps == 63
        assert E.stages == 6
        assert E.measure >= math.pi

    @pytest.mark.parametrize('depth', [1, 4, 10])
    def test_audit_passes(self, sqrt_h, depth):
        target = 0.5
        audit = audit_cantor_set(build_cantor_set(sqrt_h, target, depth), sqrt_h, target)
        assert audit.passed
        assert audit.to_dict()['passed']

    def test_depth_zero_is_full_circle(self, sqrt_h):
        E = build_cantor_set(sqrt_h, math.pi, 0)
        assert E.n_gaps == 0
        assert E.measure == TWO_PI

    def test_degenerate_majorant_fails_audit(self):
        h = named_majorant('constant:1')
        E = build_cantor_set(h, math.pi, 2)
        assert E.n_gaps == 0
        assert not audit_cantor_set(E, h, math.pi).arcs_ok

    def test_logical_arc_through_zero(self, sqrt_h):
        E = build_cantor_set(sqrt_h, math.pi, 1)
        audit = audit_cantor_set(E, sqrt_h, math.pi)
        eps = E.construction_log[0].epsilon
        assert audit.max_arc_logical == pytest.approx(TWO_PI - eps)
        assert audit.max_arc_logical > audit.arc_bound
        assert audit.logical_arc_bound == pytest.approx(TWO_PI)
        assert audit.logical_arcs_ok
        assert audit.to_dict()['max_arc_length_logical'] == audit.max_arc_logical

    def test_logical_arcs_within_twice_chart_bound(self, sqrt_h):
        audit = audit_cantor_set(build_cantor_set(sqrt_h, math.pi, 6), sqrt_h, math.pi)
        assert audit.max_arc_logical <= 2.0 * audit.arc_bound
        assert audit.logical_arcs_ok and audit.passed

    @pytest.mark.parametrize('measure, depth', [(TWO_PI, 3), (0.0, 3), (1.0, 25), (1.0, -1)])
    def test_bad_arguments(self, sqrt_h, measure, depth):
        with pytest.raises(ArgumentError):
            build_cantor_set(sqrt_h, measure, depth)


class TestSplitting:
    def test_split_preserves_measure(self):
        E = ArcSet.from_gaps([(0.0, 0.35), (1.0, 1.05)])
        split = split_long_gaps(E, 0.1)
        assert split.n_gaps == 5
        assert split.measure == pytest.approx(E.measure, abs=1e-14)
        assert split.gap_lengths().max() <= 0.1
        assert split.split_max_gap == 0.1

    def test_gap_at_max_gap_is_unchanged(self):
        E = ArcSet.from_gaps([(0.5, 0.75)])
        split = split_long_gaps(E, 0.25)
        assert split.logical_gaps() == [(0.5, 0.75)]

    def test_split_into_equal_parts(self):
        E = ArcSet.from_gaps([(0.5, 1.5)])
        split = split_long_gaps(E, 0.3)
        assert split.n_gaps == 4
        np.testing.assert_allclose(split.gap_lengths(), [0.25] * 4, atol=1e-14)
        assert split.measure == pytest.approx(E.measure, abs=1e-14)

    def test_split_rejects_nonpositive(self, depth4_set):
        with pytest.raises(ArgumentError):
            split_long_gaps(depth4_set, 0.0)


class TestCarleson:
    def test_sum_below_two_with_nondecreasing_partials(self, sqrt_h):
        result = carleson_sum(build_cantor_set(sqrt_h, math.pi, 8), sqrt_h)
        assert result.total <= 2.0
        assert np.all(np.diff(result.stage_partials) >= 0)
        assert result.stage_partials[-1] == pytest.approx(result.total, rel=1e-9)

    def test_comparison_keys(self, depth4_set, sqrt_h):
        result = carleson_comparison(depth4_set, sqrt_h)
        assert set(result) == {'carleson_sum', 'khrushchev_sum', 'khrushchev_divergent'}
        assert not result['khrushchev_divergent']
        assert result['khrushchev_sum'] > 0

    def test_comparison_without_gaps(self, sqrt_h):
        result = carleson_comparison(ArcSet.full_circle(), sqrt_h)
        assert result['carleson_sum'] == 0.0
        assert result['khrushchev_sum'] == 0.0
