import math

import numpy as np
import pytest

from scripts.circle_sets import ArcSet
from scripts.conformal import (
    JoukowskiMap,
    PrivalovDomain,
    cayley,
    cayley_inverse,
    classify_boundary_hit,
    distance_to_boundary,
    distortion_ratio,
    domain_membership,
    ell_L_comparison,
    gap_scale,
    geodesic_for_gap,
    joukowski_forward,
    joukowski_inverse,
    omega_L_domain,
)
from scripts.errors import ArgumentError, ContractViolation, DomainError


class TestJoukowski:
    @pytest.mark.parametrize('L', [0.01, 0.05, 0.1, 0.3, 0.5])
    def test_inverse_undoes_forward(self, L, rng):
        m = JoukowskiMap(L)
        z = rng.uniform(-1, 1, 500) + 1j * rng.uniform(0.01, 1, 500)
        z = z[m.in_domain(z)]
        np.testing.assert_allclose(joukowski_inverse(m, joukowski_forward(m, z)), z, atol=1e-10)

    def test_half_circle_maps_to_interval(self):
        L = 0.1
        s = np.linspace(0.0, math.pi, 50)
        w = joukowski_forward(JoukowskiMap(L), L * np.exp(1j * s))
        np.testing.assert_allclose(w.imag, 0.0, atol=1e-14)
        np.testing.assert_allclose(w.real, 2 * L * np.cos(s) / (1 - L * L), rtol=1e-12)

    def test_boundary_root_needs_flag(self):
        m = JoukowskiMap(0.1)
        w = complex(joukowski_forward(m, 0.1 * np.exp(0.5j)).real, 0.0)
        with pytest.raises(DomainError):
            joukowski_inverse(m, w)
        z = joukowski_inverse(m, w, allow_boundary=True)
        assert abs(z) == pytest.approx(0.1)
        assert z.imag >= 0

    def test_errors(self):
        with pytest.raises(ArgumentError):
            JoukowskiMap(0.6)
        with pytest.raises(DomainError):
            joukowski_forward(JoukowskiMap(0.1), 0j)
        with pytest.raises(DomainError):
            joukowski_inverse(JoukowskiMap(0.1), -1j)


class TestCayley:
    def test_values(self):
        assert cayley(0j) == pytest.approx(1j)
        assert cayley_inverse(1j) == pytest.approx(0j)
        assert cayley(np.exp(1j * 2 * math.atan(0.3))) == pytest.approx(0.3)

    def test_round_trip(self, rng):
        z = 0.99 * np.sqrt(rng.uniform(0, 1, 200)) * np.exp(2j * math.pi * rng.uniform(0, 1, 200))
        np.testing.assert_allclose(cayley_inverse(cayley(z)), z, atol=1e-12)

    def test_poles(self):
        with pytest.raises(DomainError):
            cayley(-1 + 0j)
        with pytest.raises(DomainError):
            cayley_inverse(-1j)

    def test_distortion_matches_direct_ratio(self, rng):
        z1 = rng.uniform(0, 0.7, 100) + 1j * rng.uniform(-0.7, 0.7, 100)
        z2 = rng.uniform(0, 0.7, 100) + 1j * rng.uniform(-0.7, 0.7, 100)
        direct = np.abs(cayley(z1) - cayley(z2)) / np.abs(z1 - z2)
        ratio = distortion_ratio(z1, z2)
        np.testing.assert_allclose(ratio, direct, rtol=1e-9)
        assert np.all((ratio >= 0.5) & (ratio <= 2.0))

    def test_distortion_contract(self):
        with pytest.raises(ArgumentError):
            distortion_ratio(0.5, 0.5)
        with pytest.raises(ContractViolation):
            distortion_ratio(-0.5 + 0j, 0.5)

    def test_gap_scale(self):
        assert gap_scale(1.0, 1.4) == pytest.approx(math.tan(0.1), rel=1e-12)
        assert ell_L_comparison([0.01, 0.1, 1.0])['passed'].all()


class TestGeodesics:
    def test_orthogonal_to_unit_circle(self):
        g = geodesic_for_gap(0.3, 0.4)
        assert g.orthogonality_defect < 1e-12
        ends = g.points(2)
        np.testing.assert_allclose(np.abs(ends), 1.0, atol=1e-12)
        angles = sorted(np.mod(np.angle(ends), 2 * math.pi).tolist())
        np.testing.assert_allclose(angles, [0.3, 0.4], atol=1e-12)

    def test_parameter_runs_along_arc(self):
        g = geodesic_for_gap(1.0, 1.1)
        s = g.parameter(g.points(5))
        np.testing.assert_allclose(s, [0.0, 0.25, 0.5, 0.75, 1.0], atol=1e-9)

    def test_rotation_covariance(self):
        alpha = 2.1
        g = geodesic_for_gap(0.3, 0.45)
        rotated = geodesic_for_gap(0.3 + alpha, 0.45 + alpha)
        np.testing.assert_allclose(rotated.points(9), np.exp(1j * alpha) * g.points(9), atol=1e-12)
        assert rotated.radius == pytest.approx(g.radius, rel=1e-12)

    def test_long_gaps_rejected(self):
        with pytest.raises(ArgumentError):
            geodesic_for_gap(0.0, 0.2, max_gap=0.1)
        with pytest.raises(ArgumentError):
            geodesic_for_gap(0.0, 3.5)


class TestPrivalovDomain:
    @pytest.fixture
    def one_gap(self):
        return PrivalovDomain(ArcSet.from_gaps([(0.0, 0.1)]))

    def test_membership(self, one_gap):
        assert domain_membership(one_gap, 0j).kind == 'inside'
        cap = domain_membership(one_gap, 0.9999 * np.exp(0.05j))
        assert cap.kind == 'in_cap' and cap.gap == 0
        assert domain_membership(one_gap, 1.5 + 0j).kind == 'outside_disk'

    def test_distance_from_origin(self, one_gap):
        theta = 0.05
        expected = (1 - math.sin(theta)) / math.cos(theta)
        assert distance_to_boundary(one_gap, 0j) == pytest.approx(expected, rel=1e-12)

    def test_distance_never_exceeds_sampled_boundary(self, depth4_set, rng):
        D = PrivalovDomain(depth4_set, max_gap=None)
        samples = [np.exp(1j * np.linspace(s, e, 4000)) for s, e in depth4_set.arcs().tolist()]
        samples += [g.points(10000) for g in D.geodesics]
        boundary = np.concatenate(samples)

        z = rng.uniform(0.8, 0.999, 400) * np.exp(2j * math.pi * rng.uniform(0, 1, 400))
        z = z[D.cap_codes(z) == -1]
        assert z.size > 100
        for point in z:
            oracle = np.abs(boundary - point).min()
            assert distance_to_boundary(D, point) <= oracle + 1e-12

    def test_distance_requires_interior(self, one_gap):
        with pytest.raises(ContractViolation):
            distance_to_boundary(one_gap, 0.9999 * np.exp(0.05j))

    def test_classification(self, one_gap):
        hit = classify_boundary_hit(one_gap, (1 - 1e-7) * np.exp(2.0j), 1e-6)
        assert hit.kind == 'on_E'
        assert abs(hit.point) == pytest.approx(1.0)

        g = one_gap.geodesics[0]
        near_geo = g.center + (g.radius + 1e-8) * np.exp(1j * g.phi0)
        hit = classify_boundary_hit(one_gap, near_geo, 1e-6)
        assert hit.kind == 'on_geodesic' and hit.gap == 0

        with pytest.raises(ContractViolation):
            classify_boundary_hit(one_gap, 0j, 1e-6)

    def test_max_gap_enforced(self):
        with pytest.raises(ArgumentError):
            PrivalovDomain(ArcSet.from_gaps([(0.0, 0.3)]), max_gap=0.1)

    def test_omega_L_cap(self):
        L = 0.1
        D = omega_L_domain(L)
        assert D.n_gaps == 1
        assert D.arc_set.gap_lengths()[0] == pytest.approx(4 * math.atan(L))
        g = D.geodesics[0]
        # innermost point of the geodesic is the image of iL
        assert cayley(g.center + g.radius * np.exp(1j * g.phi0)) == pytest.approx(1j * L)
