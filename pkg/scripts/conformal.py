"""
Conformal maps and the circle-arc geometry of the Joukowski-Privalov domain.

The domain is the unit disk with, over every gap of E, the cap cut off by
the hyperbolic geodesic joining the gap endpoints.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from scripts.circle_sets import ArcSet
from scripts.errors import ArgumentError, ContractViolation, DomainError

MAX_L = 0.5
ORTHOGONALITY_TOL = 1e-12
TIE_TOL = 1e-15


# ---------------------------------------------------------------------------
# Joukowski map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JoukowskiMap:
    """phi_L(z) = L/(1 - L^2) (L/z + z/L), mapping Omega_L onto the upper half-plane."""
    L: float

    def __post_init__(self):
        if not 0 < self.L <= MAX_L:
            raise ArgumentError(f"L must lie in (0, {MAX_L}], got {self.L}")

    def in_domain(self, z) -> np.ndarray:
        """Membership in Omega_L = {|z| > L, Im z > 0}."""
        z = np.asarray(z, dtype=complex)
        return (np.abs(z) > self.L) & (z.imag > 0)


def joukowski_forward(m: JoukowskiMap, z):
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("phi_L is undefined at z = 0")
    L = m.L
    w = L / (1.0 - L * L) * (L / z + z / L)
    return w if w.ndim else complex(w)


def joukowski_inverse(m: JoukowskiMap, w, allow_boundary: bool = False):
    """
    Root of z^2 - w (1 - L^2) z + L^2 = 0 lying in Omega_L.

    The two roots multiply to L^2; the one of larger modulus is computed
    first (no cancellation) and is the one with |z| >= L. For real w in the
    image of the half circle both roots have modulus L; this boundary case is
    only accepted with ``allow_boundary`` and returns the root with Im z >= 0.
    """
    w = np.asarray(w, dtype=complex)
    if allow_boundary:
        if np.any(w.imag < 0):
            raise DomainError("w must lie in the closed upper half-plane")
    elif np.any(w.imag <= 0):
        raise DomainError("w must lie in the open upper half-plane")

    L = m.L
    B = w * (1.0 - L * L)
    s = np.sqrt(B * B - 4.0 * L * L)
    s = np.where((B.real * s.real + B.imag * s.imag) < 0, -s, s)
    big = 0.5 * (B + s)
    small = np.where(big != 0, L * L / np.where(big != 0, big, 1.0), 0.0)

    on_circle = np.isclose(np.abs(big), L, rtol=0.0, atol=TIE_TOL * max(L, 1.0))
    if np.any(on_circle) and not allow_boundary:
        raise DomainError("both roots lie on |z| = L (boundary image)")
    upper = np.where(big.imag >= small.imag, big, small)
    z = np.where(on_circle, upper, big)
    return z if z.ndim else complex(z)


# ---------------------------------------------------------------------------
# Cayley map
# ---------------------------------------------------------------------------

def cayley(z):
    """psi(z) = i (1 - z)/(1 + z): unit disk onto the upper half-plane."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == -1):
        raise DomainError("psi has a pole at z = -1")
    w = 1j * (1.0 - z) / (1.0 + z)
    return w if w.ndim else complex(w)


def cayley_inverse(w):
    """psi^-1(w) = (i - w)/(i + w)."""
    w = np.asarray(w, dtype=complex)
    if np.any(w == -1j):
        raise DomainError("psi^-1 has a pole at w = -i")
    z = (1j - w) / (1j + w)
    return z if z.ndim else complex(z)


def distortion_ratio(z1, z2):
    """
    |psi(z1) - psi(z2)| / |z1 - z2| for points of the closed right half-disk.

    Evaluated through the identity psi(z1) - psi(z2) = 2i (z2 - z1)/((1+z1)(1+z2)),
    which stays accurate for nearby points. The value lies in [1/2, 2].
    """
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    if np.any(z1 == z2):
        raise ArgumentError("distortion_ratio needs distinct points")
    for z in (z1, z2):
        if np.any(np.abs(z) > 1.0 + 1e-12) or np.any(z.real < -1e-12):
            raise ContractViolation("points must lie in the closed unit disk with Re z >= 0")
    ratio = 2.0 / (np.abs(1.0 + z1) * np.abs(1.0 + z2))
    return ratio if ratio.ndim else float(ratio)


def gap_scale(a: float, b: float) -> float:
    """
    Half-width L of the interval [-L, L] that a gap (a, b) becomes after
    rotating its midpoint to angle 0 and applying psi. Equals tan(|gap|/4).
    """
    half = 0.5 * (b - a)
    endpoints = np.exp(1j * np.array([-half, half]))
    images = cayley(endpoints)
    return float(0.5 * abs(images[1].real - images[0].real))


def ell_L_comparison(gap_lengths) -> pd.DataFrame:
    """Check |gap|/2 <= 2L <= 2|gap| for every gap length."""
    rows = []
    for length in np.atleast_1d(np.asarray(gap_lengths, dtype=float)).tolist():
        L = gap_scale(0.0, length)
        rows.append({
            'length': length,
            'L': L,
            'passed': length / 2.0 <= 2.0 * L <= 2.0 * length,
        })
    return pd.DataFrame(rows, columns=['length', 'L', 'passed'])


# ---------------------------------------------------------------------------
# Geodesics and the Privalov domain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeodesicArc:
    """Arc of the circle |z - center| = radius orthogonal to the unit circle."""
    a: float
    b: float
    center: complex
    radius: float

    @property
    def theta(self) -> float:
        return 0.5 * (self.b - self.a)

    @property
    def phi0(self) -> float:
        """Direction from the center to the arc's innermost point."""
        return math.atan2(self.center.imag, self.center.real) + math.pi

    @property
    def half_angle(self) -> float:
        """Half opening of the arc seen from its center."""
        return 0.5 * math.pi - self.theta

    @property
    def orthogonality_defect(self) -> float:
        return abs(abs(self.center) ** 2 - self.radius ** 2 - 1.0)

    def points(self, count: int) -> np.ndarray:
        s = np.linspace(-self.half_angle, self.half_angle, count)
        return self.center + self.radius * np.exp(1j * (self.phi0 + s))

    def parameter(self, z) -> np.ndarray:
        """Position along the arc in [0, 1], one endpoint to the other."""
        z = np.asarray(z, dtype=complex)
        delta = np.angle((z - self.center) * np.exp(-1j * self.phi0))
        return np.clip((delta + self.half_angle) / (2.0 * self.half_angle), 0.0, 1.0)


def geodesic_for_gap(a: float, b: float, max_gap: Optional[float] = None) -> GeodesicArc:
    """Geodesic over the gap (a, b): center e^{i(a+b)/2}/cos(theta), radius tan(theta)."""
    length = b - a
    if not length > 0:
        raise ArgumentError(f"degenerate gap ({a}, {b})")
    if max_gap is not None and length > max_gap * (1.0 + 1e-12):
        raise ArgumentError(f"gap length {length} exceeds max_gap {max_gap}")
    if length >= math.pi:
        raise ArgumentError(f"gap length {length} must be below pi")
    theta = 0.5 * length
    mid = 0.5 * (a + b)
    center = complex(np.exp(1j * mid) / math.cos(theta))
    return GeodesicArc(a=float(a), b=float(b), center=center, radius=math.tan(theta))


@dataclass
class Membership:
    kind: str  # 'inside' | 'in_cap' | 'outside_disk'
    gap: Optional[int] = None


@dataclass
class BoundaryHit:
    kind: str  # 'on_E' | 'on_geodesic'
    gap: Optional[int]
    point: complex


class PrivalovDomain:
    """
    Unit disk minus the closed caps between each gap and its geodesic.

    Parameters
    ----------
    arc_set : ArcSet
        The set E; every logical gap gets a geodesic
    max_gap : float, optional
        Reject gaps longer than this (None disables the check)
    """

    def __init__(self, arc_set: ArcSet, max_gap: Optional[float] = 0.1):
        self.arc_set = arc_set
        self.max_gap = max_gap
        self.geodesics: List[GeodesicArc] = [
            geodesic_for_gap(a, b, max_gap) for a, b in arc_set.logical_gaps()
        ]
        self.centers = np.array([g.center for g in self.geodesics], dtype=complex)
        self.radii = np.array([g.radius for g in self.geodesics], dtype=float)
        self.phi0 = np.array([g.phi0 for g in self.geodesics], dtype=float)
        self.half_angles = np.array([g.half_angle for g in self.geodesics], dtype=float)
        self.endpoints_a = np.exp(1j * np.array([g.a for g in self.geodesics], dtype=float))
        self.endpoints_b = np.exp(1j * np.array([g.b for g in self.geodesics], dtype=float))

    @property
    def n_gaps(self) -> int:
        return len(self.geodesics)

    # -- vectorized kernels used by the walk-on-spheres engine ---------------

    def cap_codes(self, z: np.ndarray) -> np.ndarray:
        """-1 inside the domain, -2 outside the open disk, else the owning gap index."""
        z = np.asarray(z, dtype=complex).ravel()
        codes = np.full(z.shape, -1, dtype=int)
        if self.n_gaps:
            in_cap = np.abs(z[:, None] - self.centers[None, :]) <= self.radii[None, :]
            hit = in_cap.any(axis=1)
            codes[hit] = np.argmax(in_cap[hit], axis=1)
        codes[np.abs(z) >= 1.0] = -2
        return codes

    def _geodesic_distances(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Distance to every geodesic arc and the clipped angular offset, shape (n, gaps)."""
        v = z[:, None] - self.centers[None, :]
        delta = np.angle(v * np.exp(-1j * self.phi0)[None, :])
        on_arc = np.abs(delta) <= self.half_angles[None, :]
        to_circle = np.maximum(np.abs(v) - self.radii[None, :], 0.0)
        to_ends = np.minimum(np.abs(z[:, None] - self.endpoints_a[None, :]),
                             np.abs(z[:, None] - self.endpoints_b[None, :]))
        return np.where(on_arc, to_circle, to_ends), delta

    def boundary_distance_array(self, z: np.ndarray) -> np.ndarray:
        """Lower bound of the distance to the boundary; no membership check."""
        z = np.asarray(z, dtype=complex).ravel()
        d = np.maximum(1.0 - np.abs(z), 0.0)
        if self.n_gaps:
            geo, _ = self._geodesic_distances(z)
            d = np.minimum(d, geo.min(axis=1))
        return d

    def classify_array(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Nearest boundary component (-1 for E) and the projected boundary point."""
        z = np.asarray(z, dtype=complex).ravel()
        to_unit = 1.0 - np.abs(z)
        radial = np.where(np.abs(z) > 0, z / np.where(np.abs(z) > 0, np.abs(z), 1.0), 1.0 + 0j)
        if not self.n_gaps:
            return np.full(z.shape, -1, dtype=int), radial

        geo, delta = self._geodesic_distances(z)
        nearest = np.argmin(geo, axis=1)
        rows = np.arange(z.size)
        to_geo = geo[rows, nearest]
        on_E = to_unit <= to_geo + TIE_TOL

        clipped = np.clip(delta[rows, nearest], -self.half_angles[nearest], self.half_angles[nearest])
        projected = self.centers[nearest] + self.radii[nearest] * np.exp(1j * (self.phi0[nearest] + clipped))
        gaps = np.where(on_E, -1, nearest)
        points = np.where(on_E, radial, projected)
        return gaps, points


def domain_membership(D: PrivalovDomain, z: complex) -> Membership:
    code = int(D.cap_codes(np.array([z]))[0])
    if code == -2:
        return Membership('outside_disk')
    if code == -1:
        return Membership('inside')
    return Membership('in_cap', gap=code)


def distance_to_boundary(D: PrivalovDomain, z: complex) -> float:
    if domain_membership(D, z).kind != 'inside':
        raise ContractViolation(f"{z} is not inside the domain")
    return float(D.boundary_distance_array(np.array([z]))[0])


def classify_boundary_hit(D: PrivalovDomain, z: complex, shell: float) -> BoundaryHit:
    """Assign a point within ``shell`` of the boundary to E or to a geodesic."""
    if D.boundary_distance_array(np.array([z]))[0] > shell:
        raise ContractViolation(f"{z} is farther than {shell} from the boundary")
    gaps, points = D.classify_array(np.array([z]))
    gap = int(gaps[0])
    if gap < 0:
        return BoundaryHit('on_E', None, complex(points[0]))
    return BoundaryHit('on_geodesic', gap, complex(points[0]))


def omega_L_domain(L: float) -> PrivalovDomain:
    """
    Omega_L carried into the disk by psi^-1: the disk minus the cap over the
    gap (-2 arctan L, 2 arctan L). The point i corresponds to 0.
    """
    JoukowskiMap(L)
    beta = 2.0 * math.atan(L)
    return PrivalovDomain(ArcSet.from_gaps([(-beta, beta)]), max_gap=None)
