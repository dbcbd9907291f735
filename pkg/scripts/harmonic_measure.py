"""
Harmonic measure: closed forms on the half-plane and on Omega_L, and a
walk-on-spheres estimator on Joukowski-Privalov domains together with the
checks built on it (subordination, the majorant integrability functional,
subharmonicity of log|p|).
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import repeat
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from scripts.circle_sets import ArcSet
from scripts.conformal import PrivalovDomain, cayley, omega_L_domain
from scripts.errors import ArgumentError, ContractViolation, EstimateAborted
from scripts.majorants import RegularMajorant
from scripts.reporting import setup_logger

ON_E = -1
ABORTED = -2
ABORT_LIMIT = 1e-3  # largest tolerated fraction of aborted walks
INTEGRABILITY_CONSTANT = 8.0 * math.pi
ROOT_GUARD = 1e-12
ROOT_SHIFT = 1e-9


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def halfplane_measure(a: float, b: float) -> float:
    """Harmonic measure at i of the interval (a, b) of the real line."""
    if math.isnan(a) or math.isnan(b):
        raise ArgumentError("interval ends must not be NaN")
    if a > b:
        raise ArgumentError(f"interval ({a}, {b}) has a > b")
    return (math.atan(b) - math.atan(a)) / math.pi


def _check_arc_args(L, t) -> Tuple[np.ndarray, np.ndarray]:
    L = np.asarray(L, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(~(L > 0)) or np.any(L > 0.5):
        raise ArgumentError("L must lie in (0, 0.5]")
    if np.any(~(t > 0)) or np.any(t > math.pi / 2):
        raise ArgumentError("t must lie in (0, pi/2]")
    return L, t


def arc_measure_exact(L, t):
    """
    Harmonic measure at i, in Omega_L, of the arc {L e^{is}: 0 <= s <= t}.

    The difference arctan(x) - arctan(x cos t), x = 2L/(1 - L^2), is folded
    into a single arctan to avoid cancellation for small t.
    """
    L, t = _check_arc_args(L, t)
    x = 2.0 * L / (1.0 - L * L)
    u = 2.0 * x * np.sin(0.5 * t) ** 2 / (1.0 + x * x * np.cos(t))
    out = np.arctan(u) / math.pi
    return out if out.ndim else float(out)


def arc_measure_bound(L, t):
    """Upper bound (1 - cos t) 2L / (pi (1 - L^2))."""
    L, t = _check_arc_args(L, t)
    x = 2.0 * L / (1.0 - L * L)
    out = 2.0 * x * np.sin(0.5 * t) ** 2 / math.pi
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Walk-on-spheres
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WosConfig:
    eps_shell: float = 1e-6  # termination distance to the boundary
    max_steps: int = 100_000  # step cap per walk
    seed: int = 0  # 64-bit seed for all walks
    samples: int = 100_000  # number of walks
    workers: int = 1  # processes; results do not depend on it
    block_size: int = 4096  # walks per random stream

    def __post_init__(self):
        if not self.eps_shell > 0:
            raise ArgumentError("eps_shell must be positive")
        if self.max_steps < 1 or self.samples < 1 or self.workers < 1 or self.block_size < 1:
            raise ArgumentError("max_steps, samples, workers and block_size must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ArgumentError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class MeasureEstimate:
    value: float
    stderr: float
    samples: int
    hits_by_component: Dict[str, int] = field(default_factory=dict)
    aborted: int = 0


def _walk_block(domain: PrivalovDomain, z0: complex, cfg: WosConfig, block: int) -> pd.DataFrame:
    """
    Run the walks of one block.

    The block's random stream is Philox keyed by (seed, block), so every walk
    sees the same numbers however blocks are spread over workers.
    """
    start = block * cfg.block_size
    count = min(cfg.block_size, cfg.samples - start)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.seed, spawn_key=(block,))))

    z = np.full(count, z0, dtype=complex)
    steps = np.zeros(count, dtype=np.int64)
    gap = np.full(count, ABORTED, dtype=np.int64)
    point = np.full(count, np.nan, dtype=complex)
    active = np.arange(count)

    while active.size:
        d = domain.boundary_distance_array(z[active])
        done = d < cfg.eps_shell
        if np.any(done):
            finished = active[done]
            gap[finished], point[finished] = domain.classify_array(z[finished])
            active, d = active[~done], d[~done]

        capped = steps[active] >= cfg.max_steps
        if np.any(capped):
            active, d = active[~capped], d[~capped]
        if not active.size:
            break

        theta = rng.uniform(0.0, 2.0 * math.pi, size=active.size)
        z[active] += d * np.exp(1j * theta)
        steps[active] += 1

    return pd.DataFrame({
        'walk': np.arange(start, start + count, dtype=np.int64),
        'gap': gap,
        'x': point.real,
        'y': point.imag,
        'steps': steps,
    })


@dataclass
class WalkResult:
    """Exit records of all walks; ``gap`` is -1 for E, -2 for aborted walks."""
    hits: pd.DataFrame
    samples: int
    aborted: int
    seed: int

    @property
    def completed(self) -> int:
        return self.samples - self.aborted

    @property
    def completed_hits(self) -> pd.DataFrame:
        return self.hits[self.hits['gap'] != ABORTED]

    @property
    def points(self) -> np.ndarray:
        done = self.completed_hits
        return done['x'].to_numpy() + 1j * done['y'].to_numpy()

    def estimate(self, labels: np.ndarray) -> Dict[str, MeasureEstimate]:
        """Hit frequency of every label over the completed walks."""
        labels = np.asarray(labels)
        n = self.completed
        names, counts = np.unique(labels, return_counts=True)
        by_component = {str(k): int(v) for k, v in zip(names.tolist(), counts.tolist())}
        out = {}
        for name, count in by_component.items():
            value = count / n
            out[name] = MeasureEstimate(
                value=value,
                stderr=math.sqrt(value * (1.0 - value) / n),
                samples=n,
                hits_by_component=by_component,
                aborted=self.aborted,
            )
        return out

    def mean(self, values: np.ndarray) -> Tuple[float, float]:
        """Mean over completed walks of per-walk values and its standard error."""
        values = np.asarray(values, dtype=float)
        n = self.completed
        m = math.fsum(values.tolist()) / n
        if n < 2:
            return m, 0.0
        var = math.fsum(((values - m) ** 2).tolist()) / (n - 1)
        return m, math.sqrt(var / n)


class WalkOnSpheres:
    """
    Walk-on-spheres estimator of harmonic measure on a PrivalovDomain.

    Every walk jumps to a uniform point of the largest circle the distance
    bound allows and stops once within ``eps_shell`` of the boundary, where
    it is assigned to E or to the nearest geodesic.
    """

    def __init__(self, domain: PrivalovDomain, cfg: WosConfig = WosConfig()):
        self.domain = domain
        self.cfg = cfg
        self.logger = setup_logger('WalkOnSpheres', 'walk_on_spheres.log')

    def run(self, z0: complex = 0j) -> WalkResult:
        cfg = self.cfg
        if self.domain.cap_codes(np.array([z0]))[0] != -1:
            raise ContractViolation(f"start point {z0} is not inside the domain")
        d0 = float(self.domain.boundary_distance_array(np.array([z0]))[0])
        if not cfg.eps_shell < d0:
            raise ContractViolation(f"eps_shell {cfg.eps_shell} is not below the start distance {d0}")

        n_blocks = math.ceil(cfg.samples / cfg.block_size)
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
                frames = list(executor.map(_walk_block, repeat(self.domain), repeat(z0),
                                           repeat(cfg), range(n_blocks)))
        else:
            frames = [
                _walk_block(self.domain, z0, cfg, block)
                for block in tqdm(range(n_blocks), desc="Walk blocks", disable=n_blocks < 4)
            ]

        hits = pd.concat(frames, ignore_index=True)
        aborted = int((hits['gap'] == ABORTED).sum())
        if aborted:
            self.logger.warning(f"{aborted} of {cfg.samples} walks hit max_steps and are excluded")
        if aborted > ABORT_LIMIT * cfg.samples:
            raise EstimateAborted(aborted, cfg.samples, ABORT_LIMIT)
        return WalkResult(hits=hits, samples=cfg.samples, aborted=aborted, seed=cfg.seed)


Partition = Callable[[pd.DataFrame], np.ndarray]


def component_partition(hits: pd.DataFrame) -> np.ndarray:
    """'E' or 'gap_<k>' for every completed walk."""
    gaps = hits['gap'].to_numpy()
    return np.where(gaps == ON_E, 'E', np.char.add('gap_', gaps.astype(str)))


def semicircle_partition(hits: pd.DataFrame) -> np.ndarray:
    return np.where(hits['y'].to_numpy() >= 0, 'upper', 'lower')


def whole_boundary_partition(hits: pd.DataFrame) -> np.ndarray:
    return np.full(len(hits), 'boundary')


def omega_L_target_partition(t: float) -> Partition:
    """'target' for hits whose image under psi is L e^{is} with 0 <= s <= t."""
    def partition(hits: pd.DataFrame) -> np.ndarray:
        labels = np.full(len(hits), 'rest', dtype=object)
        on_geo = hits['gap'].to_numpy() >= 0
        if np.any(on_geo):
            pts = hits['x'].to_numpy()[on_geo] + 1j * hits['y'].to_numpy()[on_geo]
            angle = np.angle(cayley(pts))
            inside = (angle >= 0.0) & (angle <= t)
            labels[np.nonzero(on_geo)[0][inside]] = 'target'
        return labels.astype(str)
    return partition


def wos_estimate(D: PrivalovDomain, z0: complex = 0j, partition: Optional[Partition] = None,
                 cfg: WosConfig = WosConfig()) -> Dict[str, MeasureEstimate]:
    """Per-component harmonic measure at z0 estimated by walk-on-spheres."""
    result = WalkOnSpheres(D, cfg).run(z0)
    partition = partition or component_partition
    return result.estimate(partition(result.completed_hits))


def omega_L_arc_estimate(L: float, t: float, cfg: WosConfig = WosConfig()) -> Tuple[MeasureEstimate, float]:
    """Monte Carlo and exact harmonic measure at i of the arc A_{L,t} in Omega_L."""
    exact = arc_measure_exact(L, t)
    result = WalkOnSpheres(omega_L_domain(L), cfg).run(0j)
    estimates = result.estimate(omega_L_target_partition(t)(result.completed_hits))
    target = estimates.get('target', MeasureEstimate(0.0, 0.0, result.completed, aborted=result.aborted))
    return target, exact


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

@dataclass
class SubordinationReport:
    gap: int
    length: float
    estimate_E: MeasureEstimate
    estimate_single: MeasureEstimate

    @property
    def passed(self) -> bool:
        slack = 3.0 * (self.estimate_E.stderr + self.estimate_single.stderr)
        return self.estimate_E.value <= self.estimate_single.value + slack

    def to_row(self) -> Dict:
        return {
            'gap': self.gap, 'length': self.length,
            'estimate_E': self.estimate_E.value, 'stderr_E': self.estimate_E.stderr,
            'estimate_single': self.estimate_single.value, 'stderr_single': self.estimate_single.stderr,
            'passed': self.passed,
        }


def subordination_check(E: ArcSet, gap: int, B: Tuple[float, float] = (0.0, 1.0),
                        cfg: WosConfig = WosConfig(), max_gap: Optional[float] = None,
                        walks: Optional[WalkResult] = None) -> SubordinationReport:
    """
    Compare the harmonic measure at 0 of a sub-arc B of the geodesic over
    ``gap`` in the full domain with that in the domain having only this gap.

    B is given by arc parameters (s0, s1) in [0, 1]. ``walks`` may carry
    walks already run in the full domain.
    """
    logical = E.logical_gaps()
    if not 0 <= gap < len(logical):
        raise ArgumentError(f"gap index {gap} out of range")
    a, b = logical[gap]
    s0, s1 = B
    if s1 <= s0:
        empty = MeasureEstimate(0.0, 0.0, cfg.samples)
        return SubordinationReport(gap, b - a, empty, empty)

    def estimate(domain: PrivalovDomain, index: int, result: Optional[WalkResult] = None) -> MeasureEstimate:
        result = result or WalkOnSpheres(domain, cfg).run(0j)
        hits = result.completed_hits
        pts = hits['x'].to_numpy() + 1j * hits['y'].to_numpy()
        s = domain.geodesics[index].parameter(pts)
        in_B = (hits['gap'].to_numpy() == index) & (s >= s0) & (s <= s1)
        labels = np.where(in_B, 'B', 'rest')
        return result.estimate(labels).get('B', MeasureEstimate(0.0, 0.0, result.completed))

    full = estimate(PrivalovDomain(E, max_gap), gap, walks)
    single = estimate(PrivalovDomain(ArcSet.from_gaps([(a, b)]), max_gap), 0)
    return SubordinationReport(gap, b - a, full, single)


def e_measure_monotonicity(E: ArcSet, estimate: MeasureEstimate) -> bool:
    """The E-component measure in the domain never exceeds |E|/(2pi)."""
    return estimate.value <= E.measure / (2.0 * math.pi) + 3.0 * estimate.stderr


@dataclass
class IntegrabilityReport:
    per_gap: pd.DataFrame
    total: float
    total_stderr: float
    empirical_constant: float
    ratio_min: float
    ratio_max: float
    samples: int
    aborted: int

    @property
    def passed(self) -> bool:
        return bool(self.per_gap['passed'].all()) if len(self.per_gap) else True


def _walk_moments(values: np.ndarray, n: int) -> Tuple[float, float]:
    """Mean and standard error of a per-walk quantity that is zero off ``values``."""
    m = math.fsum(values.tolist()) / n
    if n < 2:
        return m, 0.0
    second = math.fsum((values ** 2).tolist()) / n
    var = max(second - m * m, 0.0) * n / (n - 1)
    return m, math.sqrt(var / n)


def integrability_functional(E: ArcSet, h: RegularMajorant, cfg: WosConfig = WosConfig(),
                             max_gap: Optional[float] = None,
                             walks: Optional[WalkResult] = None) -> IntegrabilityReport:
    """
    Monte Carlo estimate of the integral of h(1-|z|^2)/(1-|z|^2) against
    harmonic measure at 0 over the geodesic part of the boundary.

    The integrand is evaluated at the projected point on the geodesic. Each
    gap's share is compared with 8 pi h(|gap|) by a one-sided 3-sigma test.
    """
    domain = PrivalovDomain(E, max_gap)
    result = walks or WalkOnSpheres(domain, cfg).run(0j)
    hits = result.completed_hits
    n = result.completed
    gaps = hits['gap'].to_numpy()
    pts = hits['x'].to_numpy() + 1j * hits['y'].to_numpy()

    on_geo = gaps >= 0
    rho = np.abs(pts[on_geo])
    s = 1.0 - rho ** 2
    s = np.where(s > 0, s, cfg.eps_shell)
    f = np.atleast_1d(h.ratio(s))
    geo_gaps = gaps[on_geo]

    if f.size:
        s_radial = np.where(1.0 - rho > 0, 1.0 - rho, cfg.eps_shell)
        positive = f > 0
        ratios = np.atleast_1d(h.ratio(s_radial))[positive] / f[positive]
    else:
        ratios = np.empty(0)

    rows = []
    lengths = E.gap_lengths()
    logical = E.logical_gaps()
    for k, (a, b) in enumerate(logical):
        value, stderr = _walk_moments(f[geo_gaps == k], n)
        bound = INTEGRABILITY_CONSTANT * float(h(lengths[k]))
        rows.append({
            'gap': k, 'start': a, 'end': b, 'length': lengths[k],
            'hits': int((geo_gaps == k).sum()),
            'value': value, 'stderr': stderr, 'bound': bound,
            'passed': value <= bound + 3.0 * stderr,
        })
    per_gap = pd.DataFrame(rows, columns=['gap', 'start', 'end', 'length', 'hits',
                                          'value', 'stderr', 'bound', 'passed'])

    total, total_stderr = _walk_moments(f, n)
    h_len = np.atleast_1d(h(lengths)) if lengths.size else np.empty(0)
    with np.errstate(divide='ignore', invalid='ignore'):
        constants = per_gap['value'].to_numpy() / h_len
    constants = constants[np.isfinite(constants)] if constants.size else constants
    return IntegrabilityReport(
        per_gap=per_gap,
        total=total,
        total_stderr=total_stderr,
        empirical_constant=float(constants.max()) if constants.size else 0.0,
        ratio_min=float(ratios.min()) if ratios.size else math.nan,
        ratio_max=float(ratios.max()) if ratios.size else math.nan,
        samples=n,
        aborted=result.aborted,
    )


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Analytic polynomial with complex coefficients in ascending powers."""
    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coefficients, dtype=complex))
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ArgumentError("coefficients must be a non-empty 1-d sequence")
        coeffs = np.polynomial.polynomial.polytrim(coeffs, tol=0)
        coeffs.setflags(write=False)
        object.__setattr__(self, 'coefficients', coeffs)

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.coefficients == 0))

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.coefficients)

    def roots(self) -> np.ndarray:
        if self.degree < 1:
            return np.empty(0, dtype=complex)
        return np.polynomial.polynomial.polyroots(self.coefficients)

    @classmethod
    def from_roots(cls, roots, scale: complex = 1.0) -> 'Polynomial':
        return cls(scale * np.polynomial.polynomial.polyfromroots(np.asarray(roots, dtype=complex)))

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int, roots_outside: bool = False) -> 'Polynomial':
        """Gaussian coefficients, or roots with moduli in [1.2, 3] when ``roots_outside``."""
        if roots_outside:
            moduli = rng.uniform(1.2, 3.0, size=degree)
            angles = rng.uniform(0.0, 2.0 * math.pi, size=degree)
            return cls.from_roots(moduli * np.exp(1j * angles))
        coeffs = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
        return cls(coeffs)

    def to_dict(self) -> Dict:
        return {'real': self.coefficients.real.tolist(), 'imag': self.coefficients.imag.tolist()}


@dataclass
class SubharmonicityReport:
    log_abs_p0: float
    mean: float
    stderr: float
    samples: int
    reprojected: int = 0
    trivial: bool = False

    @property
    def passed(self) -> bool:
        return self.trivial or self.log_abs_p0 <= self.mean + 3.0 * self.stderr

    @property
    def deviation(self) -> float:
        """|log|p(0)| - mean| in units of stderr (mean-value equality diagnostics)."""
        if self.trivial or self.stderr == 0:
            return abs(self.log_abs_p0 - self.mean) if not self.trivial else 0.0
        return abs(self.log_abs_p0 - self.mean) / self.stderr


def subharmonicity_check(p: Polynomial, E: ArcSet, cfg: WosConfig = WosConfig(),
                         max_gap: Optional[float] = None,
                         walks: Optional[WalkResult] = None) -> SubharmonicityReport:
    """
    Check log|p(0)| <= mean of log|p| over the exit points of walks from 0.

    Exit points within 1e-12 of a root are moved 1e-9 along the boundary.
    """
    if p.is_zero:
        raise ArgumentError("p must not be identically zero")
    p0 = complex(p(0j))
    if p0 == 0:
        return SubharmonicityReport(-math.inf, -math.inf, 0.0, 0, trivial=True)

    logger = setup_logger('WalkOnSpheres', 'walk_on_spheres.log')
    domain = PrivalovDomain(E, max_gap)
    result = walks or WalkOnSpheres(domain, cfg).run(0j)
    hits = result.completed_hits
    gaps = hits['gap'].to_numpy()
    pts = hits['x'].to_numpy() + 1j * hits['y'].to_numpy()

    reprojected = 0
    roots = p.roots()
    if roots.size:
        near = np.min(np.abs(pts[:, None] - roots[None, :]), axis=1) < ROOT_GUARD
        reprojected = int(near.sum())
        if reprojected:
            logger.warning(f"{reprojected} exit point(s) within {ROOT_GUARD} of a root of p; shifting along the boundary")
            turn = np.exp(1j * ROOT_SHIFT)
            on_E = near & (gaps == ON_E)
            pts[on_E] = pts[on_E] * turn
            on_geo = near & (gaps >= 0)
            centers = domain.centers[gaps[on_geo]]
            pts[on_geo] = centers + (pts[on_geo] - centers) * turn

    mean, stderr = result.mean(np.log(np.abs(p(pts))))
    return SubharmonicityReport(
        log_abs_p0=math.log(abs(p0)),
        mean=mean,
        stderr=stderr,
        samples=result.completed,
        reprojected=reprojected,
    )
