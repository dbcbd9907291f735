"""
Weighted Bergman machinery for the weight G(x) = exp(-h(1-x)/(1-x)):
radial moments, the moment bound table, polynomial norms and the local
mean-value estimate for |p|^2.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import IntegrationWarning, dblquad, quad
from tqdm import tqdm

from scripts.errors import ArgumentError, DomainError, QuadratureError
from scripts.harmonic_measure import Polynomial
from scripts.majorants import (
    PositiveSequence,
    RegularMajorant,
    cap_sequence,
    first_passing_index,
    h_from_sequence,
    legendre_inf,
    log_spaced_indices,
    named_majorant,
    DOMINANCE_RTOL,
)

logger = logging.getLogger(__name__)

DYADIC_PIECES = 60  # pieces [2^-(k+1), 2^-k] of s = 1 - x
QUAD_LIMIT = 200
ERR_SHARE = 0.01  # largest quadrature error as a share of the reference bound
MEANVALUE_TOL = 1e-8
MAX_REFINEMENTS = 10


@dataclass(frozen=True, eq=False)
class WeightG:
    """G(x) = exp(-h(1-x)/(1-x)) on [0, 1), with G(1) = exp(-lim h(s)/s)."""
    h: RegularMajorant

    def __post_init__(self):
        if math.isfinite(self.h.ratio_limit()):
            logger.warning(
                f"h(s)/s stays bounded near 0 for majorant '{self.h.name}' "
                f"(limit {self.h.ratio_limit():.6g}); G(1) is positive"
            )

    @property
    def at_one(self) -> float:
        limit = self.h.ratio_limit()
        return 0.0 if math.isinf(limit) else math.exp(-limit)

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        if np.any(xs < 0) or np.any(xs > 1):
            raise DomainError("G is defined on [0, 1]")
        s = 1.0 - xs
        safe = np.where(s > 0, s, 1.0)
        out = np.where(s > 0, np.exp(-np.asarray(self.h.ratio(safe))), self.at_one)
        return out if out.ndim else float(out)

    def log_integrand(self, n: int, s: float) -> float:
        """log of x^n G(x) written in s = 1 - x."""
        return n * math.log1p(-s) - float(self.h.ratio(s))


def moment(h: RegularMajorant, n: int, tol: float = 1e-6,
           weight: Optional[WeightG] = None) -> Tuple[float, float]:
    """
    Radial moment int_0^1 x^n G(x) dx and a bound on its absolute error.

    The integral is taken in s = 1 - x over dyadic pieces accumulating at
    s = 0, where G decays faster than any power when h(s)/s is unbounded.
    The part below 2^-60 is bounded by its length times the largest value
    of G there.

    Parameters
    ----------
    h : RegularMajorant
        Majorant defining the weight
    n : int
        Power of x, n >= 0
    tol : float
        Relative tolerance of the result

    Returns
    -------
    Tuple[float, float]
        Moment value and absolute error bound
    """
    if n < 0 or int(n) != n:
        raise ArgumentError(f"n must be a nonnegative integer, got {n}")
    if not tol > 0:
        raise ArgumentError("tol must be positive")
    weight = weight or WeightG(h)

    def integrand(s: float) -> float:
        if s >= 1.0:
            return 0.0 if n > 0 else float(weight(0.0))
        return math.exp(weight.log_integrand(n, s))

    values: List[float] = []
    errors: List[float] = []
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', IntegrationWarning)
        for k in range(DYADIC_PIECES):
            lo, hi = 2.0 ** -(k + 1), 2.0 ** -k
            value, err = quad(integrand, lo, hi, epsabs=0.0, epsrel=tol / 4, limit=QUAD_LIMIT)
            values.append(value)
            errors.append(err)

    edge = 2.0 ** -DYADIC_PIECES
    tail = edge * math.exp(-float(h.ratio(edge)))
    total = math.fsum(values)
    error = math.fsum(errors) + tail
    if not total > 0:
        raise QuadratureError(f"moment n={n} vanished numerically", achieved=math.inf)
    if error > tol * total:
        raise QuadratureError(
            f"moment n={n}: relative error {error / total:.3g} above tolerance {tol:.3g}",
            achieved=error / total,
        )
    return total, error


@dataclass
class MomentTable:
    """Rows n, moment, err, bound, passed plus the Legendre cross-check columns."""
    rows: pd.DataFrame
    n0: Optional[int]
    status: str  # 'pass' | 'inconclusive' | 'fail'
    scale_factor: float = 1.0
    augmented: bool = False

    @property
    def asserted(self) -> pd.DataFrame:
        if self.n0 is None:
            return self.rows.iloc[0:0]
        return self.rows[self.rows['n'] >= self.n0]

    @property
    def passed(self) -> bool:
        return self.status == 'pass'

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.rows.to_csv(path, index=False)
        return path


def moment_bound_check(c: PositiveSequence, horizon: int, tol: float = 1e-6,
                       ns: Optional[Sequence[int]] = None, augment: bool = True) -> MomentTable:
    """
    Compare moment(n) with exp(-c~_n sqrt(n)) along a log-spaced n grid.

    c is regularized (rescaled below 1 when needed), turned into a concave
    majorant, and every row also records the Legendre infimum so that the
    implication "inf >= c~_n sqrt(n)  =>  moment <= bound" is checked row by
    row. N0 is the first n from which the bound holds with quadrature error
    below 1% of the bound. With ``augment`` the majorant is first raised to
    h + x log(1/x) where it falls below x log(1/x).
    """
    if horizon < 1:
        raise ArgumentError("horizon must be positive")
    _, c_reg, factor = cap_sequence(c, horizon + 1)
    h = h_from_sequence(c_reg, horizon, concavify=True)
    augmented = False
    if augment:
        h, augmented = augment_majorant(h)
    weight = WeightG(h)
    ct = c_reg.terms
    ns = log_spaced_indices(horizon) if ns is None else list(ns)

    rows = []
    for n in tqdm(ns, desc="Moments", disable=len(ns) < 8):
        value, err = moment(h, n, tol, weight=weight)
        bound = math.exp(-ct[n - 1] * math.sqrt(n))
        legendre = legendre_inf(n, h)
        legendre_bound = ct[n - 1] * math.sqrt(n)
        legendre_ok = legendre.inf_value >= legendre_bound * (1.0 - DOMINANCE_RTOL)
        passed = value <= bound
        rows.append({
            'n': n,
            'moment': value,
            'err': err,
            'bound': bound,
            'passed': passed,
            'c_reg': ct[n - 1],
            'legendre_inf': legendre.inf_value,
            'legendre_bound': legendre_bound,
            'legendre_ok': legendre_ok,
            'implication_ok': passed or not legendre_ok,
            'err_ok': err < ERR_SHARE * bound,
        })
    frame = pd.DataFrame(rows)

    ok = frame['passed'] & frame['err_ok']
    n0 = first_passing_index(frame['n'], ok)
    if not frame['implication_ok'].all():
        status = 'fail'
    elif n0 is None:
        status = 'inconclusive'
    else:
        status = 'pass'
    logger.info(f"Moment table: {len(frame)} rows, N0={n0}, status={status}")
    return MomentTable(rows=frame, n0=n0, status=status, scale_factor=factor,
                       augmented=augmented)


def augment_majorant(h: RegularMajorant) -> Tuple[RegularMajorant, bool]:
    """
    Replace h by h + x log(1/x) when h falls below x log(1/x) at some
    breakpoint; returns the (possibly unchanged) majorant and whether the
    replacement was made.
    """
    x_log = named_majorant('x_log')
    below = h.values < x_log(h.breakpoints)
    if not np.any(below):
        return h, False
    grid = np.union1d(h.breakpoints, x_log.breakpoints)
    augmented = RegularMajorant(grid, np.asarray(h(grid)) + np.asarray(x_log(grid)),
                                origin_anchored=h.origin_anchored, name=f"{h.name}+x_log")
    logger.info(f"Majorant '{h.name}' lies below x log(1/x) at {int(below.sum())} breakpoint(s); augmented")
    return augmented, True


def bergman_norm(p: Polynomial, h: RegularMajorant, tol: float = 1e-6) -> float:
    """||p||_G from monomial orthogonality: 2 pi sum |a_k|^2 moment(2k+1)."""
    if p.is_zero:
        return 0.0
    weight = WeightG(h)
    terms = [
        abs(a) ** 2 * moment(h, 2 * k + 1, tol, weight=weight)[0]
        for k, a in enumerate(p.coefficients) if a != 0
    ]
    return math.sqrt(2.0 * math.pi * math.fsum(terms))


def bergman_norm_direct(p: Polynomial, h: RegularMajorant) -> float:
    """||p||_G by two-dimensional polar quadrature, used to cross-check bergman_norm."""
    if p.is_zero:
        return 0.0
    weight = WeightG(h)

    def integrand(theta: float, r: float) -> float:
        return abs(p(r * np.exp(1j * theta))) ** 2 * weight(r) * r

    with warnings.catch_warnings():
        warnings.simplefilter('ignore', IntegrationWarning)
        value, _ = dblquad(integrand, 0.0, 1.0, 0.0, 2.0 * math.pi, epsabs=1e-12, epsrel=1e-9)
    return math.sqrt(value)


@dataclass
class MeanValueReport:
    z: complex
    lhs: float
    rhs: float
    ratio: float
    radial_nodes: int

    @property
    def passed(self) -> bool:
        return self.ratio <= 1.0 + MEANVALUE_TOL

    def to_row(self) -> Dict:
        return {'x': self.z.real, 'y': self.z.imag, 'lhs': self.lhs, 'rhs': self.rhs,
                'ratio': self.ratio, 'nodes': self.radial_nodes, 'passed': self.passed}


def _disk_average(p: Polynomial, z: complex, radius: float, nodes: int) -> float:
    """Average of |p|^2 over the disk |w - z| < radius: Gauss-Legendre in r, uniform in angle."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    r = 0.5 * radius * (x + 1.0)
    wr = 0.5 * radius * w * r
    angles = 2.0 * math.pi * np.arange(2 * nodes) / (2 * nodes)
    values = np.abs(p(z + r[:, None] * np.exp(1j * angles)[None, :])) ** 2
    integral = (2.0 * math.pi / angles.size) * math.fsum((wr[:, None] * values).ravel().tolist())
    return integral / (math.pi * radius ** 2)


def pointwise_meanvalue_check(p: Polynomial, z: complex, quad_samples: int = 16) -> MeanValueReport:
    """
    |p(z)|^2 against 4/(pi (1-|z|)^2) times the integral of |p|^2 over the
    disk of radius (1-|z|)/2 around z. The right side is the disk average and
    is refined by doubling the node count until it is stable to 1e-8.
    """
    z = complex(z)
    if not abs(z) < 1.0:
        raise DomainError(f"|z| must be below 1, got {abs(z)}")
    if quad_samples < 1:
        raise ArgumentError("quad_samples must be positive")
    radius = 0.5 * (1.0 - abs(z))
    lhs = abs(complex(p(z))) ** 2

    nodes = quad_samples
    rhs = _disk_average(p, z, radius, nodes)
    change = math.inf
    for _ in range(MAX_REFINEMENTS):
        nodes *= 2
        finer = _disk_average(p, z, radius, nodes)
        change = abs(finer - rhs)
        rhs = finer
        if change <= MEANVALUE_TOL * max(abs(finer), 1e-300):
            break
    else:
        raise QuadratureError(f"disk average at {z} not stable after {nodes} nodes", achieved=change)

    if rhs > 0:
        ratio = lhs / rhs
    else:
        ratio = 0.0 if lhs == 0 else math.inf
    return MeanValueReport(z=z, lhs=lhs, rhs=rhs, ratio=ratio, radial_nodes=nodes)
