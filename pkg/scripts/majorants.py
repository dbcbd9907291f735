"""
Regular majorants h, positive sequences (c_n) and the Legendre-type infima
built from them.

A majorant is stored as a piecewise-linear interpolant on explicit
breakpoints in (0, 1]. To the right of the last breakpoint it is constant.
To the left of the first breakpoint it is either the segment through the
origin (``origin_anchored``, which is what concave hulls produce) or the
line through the first two breakpoints clamped at zero.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from scripts.errors import ArgumentError, ContractViolation, DomainError

if TYPE_CHECKING:
    from scripts.circle_sets import ArcSet

logger = logging.getLogger(__name__)

REGULARITY_TOL = 1e-12
RAMP_WIDTH = 1e-9  # relative width of the ramps standing in for jumps
LEGENDRE_FLOOR = 1e-15  # smallest abscissa searched by legendre_inf
DOMINANCE_RTOL = 1e-12

# Dyadic-shell divergence test for khrushchev_sum
SHELL_RATIO = 0.99
SHELL_RUN = 20


@dataclass(frozen=True, eq=False)
class RegularMajorant:
    """
    Piecewise-linear majorant h with h(0) = 0.

    Parameters
    ----------
    breakpoints : array_like
        Strictly increasing abscissae in (0, 1]
    values : array_like
        Nonnegative values of h at the breakpoints
    origin_anchored : bool
        Interpolate linearly from (0, 0) left of the first breakpoint
    name : str
        Label used in reports
    """
    breakpoints: np.ndarray
    values: np.ndarray
    origin_anchored: bool = False
    name: str = 'custom'

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.breakpoints, dtype=float))
        y = np.atleast_1d(np.asarray(self.values, dtype=float))
        if x.ndim != 1 or x.shape != y.shape or x.size == 0:
            raise ArgumentError("breakpoints and values must be non-empty 1-d arrays of equal length")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            raise ArgumentError("breakpoints and values must be finite")
        if x[0] <= 0.0 or x[-1] > 1.0:
            raise ArgumentError(f"breakpoints must lie in (0, 1], got [{x[0]}, {x[-1]}]")
        if np.any(np.diff(x) <= 0):
            raise ArgumentError("breakpoints must be strictly increasing")
        if np.any(y < 0):
            raise ArgumentError("majorant values must be nonnegative")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, 'breakpoints', x)
        object.__setattr__(self, 'values', y)

    # -- evaluation ---------------------------------------------------------

    @property
    def _head_line(self) -> Tuple[float, float]:
        """Intercept and slope of the extrapolation left of the first breakpoint."""
        x, y = self.breakpoints, self.values
        if self.origin_anchored:
            return 0.0, y[0] / x[0]
        if x.size == 1:
            return y[0], 0.0
        slope = (y[1] - y[0]) / (x[1] - x[0])
        return y[0] - slope * x[0], slope

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        out = np.interp(xs, self.breakpoints, self.values)
        head = xs < self.breakpoints[0]
        if np.any(head):
            a, b = self._head_line
            out = np.where(head, np.maximum(a + b * xs, 0.0), out)
        out = np.where(xs <= 0.0, 0.0, out)
        return out if out.ndim else float(out)

    def ratio(self, x):
        """h(x)/x for x > 0."""
        xs = np.asarray(x, dtype=float)
        return self(xs) / xs

    def ratio_limit(self) -> float:
        """lim_{x->0+} h(x)/x of the stored representation (inf when h(0+) > 0)."""
        a, b = self._head_line
        if a > 0:
            return math.inf
        if a < 0:
            return 0.0
        return max(b, 0.0)

    def pieces(self) -> pd.DataFrame:
        """Linear pieces h = a + b x on [lo, hi], left to right, ending at x = 1."""
        x, y = self.breakpoints, self.values
        lo, hi, a, b = [], [], [], []

        head_a, head_b = self._head_line
        if head_a < 0 and head_b > 0:
            zero_end = min(-head_a / head_b, x[0])
            lo.append(LEGENDRE_FLOOR)
            hi.append(max(zero_end, LEGENDRE_FLOOR))
            a.append(0.0)
            b.append(0.0)
            lo.append(max(zero_end, LEGENDRE_FLOOR))
        else:
            lo.append(LEGENDRE_FLOOR)
        hi.append(x[0])
        a.append(head_a)
        b.append(head_b)

        if x.size > 1:
            slopes = np.diff(y) / np.diff(x)
            lo.extend(x[:-1].tolist())
            hi.extend(x[1:].tolist())
            a.extend((y[:-1] - slopes * x[:-1]).tolist())
            b.extend(slopes.tolist())

        if x[-1] < 1.0:
            lo.append(x[-1])
            hi.append(1.0)
            a.append(y[-1])
            b.append(0.0)

        frame = pd.DataFrame({'lo': lo, 'hi': hi, 'a': a, 'b': b})
        return frame[frame['hi'] > frame['lo']].reset_index(drop=True)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> Dict:
        return {
            'name': self.name,
            'breakpoints': self.breakpoints.tolist(),
            'values': self.values.tolist(),
            'origin_anchored': bool(self.origin_anchored),
        }

    def to_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2)
        return path

    @classmethod
    def from_dict(cls, data: Dict) -> 'RegularMajorant':
        try:
            return cls(
                breakpoints=data['breakpoints'],
                values=data['values'],
                origin_anchored=bool(data.get('origin_anchored', False)),
                name=data.get('name', 'custom'),
            )
        except KeyError as e:
            raise ArgumentError(f"Majorant document missing key: {str(e)}")


@dataclass
class RegularityReport:
    increasing: bool
    ratio_decreasing: bool
    max_violation: float

    @property
    def regular(self) -> bool:
        return self.increasing and self.ratio_decreasing


# ---------------------------------------------------------------------------
# Named majorant library
# ---------------------------------------------------------------------------

_COARSE_GRID = np.exp2(np.linspace(-200.0, 0.0, 4001))
_FINE_GRID = np.unique(np.concatenate([
    np.exp2(np.linspace(-200.0, math.log2(1e-12), 4000)),
    np.geomspace(1e-12, 1.0, 200001),
]))


def _x_log(x: np.ndarray) -> np.ndarray:
    return x * np.log(1.0 / x)


def _inverse_log(x: np.ndarray) -> np.ndarray:
    cut = math.exp(-1.0)
    return np.where(x < cut, 1.0 / np.log(1.0 / np.minimum(x, cut)), 1.0)


def named_majorant(name: str) -> RegularMajorant:
    """
    Build one of the library majorants.

    ``identity``, ``sqrt``, ``x_log`` (x log(1/x)), ``inverse_log``
    (1/log(1/x) up to 1/e, then 1), ``square`` (x**2 sampled on [0.1, 1]) and
    ``constant:<value>``.
    """
    if name == 'identity':
        return RegularMajorant([0.5, 1.0], [0.5, 1.0], name=name)
    if name == 'sqrt':
        return RegularMajorant(_FINE_GRID, np.sqrt(_FINE_GRID), name=name)
    if name == 'x_log':
        return RegularMajorant(_FINE_GRID, _x_log(_FINE_GRID), name=name)
    if name == 'inverse_log':
        grid = np.unique(np.append(_COARSE_GRID, math.exp(-1.0)))
        return RegularMajorant(grid, _inverse_log(grid), name=name)
    if name == 'square':
        grid = np.linspace(0.1, 1.0, 91)
        return RegularMajorant(grid, grid ** 2, name=name)
    if name.startswith('constant:'):
        try:
            level = float(name.split(':', 1)[1])
        except ValueError:
            raise ArgumentError(f"Invalid constant majorant: {name}")
        if level < 0:
            raise ArgumentError("constant majorant must be nonnegative")
        return RegularMajorant(_COARSE_GRID, np.full_like(_COARSE_GRID, level), name=name)
    raise ArgumentError(f"Unknown majorant: {name}")


def load_majorant(spec: str) -> RegularMajorant:
    """Resolve ``--h`` style input: a library name or a JSON file path."""
    path = Path(spec)
    if path.suffix == '.json':
        if not path.exists():
            raise FileNotFoundError(f"Majorant file not found: {path}")
        with open(path, 'r') as f:
            return RegularMajorant.from_dict(json.load(f))
    return named_majorant(spec)


# ---------------------------------------------------------------------------
# Pointwise operations
# ---------------------------------------------------------------------------

def eval_lambda_h(h: RegularMajorant, r):
    """lambda_h at radius r: exp(h(1-r)/(1-r))."""
    rs = np.asarray(r, dtype=float)
    if np.any(rs >= 1.0) or np.any(rs < 0.0):
        raise DomainError(f"radius must lie in [0, 1), got {r}")
    s = 1.0 - rs
    out = np.exp(h(s) / s)
    return out if np.ndim(out) else float(out)


def lambda_ratio_comparison(h: RegularMajorant, z) -> Dict[str, float]:
    """
    Compare h(1-|z|)/(1-|z|) with h(1-|z|^2)/(1-|z|^2).

    For h satisfying the regularity conditions the ratio of the first to the
    second lies in [1, 2].
    """
    rho = np.abs(np.asarray(z, dtype=complex))
    if np.any(rho >= 1.0):
        raise DomainError("points must lie in the open unit disk")
    s1 = 1.0 - rho
    s2 = 1.0 - rho ** 2
    ratio = h.ratio(s1) / h.ratio(s2)
    return {
        'min_ratio': float(np.min(ratio)),
        'max_ratio': float(np.max(ratio)),
        'within_bounds': bool(np.all(ratio >= 1.0 - 1e-12) and np.all(ratio <= 2.0 + 1e-12)),
    }


def check_regularity(h: RegularMajorant, grid_size: int = 1000) -> RegularityReport:
    """
    Check that h is nondecreasing and h(x)/x nonincreasing.

    Both conditions are evaluated on a uniform grid over the breakpoint hull
    joined with the breakpoints themselves. Defects below 1e-12 (relative to
    the local magnitude) count as zero.
    """
    if grid_size < 2:
        raise ArgumentError("grid_size must be at least 2")
    bp = h.breakpoints
    grid = np.union1d(np.linspace(bp[0], bp[-1], grid_size), bp)
    values = h(grid)
    ratios = values / grid

    value_defect = np.maximum(values[:-1] - values[1:], 0.0)
    value_scale = np.maximum(np.abs(values[:-1]), 1.0)
    ratio_defect = np.maximum(ratios[1:] - ratios[:-1], 0.0)
    ratio_scale = np.maximum(np.abs(ratios[:-1]), 1.0)

    value_defect = np.where(value_defect <= REGULARITY_TOL * value_scale, 0.0, value_defect)
    ratio_defect = np.where(ratio_defect <= REGULARITY_TOL * ratio_scale, 0.0, ratio_defect)

    max_value_defect = float(value_defect.max()) if value_defect.size else 0.0
    max_ratio_defect = float(ratio_defect.max()) if ratio_defect.size else 0.0
    return RegularityReport(
        increasing=max_value_defect == 0.0,
        ratio_decreasing=max_ratio_defect == 0.0,
        max_violation=max(max_value_defect, max_ratio_defect),
    )


def least_concave_majorant(samples: Iterable[Tuple[float, float]], name: str = 'concave_majorant') -> RegularMajorant:
    """
    Least concave majorant of sample points, with (0, 0) prepended.

    The upper hull is taken with a monotone chain and cut at its highest
    vertex; the result is constant from there on, so it is nondecreasing and
    dominates every input point.
    """
    pts = np.asarray(list(samples), dtype=float)
    if pts.size == 0:
        raise ArgumentError("least_concave_majorant needs at least one sample")
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ArgumentError("samples must be (x, y) pairs")
    xs, ys = pts[:, 0], pts[:, 1]
    if np.any(np.diff(xs) <= 0):
        raise ArgumentError("sample abscissae must be strictly increasing")
    if np.any(ys < 0):
        raise ArgumentError("sample values must be nonnegative")
    if np.any(xs < 0) or np.any((xs == 0) & (ys != 0)):
        raise ArgumentError("samples must satisfy x > 0, or be the origin itself")
    keep = xs > 0
    xs, ys = xs[keep], ys[keep]
    if xs.size == 0:
        raise ArgumentError("least_concave_majorant needs a sample with x > 0")

    hull: List[Tuple[float, float]] = [(0.0, 0.0)]
    for px, py in zip(xs.tolist(), ys.tolist()):
        while len(hull) >= 2:
            ox, oy = hull[-2]
            ax, ay = hull[-1]
            cross = (ax - ox) * (py - oy) - (ay - oy) * (px - ox)
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append((px, py))

    hx = np.array([p[0] for p in hull])
    hy = np.array([p[1] for p in hull])
    top = int(np.argmax(hy))
    if top == 0:
        # all samples are zero
        return RegularMajorant([xs[0]], [0.0], origin_anchored=True, name=name)
    return RegularMajorant(hx[1:top + 1], hy[1:top + 1], origin_anchored=True, name=name)


def h_inverse(h: RegularMajorant, level: float) -> float:
    """
    Smallest x with h(x) >= level (first crossing).

    Returns ``inf`` when h never reaches the level and 0 when h(0+) >= level.
    The root is nudged left so that h(result) <= level.
    """
    bp, vals = h.breakpoints, h.values
    reached = np.nonzero(vals >= level)[0]
    if reached.size == 0:
        return math.inf

    first = int(reached[0])
    if first == 0:
        lo, hi = 0.0, bp[0]
        if h(np.nextafter(0.0, 1.0)) >= level:
            return 0.0
    else:
        lo, hi = bp[first - 1], bp[first]

    if h(hi) == level:
        return float(hi)
    root = brentq(lambda x: h(x) - level, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    while root > 0 and h(root) > level:
        root = np.nextafter(root, 0.0)
    return float(root)


# ---------------------------------------------------------------------------
# Sequences
# ---------------------------------------------------------------------------

SEQUENCE_RULES: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    'one_over_n': lambda n: 1.0 / n,
    'one_over_log': lambda n: 1.0 / np.log(n + 2.0),
}


@dataclass(frozen=True, eq=False)
class PositiveSequence:
    """
    Positive terms c_1, ..., c_N, lazily extendable when generated by a rule.

    ``scale`` multiplies every rule-generated term.
    """
    terms: np.ndarray
    rule: str = 'explicit'
    scale: float = 1.0
    null_sequence: bool = False

    def __post_init__(self):
        terms = np.atleast_1d(np.asarray(self.terms, dtype=float))
        if terms.ndim != 1 or terms.size == 0:
            raise ArgumentError("sequence needs at least one term")
        if not np.all(np.isfinite(terms)) or np.any(terms <= 0):
            raise ArgumentError("sequence terms must be finite and positive")
        if self.rule != 'explicit' and self.rule not in SEQUENCE_RULES:
            raise ArgumentError(f"Unknown sequence rule: {self.rule}")
        terms.setflags(write=False)
        object.__setattr__(self, 'terms', terms)

    @classmethod
    def from_rule(cls, rule: str, count: int, scale: float = 1.0) -> 'PositiveSequence':
        if rule not in SEQUENCE_RULES:
            raise ArgumentError(f"Unknown sequence rule: {rule}")
        n = np.arange(1, count + 1, dtype=float)
        return cls(scale * SEQUENCE_RULES[rule](n), rule=rule, scale=scale, null_sequence=True)

    @property
    def extendable(self) -> bool:
        return self.rule in SEQUENCE_RULES

    def __len__(self) -> int:
        return int(self.terms.size)

    def extended(self, count: int) -> 'PositiveSequence':
        """Sequence with at least ``count`` terms where the rule allows it."""
        if count <= len(self):
            return self
        if not self.extendable:
            logger.warning(
                f"Explicit sequence has {len(self)} terms, {count} requested; "
                "tail maxima use the finite tail"
            )
            return self
        return PositiveSequence.from_rule(self.rule, count, self.scale)

    def scaled(self, factor: float) -> 'PositiveSequence':
        if factor <= 0:
            raise ArgumentError("scale factor must be positive")
        return PositiveSequence(self.terms * factor, rule=self.rule,
                                scale=self.scale * factor, null_sequence=self.null_sequence)

    def verify_null(self, horizon: int, eps: float) -> Dict[str, Union[bool, float]]:
        """Envelope max_{m>=n} c_m is nonincreasing and below ``eps`` at the horizon."""
        seq = self.extended(horizon)
        envelope = np.maximum.accumulate(seq.terms[::-1])[::-1]
        tail = float(envelope[min(horizon, len(seq)) - 1])
        return {
            'envelope_nonincreasing': bool(np.all(np.diff(envelope) <= 0)),
            'tail_value': tail,
            'below_eps': tail < eps,
        }

    def to_dict(self) -> Dict:
        return {'rule': self.rule, 'scale': self.scale, 'terms': self.terms.tolist()}

    @classmethod
    def from_dict(cls, data: Dict) -> 'PositiveSequence':
        rule = data.get('rule', 'explicit')
        scale = float(data.get('scale', 1.0))
        terms = data.get('terms')
        if rule != 'explicit' and not terms:
            return cls.from_rule(rule, int(data.get('count', 1)), scale)
        if not terms:
            raise ArgumentError("explicit sequence document needs 'terms'")
        return cls(terms, rule=rule, scale=scale, null_sequence=bool(data.get('null_sequence', False)))


def load_sequence(spec: str, count: int) -> PositiveSequence:
    """Resolve ``--c`` style input: a rule name or a JSON file path."""
    path = Path(spec)
    if path.suffix == '.json':
        if not path.exists():
            raise FileNotFoundError(f"Sequence file not found: {path}")
        with open(path, 'r') as f:
            return PositiveSequence.from_dict(json.load(f))
    return PositiveSequence.from_rule(spec, count)


def regularize_sequence(c: PositiveSequence, horizon: int, lookahead: Optional[int] = None) -> PositiveSequence:
    """
    Replace (c_n) by a sequence c~ with

    (i) c~_n >= c_n, (ii) c~_{n+1} <= c~_n, (iii) c~_n <= sqrt((n+1)/n) c~_{n+1}

    using c~_{n+1} = max(max_{m>=n+1} c_m, sqrt(n/(n+1)) c~_n). The recursion
    starts from c~_1 = max_m c_m, which equals c_1 whenever c_1 is the largest
    term. Each term is nudged up by ulps until (iii) holds in floating point.

    Parameters
    ----------
    c : PositiveSequence
        Input sequence; rule-based sequences are extended lazily
    horizon : int
        Number of output terms
    lookahead : int, optional
        Extra terms used for the tail maxima (default: ``horizon``)

    Returns
    -------
    PositiveSequence
        The regularized terms c~_1, ..., c~_horizon
    """
    if horizon < 1:
        raise ArgumentError("horizon must be positive")
    lookahead = horizon if lookahead is None else lookahead
    seq = c.extended(horizon + lookahead)
    terms = seq.terms
    if np.any(terms <= 0):
        raise ArgumentError("sequence terms must be positive")
    if len(seq) < horizon:
        raise ArgumentError(f"explicit sequence has {len(seq)} terms, horizon {horizon} requested")

    tail_max = np.maximum.accumulate(terms[::-1])[::-1]
    out = np.empty(horizon, dtype=float)
    out[0] = tail_max[0]
    for n in range(1, horizon):
        prev = out[n - 1]
        value = max(tail_max[n], math.sqrt(n / (n + 1)) * prev)
        while math.sqrt((n + 1) / n) * value < prev:
            value = np.nextafter(value, math.inf)
        out[n] = value
    return PositiveSequence(out, rule='explicit', null_sequence=c.null_sequence)


def check_regularization_properties(c: PositiveSequence, c_reg: PositiveSequence) -> Dict[str, bool]:
    """Exact index-by-index check of properties (i)-(iii)."""
    ct = c_reg.terms
    base = c.extended(len(ct)).terms[:len(ct)]
    n = np.arange(1, len(ct), dtype=float)
    return {
        'dominates': bool(np.all(ct[:base.size] >= base)),
        'nonincreasing': bool(np.all(ct[1:] <= ct[:-1])),
        'slow_decay': bool(np.all(ct[:-1] <= np.sqrt((n + 1) / n) * ct[1:])),
    }


def cap_sequence(c: PositiveSequence, horizon: int, ceiling: float = 0.999) -> Tuple[PositiveSequence, PositiveSequence, float]:
    """
    Regularize c, rescaling it first when the regularized head reaches 1.

    Returns the (possibly rescaled) input, its regularization and the factor.
    """
    if not 0 < ceiling < 1:
        raise ArgumentError("ceiling must lie in (0, 1)")
    c_reg = regularize_sequence(c, horizon)
    if c_reg.terms[0] < 1.0:
        return c, c_reg, 1.0
    factor = ceiling / c_reg.terms[0]
    logger.warning(f"Regularized sequence starts at {c_reg.terms[0]:.6g} >= 1; rescaling by {factor:.6g}")
    c_scaled = c.scaled(factor)
    return c_scaled, regularize_sequence(c_scaled, horizon), factor


def h_from_sequence(c_reg: PositiveSequence, horizon: int, concavify: bool = False) -> RegularMajorant:
    """
    Step majorant h(x) = c_n^2 on (c_{n+1}/sqrt(n+1), c_n/sqrt(n)], h = c_1^2 beyond c_1.

    Jumps are realized as ramps of relative width 1e-9 to the right of each
    node, so the value at a node x_n = c_n/sqrt(n) is exactly c_n^2. Below
    x_{horizon+1} the function is the segment through the origin. With
    ``concavify`` the least concave majorant is returned instead.
    """
    ct = c_reg.terms
    if ct.size < horizon + 1:
        raise ArgumentError(f"need {horizon + 1} regularized terms, got {ct.size}")
    ct = ct[:horizon + 1]
    if ct[0] >= 1.0:
        raise ArgumentError(f"c~_1 must be < 1, got {ct[0]}")
    if np.any(ct[1:] > ct[:-1]):
        raise ContractViolation("sequence must be nonincreasing (regularize it first)")

    n = np.arange(1, horizon + 2, dtype=float)
    nodes = ct / np.sqrt(n)
    squares = ct ** 2

    # ascending order: x_{N+1}, ramp, x_N, ramp, ..., x_1
    xs = np.empty(2 * horizon + 1)
    ys = np.empty(2 * horizon + 1)
    xs[0::2] = nodes[::-1]
    ys[0::2] = squares[::-1]
    xs[1::2] = nodes[:0:-1] * (1.0 + RAMP_WIDTH)
    ys[1::2] = squares[-2::-1]

    h = RegularMajorant(xs, ys, origin_anchored=True, name='from_sequence')
    if not concavify:
        return h
    return least_concave_majorant(zip(xs.tolist(), ys.tolist()), name='from_sequence_concave')


# ---------------------------------------------------------------------------
# Legendre-type infima
# ---------------------------------------------------------------------------

@dataclass
class LegendreResult:
    inf_value: float
    argmin: float
    boundary_infimum: bool = False


def legendre_inf(n: int, h: RegularMajorant) -> LegendreResult:
    """
    inf over x in (0, 1) of f(x) = n x + h(x)/x.

    On a piece h = a + b x the function is n x + b + a/x; for a > 0 its
    minimum is at sqrt(a/n) clipped to the piece, otherwise at the left end.
    Ties between pieces go to the smallest argmin. When the minimum sits at
    the search floor ``boundary_infimum`` is set.
    """
    if n < 1:
        raise ArgumentError("n must be a positive integer")
    pieces = h.pieces()
    lo = pieces['lo'].to_numpy()
    hi = pieces['hi'].to_numpy()
    a = pieces['a'].to_numpy()
    b = pieces['b'].to_numpy()

    critical = np.sqrt(np.maximum(a, 0.0) / n)
    x = np.where(a > 0, np.clip(critical, lo, hi), lo)
    f = n * x + b + a / x

    best = float(f.min())
    candidates = np.nonzero(f == best)[0]
    idx = int(candidates[np.argmin(x[candidates])])
    argmin = float(x[idx])
    return LegendreResult(inf_value=best, argmin=argmin,
                          boundary_infimum=bool(argmin <= LEGENDRE_FLOOR))


def legendre_grid_search(n: int, h: RegularMajorant, points: int = 10 ** 6,
                         lower: float = 1e-12) -> LegendreResult:
    """Grid oracle: minimum of n x + h(x)/x over a log-spaced grid."""
    grid = np.geomspace(lower, 1.0, points, endpoint=False)
    f = n * grid + h.ratio(grid)
    idx = int(np.argmin(f))
    return LegendreResult(inf_value=float(f[idx]), argmin=float(grid[idx]),
                          boundary_infimum=idx == 0)


def log_spaced_indices(horizon: int) -> List[int]:
    """{1, 2, 4, ...} up to horizon, with horizon itself appended."""
    ns = [1]
    while ns[-1] * 2 <= horizon:
        ns.append(ns[-1] * 2)
    if ns[-1] != horizon:
        ns.append(horizon)
    return ns


def first_passing_index(ns: Sequence[int], ok: Sequence[bool]) -> Optional[int]:
    """Smallest n from which every later row passes; None if the last row fails."""
    n0 = None
    for n, flag in zip(reversed(list(ns)), reversed(list(ok))):
        if not flag:
            break
        n0 = n
    return n0


@dataclass
class LegendreTable:
    rows: pd.DataFrame
    n0: Optional[int]

    @property
    def asserted(self) -> pd.DataFrame:
        if self.n0 is None:
            return self.rows.iloc[0:0]
        return self.rows[self.rows['n'] >= self.n0]


def legendre_dominance_table(c_reg: PositiveSequence, h: RegularMajorant,
                             ns: Optional[Sequence[int]] = None) -> LegendreTable:
    """Rows (n, inf, c~_n sqrt(n), ok) and the first index N0 of the passing window."""
    ct = c_reg.terms
    ns = log_spaced_indices(ct.size) if ns is None else list(ns)
    rows = []
    for n in ns:
        result = legendre_inf(n, h)
        bound = ct[n - 1] * math.sqrt(n)
        rows.append({
            'n': n,
            'inf_value': result.inf_value,
            'argmin': result.argmin,
            'bound': bound,
            'passed': result.inf_value >= bound * (1.0 - DOMINANCE_RTOL),
        })
    frame = pd.DataFrame(rows)
    return LegendreTable(rows=frame, n0=first_passing_index(frame['n'], frame['passed']))


# ---------------------------------------------------------------------------
# Khrushchev sum
# ---------------------------------------------------------------------------

@dataclass
class KhrushchevResult:
    total: float
    divergent: bool
    delta: Optional[float] = None
    per_gap: List[float] = field(default_factory=list)
    tail_truncated: bool = False


def _antiderivative(h: RegularMajorant, t: np.ndarray) -> np.ndarray:
    """F(t) = integral of h(s)/s from the first breakpoint to t, for t >= x_0."""
    x, y = h.breakpoints, h.values
    t = np.asarray(t, dtype=float)
    if x.size > 1:
        slopes = np.diff(y) / np.diff(x)
        a = y[:-1] - slopes * x[:-1]
        piece = a * np.log(x[1:] / x[:-1]) + slopes * (x[1:] - x[:-1])
        cumulative = np.concatenate([[0.0], np.cumsum(piece)])
    else:
        slopes = a = np.empty(0)
        cumulative = np.zeros(1)

    idx = np.clip(np.searchsorted(x, t, side='right') - 1, 0, x.size - 1)
    inner = idx < x.size - 1
    out = cumulative[idx].copy()
    if np.any(inner):
        i = idx[inner]
        out[inner] += a[i] * np.log(t[inner] / x[i]) + slopes[i] * (t[inner] - x[i])
    beyond = ~inner
    if np.any(beyond):
        out[beyond] += y[-1] * np.log(t[beyond] / x[-1])
    return out


def _head_integral(h: RegularMajorant, upper: float) -> Tuple[float, bool]:
    """Integral of h(t)/t over (0, upper] with upper <= x_0; flag when approximated."""
    a, b = h._head_line
    if h.origin_anchored:
        return b * upper, False
    if a > 0:
        # h(0+) > 0 comes from extrapolation; below the sampled range the
        # integrand is replaced by the anchored segment
        x0, v0 = h.breakpoints[0], h.values[0]
        return v0 / x0 * upper, True
    if a == 0:
        return b * upper, False
    if b <= 0:
        return 0.0, False
    zero = -a / b
    if upper <= zero:
        return 0.0, False
    return a * math.log(upper / zero) + b * (upper - zero), False


def h_over_t_integral(h: RegularMajorant, upper: float) -> Tuple[float, bool]:
    """Integral of h(t)/t over (0, upper]."""
    if upper <= 0:
        return 0.0, False
    x0 = h.breakpoints[0]
    head, approx = _head_integral(h, min(upper, x0))
    if upper <= x0:
        return head, approx
    return head + float(_antiderivative(h, np.array([upper]))[0]), approx


def shell_divergence(h: RegularMajorant, upper: float) -> Tuple[bool, Optional[float]]:
    """
    Dyadic-shell divergence test on (2^-(k+1), 2^-k] inside the sampled range.

    Returns (divergent, delta), delta being the fitted constant in
    h(t)/t >= delta/t over the detected run of shells.
    """
    x0 = h.breakpoints[0]
    k_start = max(0, math.ceil(-math.log2(upper)))
    k_stop = math.floor(-math.log2(x0)) - 1
    if k_stop - k_start < SHELL_RUN:
        return False, None
    ks = np.arange(k_start, k_stop + 1, dtype=float)
    edges = np.exp2(-np.concatenate([ks, [ks[-1] + 1]]))
    F = _antiderivative(h, edges)
    shells = F[:-1] - F[1:]
    ratios = shells[1:] / np.where(shells[:-1] > 0, shells[:-1], np.nan)

    run = 0
    for i, ratio in enumerate(ratios):
        if np.isfinite(ratio) and ratio >= SHELL_RATIO:
            run += 1
            if run >= SHELL_RUN:
                window = shells[i + 1 - SHELL_RUN:i + 2]
                return True, float(window.min() / math.log(2.0))
        else:
            run = 0
    return False, None


def khrushchev_sum(E: 'ArcSet', h: RegularMajorant) -> KhrushchevResult:
    """
    Sum over gaps of the integral of h(t)/t from 0 to |gap|.

    Each integral uses the exact antiderivative of the piecewise-linear h.
    A gap whose integrand passes the dyadic-shell divergence test makes the
    whole sum infinite.
    """
    lengths = E.gap_lengths()
    if lengths.size == 0:
        raise ContractViolation("khrushchev_sum needs a set with at least one gap")

    per_gap, truncated = [], False
    for length in lengths.tolist():
        divergent, delta = shell_divergence(h, length)
        if divergent:
            return KhrushchevResult(total=math.inf, divergent=True, delta=delta,
                                    per_gap=[math.inf] * lengths.size)
        value, approx = h_over_t_integral(h, length)
        truncated = truncated or approx
        per_gap.append(value)
    return KhrushchevResult(total=math.fsum(per_gap), divergent=False,
                            per_gap=per_gap, tail_truncated=truncated)
