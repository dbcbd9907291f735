"""
Closed subsets E of the unit circle, stored through their complementary gaps.

Angles are radians on the chart [0, 2pi). A gap crossing angle 0 is stored
as the two pieces (a, 2pi) and (0, b) with ``wraps`` set; they form one
logical gap. Gaps that merely share an endpoint are kept apart, because the
shared endpoint is a point of E (this is how ``split_long_gaps`` inserts
points). Consequently the point at angle 0 itself can only be a point of E
when ``wraps`` is False.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from scripts.errors import ArgumentError
from scripts.majorants import RegularMajorant, h_inverse, khrushchev_sum
from scripts.reporting import setup_logger

TWO_PI = 2.0 * math.pi
MAX_DEPTH = 24
AUDIT_TOL = 1e-12


@dataclass(frozen=True)
class StageRecord:
    """One stage of a Cantor-type construction."""
    stage: int
    epsilon: float  # gap length removed at this stage
    removed: int  # number of gaps removed
    skipped: int = 0  # arcs too short for epsilon


@dataclass(frozen=True, eq=False)
class ArcSet:
    """
    Closed set E on the unit circle given by its open gaps.

    Attributes:
        gaps: (k, 2) array of chart intervals, sorted by start
        wraps: True when the last and first chart gaps form one logical gap
        construction_log: stage metadata of a Cantor-type build
        split_max_gap: max_gap of the last split_long_gaps pass, if any
    """
    gaps: np.ndarray
    wraps: bool = False
    construction_log: Tuple[StageRecord, ...] = ()
    split_max_gap: Optional[float] = None

    def __post_init__(self):
        gaps = np.asarray(self.gaps, dtype=float).reshape(-1, 2)
        gaps.setflags(write=False)
        object.__setattr__(self, 'gaps', gaps)
        object.__setattr__(self, 'construction_log', tuple(self.construction_log))

    @classmethod
    def full_circle(cls) -> 'ArcSet':
        return cls(np.empty((0, 2)))

    @classmethod
    def from_gaps(cls, intervals: Iterable[Sequence[float]],
                  construction_log: Sequence[StageRecord] = (),
                  split_max_gap: Optional[float] = None) -> 'ArcSet':
        """
        Canonical set from logical gaps (a, b), 0 < b - a < 2pi.

        Starts are reduced mod 2pi; a gap running past 2pi is split into two
        chart pieces joined by ``wraps``. Overlapping gaps are merged.
        """
        chart: List[List[float]] = []
        wraps = False
        for a, b in intervals:
            a, b = float(a), float(b)
            length = b - a
            if not length > 0:
                raise ArgumentError(f"gap ({a}, {b}) must have positive length")
            if length >= TWO_PI:
                raise ArgumentError(f"gap ({a}, {b}) covers the whole circle")
            start = a % TWO_PI
            end = start + length
            if end > TWO_PI:
                chart.append([start, TWO_PI])
                chart.append([0.0, end - TWO_PI])
                wraps = True
            else:
                chart.append([start, end])

        if not chart:
            return cls(np.empty((0, 2)), construction_log=construction_log, split_max_gap=split_max_gap)

        chart.sort()
        merged = [chart[0]]
        for start, end in chart[1:]:
            if start < merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], end)
            else:
                merged.append([start, end])

        gaps = np.array(merged)
        if wraps and not (gaps[0, 0] == 0.0 and gaps[-1, 1] == TWO_PI and len(gaps) > 1):
            wraps = False
        if math.fsum(gaps[:, 1] - gaps[:, 0]) >= TWO_PI:
            raise ArgumentError("gaps cover the whole circle; E must have positive measure")
        return cls(gaps, wraps=wraps, construction_log=construction_log, split_max_gap=split_max_gap)

    def canonical(self) -> 'ArcSet':
        return ArcSet.from_gaps(self.logical_gaps(), self.construction_log, self.split_max_gap)

    # -- geometry -----------------------------------------------------------

    def logical_gaps(self) -> List[Tuple[float, float]]:
        """Gaps with a wrapping pair joined as (a, 2pi + b)."""
        gaps = [tuple(g) for g in self.gaps.tolist()]
        if self.wraps:
            first = gaps.pop(0)
            last = gaps.pop()
            gaps.append((last[0], TWO_PI + first[1]))
        return gaps

    def gap_lengths(self) -> np.ndarray:
        return np.array([b - a for a, b in self.logical_gaps()], dtype=float)

    @property
    def n_gaps(self) -> int:
        return len(self.logical_gaps())

    @property
    def measure(self) -> float:
        return TWO_PI - math.fsum((self.gaps[:, 1] - self.gaps[:, 0]).tolist())

    @property
    def stages(self) -> int:
        return len(self.construction_log)

    def arcs(self) -> np.ndarray:
        """Maximal closed arcs of E on the chart [0, 2pi] as (start, end) rows."""
        if self.gaps.size == 0:
            return np.array([[0.0, TWO_PI]])
        starts = np.concatenate([[0.0], self.gaps[:, 1]])
        ends = np.concatenate([self.gaps[:, 0], [TWO_PI]])
        arcs = np.column_stack([starts, ends])
        # zero-length rows at 0 or 2pi come from gaps touching the chart ends
        keep = ~(((arcs[:, 0] == 0.0) | (arcs[:, 1] == TWO_PI)) & (arcs[:, 1] <= arcs[:, 0]))
        return arcs[keep]

    def contains_angle(self, theta) -> np.ndarray:
        """True where the angle lies in E (closed set)."""
        t = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        inside_gap = np.zeros(t.shape, dtype=bool)
        for a, b in self.gaps.tolist():
            inside_gap |= (t > a) & (t < b)
        if self.wraps:
            inside_gap |= t == 0.0
        return ~inside_gap

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> Dict:
        return {
            'gaps': self.gaps.tolist(),
            'wraps': bool(self.wraps),
            'measure': self.measure,
            'stages': self.stages,
            'split_max_gap': self.split_max_gap,
            'construction_log': [
                {'stage': r.stage, 'epsilon': r.epsilon, 'removed': r.removed, 'skipped': r.skipped}
                for r in self.construction_log
            ],
        }

    def to_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2)
        return path

    @classmethod
    def from_dict(cls, data: Dict) -> 'ArcSet':
        try:
            log = tuple(StageRecord(**r) for r in data.get('construction_log', []))
            return cls(np.asarray(data['gaps'], dtype=float).reshape(-1, 2),
                       wraps=bool(data.get('wraps', False)),
                       construction_log=log,
                       split_max_gap=data.get('split_max_gap'))
        except (KeyError, TypeError) as e:
            raise ArgumentError(f"Invalid arc set document: {str(e)}")

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> 'ArcSet':
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Arc set file not found: {path}")
        with open(path, 'r') as f:
            return cls.from_dict(json.load(f))

    def gaps_frame(self) -> pd.DataFrame:
        """One row per logical gap: index, start, end, length."""
        gaps = self.logical_gaps()
        return pd.DataFrame({
            'gap': np.arange(len(gaps), dtype=int),
            'start': [a for a, _ in gaps],
            'end': [b for _, b in gaps],
            'length': [b - a for a, b in gaps],
        })


@dataclass
class CarlesonSum:
    total: float
    stage_partials: List[float] = field(default_factory=list)


def carleson_sum(E: ArcSet, h: RegularMajorant) -> CarlesonSum:
    """Sum of h(|gap|) over the gaps; cumulative per-stage sums for Cantor builds."""
    lengths = E.gap_lengths()
    total = math.fsum(np.atleast_1d(h(lengths)).tolist()) if lengths.size else 0.0
    partials, running = [], []
    for record in E.construction_log:
        running.append(record.removed * float(h(record.epsilon)))
        partials.append(math.fsum(running))
    return CarlesonSum(total=total, stage_partials=partials)


def carleson_comparison(E: ArcSet, h: RegularMajorant) -> Dict[str, Union[float, bool]]:
    """Carleson and Khrushchev sums side by side."""
    carleson = carleson_sum(E, h).total
    if E.n_gaps == 0:
        return {'carleson_sum': carleson, 'khrushchev_sum': 0.0, 'khrushchev_divergent': False}
    k = khrushchev_sum(E, h)
    return {'carleson_sum': carleson, 'khrushchev_sum': k.total, 'khrushchev_divergent': k.divergent}


class CantorSetBuilder:
    """
    Generalized middle-gap Cantor construction for h-Beurling-Carleson sets.

    Stage k removes from every surviving arc a centered gap of length
    eps_k = min(h^-1(4^-k), (2pi - target) 4^-(k+1)), so that the Carleson sum
    stays below 2, at most 2pi - target is removed, and surviving arcs halve
    at every stage.
    """

    def __init__(self, h: RegularMajorant):
        self.h = h
        self.logger = setup_logger('CantorSetBuilder', 'cantor_sets.log')

    def stage_epsilon(self, stage: int, budget: float) -> float:
        return min(h_inverse(self.h, 4.0 ** -stage), budget * 4.0 ** -(stage + 1))

    def build(self, target_measure: float, depth: int) -> ArcSet:
        if not 0 < target_measure < TWO_PI:
            raise ArgumentError(f"target measure must lie in (0, 2pi), got {target_measure}")
        if not 0 <= depth <= MAX_DEPTH:
            raise ArgumentError(f"depth must lie in [0, {MAX_DEPTH}], got {depth}")

        budget = TWO_PI - target_measure
        pieces = np.array([[0.0, TWO_PI]])
        gaps: List[np.ndarray] = []
        log: List[StageRecord] = []

        for k in range(depth):
            eps = self.stage_epsilon(k, budget)
            lengths = pieces[:, 1] - pieces[:, 0]
            cut = (lengths > eps) & (eps > 0)
            skipped = int((~cut).sum())
            if skipped:
                self.logger.warning(
                    f"Stage {k}: epsilon {eps:.3e} does not fit {skipped} arc(s); those arcs are kept whole"
                )

            mids = 0.5 * (pieces[cut, 0] + pieces[cut, 1])
            left = np.column_stack([pieces[cut, 0], mids - eps / 2])
            right = np.column_stack([mids + eps / 2, pieces[cut, 1]])
            gaps.append(np.column_stack([mids - eps / 2, mids + eps / 2]))

            pieces = np.concatenate([pieces[~cut], left, right])
            pieces = pieces[np.argsort(pieces[:, 0], kind='stable')]
            log.append(StageRecord(stage=k, epsilon=float(eps), removed=int(cut.sum()), skipped=skipped))
            self.logger.info(f"Stage {k}: removed {int(cut.sum())} gaps of length {eps:.3e}")

        all_gaps = np.concatenate(gaps) if gaps else np.empty((0, 2))
        return ArcSet.from_gaps(all_gaps.tolist(), construction_log=log)


def build_cantor_set(h: RegularMajorant, target_measure: float, depth: int) -> ArcSet:
    return CantorSetBuilder(h).build(target_measure, depth)


def split_long_gaps(E: ArcSet, max_gap: float) -> ArcSet:
    """Split every gap longer than max_gap into ceil(|gap|/max_gap) equal gaps."""
    if not max_gap > 0:
        raise ArgumentError("max_gap must be positive")
    out: List[Tuple[float, float]] = []
    for a, b in E.logical_gaps():
        length = b - a
        if length <= max_gap:
            out.append((a, b))
            continue
        parts = math.ceil(length / max_gap - 1e-12)
        cuts = a + length * np.arange(parts + 1) / parts
        cuts[-1] = b
        out.extend(zip(cuts[:-1].tolist(), cuts[1:].tolist()))
    return ArcSet.from_gaps(out, construction_log=E.construction_log, split_max_gap=max_gap)


def max_arc_length(E: ArcSet, logical: bool = False) -> float:
    """
    Longest maximal closed arc of E.

    Measured on the chart [0, 2pi] by default, so an arc through angle 0
    counts as two arcs; ``logical=True`` joins them.
    """
    arcs = E.arcs()
    lengths = arcs[:, 1] - arcs[:, 0]
    if not logical or E.gaps.size == 0 or E.wraps:
        return float(lengths.max()) if lengths.size else 0.0
    first, last = lengths[0], lengths[-1]
    if arcs[0, 0] == 0.0 and arcs[-1, 1] == TWO_PI and len(arcs) > 1:
        lengths = np.append(lengths[1:-1], first + last)
    return float(lengths.max())


@dataclass
class SetAudit:
    measure: float
    target_measure: float
    carleson: float
    max_arc: float  # on the chart
    arc_bound: float
    max_arc_logical: float = 0.0  # arc through angle 0 joined

    @property
    def measure_ok(self) -> bool:
        return self.measure >= self.target_measure - AUDIT_TOL

    @property
    def carleson_ok(self) -> bool:
        return self.carleson <= 2.0 + AUDIT_TOL

    @property
    def arcs_ok(self) -> bool:
        return self.max_arc <= self.arc_bound + AUDIT_TOL

    @property
    def logical_arc_bound(self) -> float:
        """The joined arc through 0 is two chart arcs, each within arc_bound."""
        return 2.0 * self.arc_bound

    @property
    def logical_arcs_ok(self) -> bool:
        return self.max_arc_logical <= self.logical_arc_bound + AUDIT_TOL

    @property
    def passed(self) -> bool:
        return self.measure_ok and self.carleson_ok and self.arcs_ok and self.logical_arcs_ok

    def to_dict(self) -> Dict:
        return {
            'measure': self.measure, 'target_measure': self.target_measure,
            'carleson_sum': self.carleson, 'max_arc_length': self.max_arc,
            'arc_bound': self.arc_bound, 'measure_ok': self.measure_ok,
            'max_arc_length_logical': self.max_arc_logical,
            'logical_arc_bound': self.logical_arc_bound,
            'carleson_ok': self.carleson_ok, 'arcs_ok': self.arcs_ok,
            'logical_arcs_ok': self.logical_arcs_ok, 'passed': self.passed,
        }


def audit_cantor_set(E: ArcSet, h: RegularMajorant, target_measure: float) -> SetAudit:
    """Post-construction audit: measure, Carleson sum and arc-length bound."""
    return SetAudit(
        measure=E.measure,
        target_measure=target_measure,
        carleson=carleson_sum(E, h).total,
        max_arc=max_arc_length(E),
        arc_bound=TWO_PI * 2.0 ** -E.stages,
        max_arc_logical=max_arc_length(E, logical=True),
    )
