"""Trade-off curve points, Pareto frontiers and concave envelopes."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .prob import Encoder


@dataclass(frozen=True)
class CurvePoint:
    """A (complexity, relevance) pair in nats with its trade-off parameter."""

    complexity: float
    relevance: float
    parameter: float = math.nan
    encoder: Encoder | None = None

    @property
    def complexity_nats(self) -> float:
        return self.complexity

    @property
    def relevance_nats(self) -> float:
        return self.relevance


def pareto_frontier(complexity, relevance, tol: float = 1e-12) -> np.ndarray:
    """Indices of the Pareto-maximal points (small complexity, large relevance).

    Returned in increasing complexity; among exact ties the first index wins.
    """
    r = np.asarray(complexity, dtype=float)
    d = np.asarray(relevance, dtype=float)
    if r.size == 0:
        return np.empty(0, dtype=int)
    # complexity ascending, relevance descending, index ascending
    order = np.lexsort((np.arange(r.size), -d, r))
    keep = []
    best = -math.inf
    for i in order:
        if d[i] > best + tol:
            keep.append(i)
            best = d[i]
    return np.asarray(keep, dtype=int)


def pareto_reduce(complexity, relevance, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    idx = pareto_frontier(complexity, relevance, tol)
    return np.asarray(complexity, dtype=float)[idx], np.asarray(relevance, dtype=float)[idx]


def upper_concave_envelope(points: Iterable[tuple[float, float]], include_origin: bool = True):
    """Vertices of the least concave majorant of the given (R, Delta) points.

    Only the non-decreasing part is kept, since relevance can always be
    discarded.
    """
    pts = sorted(set((float(r), float(d)) for r, d in points))
    if include_origin:
        pts = sorted(set(pts) | {(0.0, 0.0)})
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] if it lies on or below the chord hull[-2] -> p
            if (y2 - y1) * (p[0] - x1) <= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    # cut the decreasing tail
    top = int(np.argmax([d for _, d in hull]))
    return hull[: top + 1]


def interpolate_envelope(vertices: Sequence[tuple[float, float]], r: float) -> float:
    """Piecewise-linear value of the envelope at complexity ``r``."""
    xs = np.array([v[0] for v in vertices])
    ys = np.array([v[1] for v in vertices])
    # beyond the last vertex the curve is flat
    return float(np.interp(r, xs, ys))


def is_concave(complexity, relevance, slack: float) -> bool:
    """Midpoint check on consecutive triples of a curve sorted by complexity."""
    r = np.asarray(complexity, dtype=float)
    d = np.asarray(relevance, dtype=float)
    for i in range(1, len(r) - 1):
        r0, r1, r2 = r[i - 1], r[i], r[i + 1]
        if r2 - r0 <= 0:
            continue
        chord = d[i - 1] + (d[i + 1] - d[i - 1]) * (r1 - r0) / (r2 - r0)
        if d[i] < chord - slack:
            return False
    return True
