"""Brute-force ground truth for tiny instances.

Encoder rows are drawn from the integer compositions of ``1/step`` into
``u_card`` parts (stars and bars), so every candidate row is normalized
exactly.  The heavy loops live in the kernel backend.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._backend import kernels
from .curve import CurvePoint, pareto_frontier, upper_concave_envelope
from .dib import DistributedJoint, conditional_complexity, EncoderBank
from .errors import CardinalityMismatch, EnumerationTooLarge, OutOfRange
from .prob import Encoder, JointPMF, ib_terms

CHUNK = 1 << 21


@dataclass(frozen=True)
class GridSpec:
    step: float
    u_card: int
    max_tables: int = 10_000_000

    def __post_init__(self):
        if not 0 < self.step <= 1:
            raise OutOfRange(f"step must lie in (0, 1], got {self.step}")
        n = round(1 / self.step)
        if abs(n * self.step - 1) > 1e-12:
            raise OutOfRange(f"step {self.step} does not divide 1")
        if self.u_card < 1:
            raise OutOfRange("u_card must be >= 1")

    @property
    def parts(self) -> int:
        return round(1 / self.step)

    def rows(self) -> np.ndarray:
        """All quantized distributions on ``u_card`` symbols.

        Rows with non-increasing entries come first (see :meth:`n_sorted`),
        each group lexicographic in bar positions.
        """
        n, m = self.parts, self.u_card
        out = []
        for bars in itertools.combinations(range(n + m - 1), m - 1):
            edges = (-1,) + bars + (n + m - 1,)
            out.append([edges[i + 1] - edges[i] - 1 for i in range(m)])
        out.sort(key=lambda r: not _nonincreasing(r))
        return np.asarray(out, dtype=float) / n

    def n_rows(self) -> int:
        return math.comb(self.parts + self.u_card - 1, self.u_card - 1)

    def n_sorted(self) -> int:
        """Number of rows with non-increasing entries (partitions of 1/step into <= u_card parts)."""
        return _partitions(self.parts, self.u_card)

    def count(self, x_card: int, symmetric: bool = True) -> int:
        """Encoders enumerated; ``symmetric`` keeps one labelling of U per encoder."""
        first = self.n_sorted() if symmetric else self.n_rows()
        return first * self.n_rows() ** (x_card - 1)

    def dominance_slack(self, x_card: int) -> float:
        """Conservative gap between the grid frontier and the true curve, nats."""
        if self.step >= 1:
            return math.inf
        return self.step * x_card * self.u_card * math.log(1 / self.step)


def _nonincreasing(r) -> bool:
    return all(a >= b for a, b in zip(r, r[1:]))


def _partitions(n: int, parts: int) -> int:
    # p(n, <= parts) by the usual recurrence on the largest allowed part count
    table = [[0] * (parts + 1) for _ in range(n + 1)]
    for k in range(parts + 1):
        table[0][k] = 1
    for i in range(1, n + 1):
        for k in range(1, parts + 1):
            table[i][k] = table[i][k - 1] + (table[i - k][k] if i >= k else 0)
    return table[n][parts]


def _decode(index: int, nc: int, nx: int) -> list[int]:
    digits = []
    for _ in range(nx):
        digits.append(index % nc)
        index //= nc
    return digits[::-1]


def grid_ib_frontier(j: JointPMF, g: GridSpec, workers: int = 1, symmetric: bool = True) -> list[CurvePoint]:
    """Pareto frontier (small complexity, large relevance) over every quantized encoder.

    Relabelling U changes neither information value, so with ``symmetric``
    the first row is restricted to non-increasing entries; every encoder is
    still represented up to a permutation of U.  Points come back sorted by
    complexity, each with its encoder.
    """
    total = g.count(j.x_card, symmetric)
    if total > g.max_tables:
        raise EnumerationTooLarge(f"{total} encoders exceed the cap of {g.max_tables}")
    cand = np.ascontiguousarray(g.rows())
    nc = cand.shape[0]
    n_first = g.n_sorted() if symmetric else nc
    tail = nc ** (j.x_card - 1)
    step = max(1, CHUNK // tail)
    px = np.ascontiguousarray(j.p_x)
    pxy = np.ascontiguousarray(j.p)

    def block(lo):
        hi = min(lo + step, n_first)
        cpx, rel = kernels.ib_grid_block(px, pxy, cand, lo, hi)
        keep = pareto_frontier(cpx, rel)
        return keep + lo * tail, cpx[keep], rel[keep]

    starts = range(0, n_first, step)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, starts))
    else:
        parts = [block(lo) for lo in starts]
    idx = np.concatenate([p[0] for p in parts])
    cpx = np.concatenate([p[1] for p in parts])
    rel = np.concatenate([p[2] for p in parts])
    keep = pareto_frontier(cpx, rel)
    out = []
    for k in keep:
        enc = Encoder(cand[_decode(int(idx[k]), nc, j.x_card)])
        out.append(CurvePoint(float(cpx[k]), float(rel[k]), math.nan, enc))
    return out


def frontier_value(points, rate: float) -> float:
    """Best relevance among frontier points with complexity at most ``rate``."""
    best = 0.0
    for p in points:
        if p.complexity <= rate:
            best = max(best, p.relevance)
    return best


def exhaustive_deterministic(j: JointPMF, u_card: int, limit: int = 1_000_000) -> list[CurvePoint]:
    """Distinct (complexity, relevance) values over all deterministic maps X -> U."""
    if u_card < 1:
        raise OutOfRange("u_card must be >= 1")
    if u_card ** j.x_card > limit:
        raise EnumerationTooLarge(f"{u_card}^{j.x_card} maps exceed the cap of {limit}")
    seen = {}
    eye = np.eye(u_card)
    for labels in itertools.product(range(u_card), repeat=j.x_card):
        e = Encoder(eye[list(labels)])
        cpx, rel = ib_terms(j, e)
        key = (round(float(cpx), 12), round(float(rel), 12))
        if key not in seen:
            seen[key] = CurvePoint(float(cpx), float(rel), math.nan, e)
    return sorted(seen.values(), key=lambda p: (p.complexity, p.relevance))


# --------------------------------------------------------------------------
# Two-view DIB oracle
# --------------------------------------------------------------------------


class DIBFrontier(NamedTuple):
    conditional: np.ndarray  # sum_k I(X_k;U_k|Y), ascending
    relevance: np.ndarray  # I(Y;U_1,U_2)

    def value(self, sum_rate: float, time_sharing: bool = True) -> float:
        """Largest min(I(Y;U), R_sum - sum_k I(X_k;U_k|Y)) over the frontier.

        With ``time_sharing`` the frontier is first replaced by its upper
        concave envelope, since mixing operating points averages both terms.
        """
        if not time_sharing:
            v = np.minimum(self.relevance, sum_rate - self.conditional)
            return float(max(v.max(initial=0.0), 0.0))
        verts = upper_concave_envelope(zip(self.conditional, self.relevance))
        best = 0.0
        for (c0, i0), (c1, i1) in zip(verts, verts[1:] + verts[-1:]):
            best = max(best, min(i0, sum_rate - c0))
            if c1 > c0:
                slope = (i1 - i0) / (c1 - c0)
                c = (sum_rate - i0 + slope * c0) / (1 + slope)
                if c0 <= c <= c1:
                    best = max(best, sum_rate - c)
        return float(best)


def _view_candidates(dj: DistributedJoint, k: int, g: GridSpec):
    rows = g.rows()
    nx = dj.x_cards[k]
    encs = np.array(list(itertools.product(range(g.n_sorted()), *[range(rows.shape[0])] * (nx - 1))))
    tables = rows[encs]  # n x nx x u
    chans = np.einsum("yx,nxu->nyu", dj.conditionals[k], tables)
    cond = np.array([
        conditional_complexity(_single(dj, k), EncoderBank((Encoder(t),)), 0) for t in tables
    ])
    return np.ascontiguousarray(chans), cond


def _single(dj: DistributedJoint, k: int) -> DistributedJoint:
    return DistributedJoint(dj.p_y, (dj.conditionals[k],))


def grid_dib_frontier(dj: DistributedJoint, g: GridSpec) -> DIBFrontier:
    """Pareto set of (sum conditional complexity, relevance) over quantized encoder pairs."""
    if dj.K != 2:
        raise CardinalityMismatch("the grid DIB oracle handles exactly two views")
    total = g.count(dj.x_cards[0]) * g.count(dj.x_cards[1])  # one labelling of each U_k
    if total > g.max_tables:
        raise EnumerationTooLarge(f"{total} encoder pairs exceed the cap of {g.max_tables}")
    c1, cond1 = _view_candidates(dj, 0, g)
    c2, cond2 = _view_candidates(dj, 1, g)
    py = np.ascontiguousarray(dj.p_y)
    rows = max(1, CHUNK // c2.shape[0])
    cs, rs = [], []
    for lo in range(0, c1.shape[0], rows):
        hi = min(lo + rows, c1.shape[0])
        rel = kernels.dib_pair_block(py, c1, c2, lo, hi).ravel()
        cost = (cond1[lo:hi, None] + cond2[None, :]).ravel()
        keep = pareto_frontier(cost, rel)
        cs.append(cost[keep])
        rs.append(rel[keep])
    cost, rel = np.concatenate(cs), np.concatenate(rs)
    keep = pareto_frontier(cost, rel)
    return DIBFrontier(cost[keep], rel[keep])
