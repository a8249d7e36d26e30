"""Coding quantities read off the IB curve, plus the oblivious-relay (CRAN)
rate bounds.

WAK and common-reconstruction rates are post-processors of the IB curve:
:func:`ib_curve_value` brackets the curve at a given complexity between the
concave envelope of solved points (achievable) and the supporting lines of
those points (converse), refining the trade-off parameter by bisection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import entr

from .curve import CurvePoint, interpolate_envelope, upper_concave_envelope
from .errors import (
    CardinalityMismatch,
    DistortionOutOfRange,
    EnumerationTooLarge,
    ForeignCurvePoint,
    MarkovViolation,
    OutOfRange,
)
from .ib_discrete import IBSolveConfig, IBSolution, log_gamma_grid, solve_ib
from .prob import Encoder, JointPMF, entropy, induced_distributions, mutual_information, mutual_information_table

SLACK = 1e-9


# --------------------------------------------------------------------------
# Remote source coding under logarithmic loss
# --------------------------------------------------------------------------


def remote_rd_point(j: JointPMF, cp: CurvePoint) -> tuple[float, float]:
    """(rate, expected log-loss distortion) = (complexity, H(Y) - relevance)."""
    if cp.relevance > float(mutual_information(j)) + SLACK or cp.complexity > float(j.h_x()) + SLACK:
        raise ForeignCurvePoint(
            f"point ({cp.complexity:.6g}, {cp.relevance:.6g}) is not achievable for this joint"
        )
    if cp.relevance < -SLACK or cp.complexity < -SLACK:
        raise ForeignCurvePoint("curve points have non-negative coordinates")
    return float(cp.complexity), float(j.h_y()) - float(cp.relevance)


def remote_rd_inverse(j: JointPMF, rate: float, distortion: float) -> CurvePoint:
    return CurvePoint(float(rate), float(j.h_y()) - float(distortion))


# --------------------------------------------------------------------------
# Curve value at a given complexity
# --------------------------------------------------------------------------


class CurveValue(NamedTuple):
    relevance: float  # achievable (envelope) value
    upper: float  # converse from supporting lines
    solutions: tuple

    @property
    def error(self) -> float:
        return max(self.upper - self.relevance, 0.0)


def _brackets(j: JointPMF, sols: Sequence[IBSolution], rate: float) -> tuple[float, float]:
    mi = float(mutual_information(j))
    pts = [(s.complexity_nats, s.relevance_nats) for s in sols] + [(float(j.h_x()), mi)]
    lower = interpolate_envelope(upper_concave_envelope(pts), rate)
    upper = mi
    for s in sols:
        if s.converged and s.gamma > 0:
            upper = min(upper, s.relevance_nats + (rate - s.complexity_nats) / s.gamma)
    return lower, max(upper, lower)


def ib_curve_value(j: JointPMF, rate: float, cfg: IBSolveConfig | None = None, *, tol: float = 1e-9,
                   gammas: Sequence[float] | None = None, max_refine: int = 80) -> CurveValue:
    """Maximum relevance at complexity ``rate`` (nats), bracketed to within ``tol``.

    Each solved point is optimal for its trade-off parameter, so the line
    through it with slope 1/gamma bounds the curve from above; the concave
    envelope of the points bounds it from below.  The parameter is bisected
    (geometrically) between the points that straddle ``rate`` until the
    bracket closes.
    """
    if not rate >= 0:
        raise OutOfRange(f"rate must be >= 0, got {rate}")
    mi = float(mutual_information(j))
    if rate >= float(j.h_x()):
        return CurveValue(mi, mi, ())
    cfg = cfg or IBSolveConfig(gamma=1.0)
    grid = list(gammas) if gammas is not None else list(log_gamma_grid(1.0, 1e4, 25))
    sols = [solve_ib(j, replace(cfg, gamma=float(g))) for g in grid]
    for _ in range(max_refine):
        lower, upper = _brackets(j, sols, rate)
        if upper - lower <= tol:
            break
        below = [s for s in sols if s.complexity_nats <= rate]
        above = [s for s in sols if s.complexity_nats > rate]
        g_lo = max((s.gamma for s in below), default=0.0)
        g_hi = min((s.gamma for s in above), default=math.inf)
        if math.isinf(g_hi):
            g_new = max(2.0 * g_lo, 2.0)
        elif g_lo <= 0:
            g_new = 0.5 * g_hi
        else:
            g_new = math.sqrt(g_lo * g_hi)
            if g_hi / g_lo < 1 + 1e-13:
                break
        sols.append(solve_ib(j, replace(cfg, gamma=g_new)))
    lower, upper = _brackets(j, sols, rate)
    return CurveValue(lower, upper, tuple(sorted(sols, key=lambda s: s.gamma)))


class RateValue(NamedTuple):
    rate: float
    error: float  # width of the bracket on the underlying curve value


def wak_rate(j: JointPMF, rate: float, cfg: IBSolveConfig | None = None, **kwargs) -> RateValue:
    """Smallest H(Y|U) over helpers of complexity at most ``rate``: H(Y) - Delta(rate)."""
    if not rate >= 0:
        raise OutOfRange(f"rate must be >= 0, got {rate}")
    if rate == 0:
        return RateValue(float(j.h_y()), 0.0)
    cv = ib_curve_value(j, rate, cfg, **kwargs)
    return RateValue(float(j.h_y()) - cv.relevance, cv.error)


def cr_rate(j: JointPMF, distortion: float, cfg: IBSolveConfig | None = None, **kwargs) -> RateValue:
    """Common-reconstruction rate (H(X) - D) - Delta(H(X) - D).

    Minimizing I(U;X|Y) at I(U;X) = H(X) - D is the same as maximizing
    I(U;Y) there, because I(U;X|Y) = I(U;X) - I(U;Y) when U - X - Y.
    """
    hx, hxy = float(j.h_x()), float(j.h_x_given_y())
    if not (hxy - SLACK <= distortion <= hx + SLACK):
        raise DistortionOutOfRange(f"distortion {distortion} outside [{hxy:.9g}, {hx:.9g}]")
    rc = max(hx - distortion, 0.0)
    if rc == 0:
        return RateValue(0.0, 0.0)
    cv = ib_curve_value(j, rc, cfg, **kwargs)
    return RateValue(max(rc - cv.relevance, 0.0), cv.error)


def combining_identity_check(j: JointPMF, e: Encoder) -> float:
    """|I(X;U,Y) - [I(U;X) + I(Y;X) - I(U;Y)]| on the induced joint."""
    t = induced_distributions(j, e).joint_uxy  # u, x, y
    x_uy = np.moveaxis(t, 1, 0).reshape(j.x_card, -1)
    lhs = float(mutual_information_table(x_uy))
    ux = float(mutual_information_table(t.sum(axis=2)))
    uy = float(mutual_information_table(t.sum(axis=1)))
    rhs = ux + float(mutual_information(j)) - uy
    return abs(lhs - rhs)


# --------------------------------------------------------------------------
# Uplink relays with oblivious processing
# --------------------------------------------------------------------------

MAX_USERS = 3
MAX_RELAYS = 3
MAX_TABLE = 10_000_000


@dataclass(frozen=True)
class CranModel:
    """L independent users feeding K relays.

    ``channels[k]`` has shape (|X_1|, ..., |X_L|, |Y_k|) and holds
    p(y_k | x_1..x_L); ``mappings[k]`` is the relay quantizer p(u_k|y_k).
    """

    inputs: tuple
    channels: tuple
    mappings: tuple
    capacities: tuple

    def __post_init__(self):
        inputs = tuple(np.asarray(p, dtype=float) for p in self.inputs)
        chans = tuple(np.asarray(c, dtype=float) for c in self.channels)
        maps = tuple(m if isinstance(m, Encoder) else Encoder(m) for m in self.mappings)
        caps = tuple(float(c) for c in self.capacities)
        L, K = len(inputs), len(chans)
        if not 1 <= L <= MAX_USERS or not 1 <= K <= MAX_RELAYS:
            raise EnumerationTooLarge(f"need 1..{MAX_USERS} users and 1..{MAX_RELAYS} relays, got {L}, {K}")
        if len(maps) != K or len(caps) != K:
            raise CardinalityMismatch("need one mapping and one capacity per relay")
        for l, p in enumerate(inputs):
            if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
                raise OutOfRange(f"input pmf of user {l} is not a distribution")
        xs = tuple(p.size for p in inputs)
        for k, c in enumerate(chans):
            if c.shape[:-1] != xs:
                raise CardinalityMismatch(f"channel {k} has shape {c.shape}, expected {xs} + (|Y_{k}|,)")
            if np.any(c < 0) or np.abs(c.sum(axis=-1) - 1).max() > 1e-9:
                raise OutOfRange(f"channel {k} is not stochastic")
            if maps[k].x_card != c.shape[-1]:
                raise CardinalityMismatch(f"mapping {k} expects {maps[k].x_card} relay symbols, channel gives {c.shape[-1]}")
            if caps[k] < 0:
                raise OutOfRange(f"capacity {k} must be >= 0")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "channels", chans)
        object.__setattr__(self, "mappings", maps)
        object.__setattr__(self, "capacities", caps)

    @classmethod
    def from_joint_channel(cls, inputs, joint_channel, y_cards, mappings, capacities, tol: float = 1e-9):
        """Split p(y_1..y_K | x) into per-relay channels, checking that it factorizes."""
        inputs = [np.asarray(p, dtype=float) for p in inputs]
        w = np.asarray(joint_channel, dtype=float)
        L = len(inputs)
        shape = tuple(p.size for p in inputs) + tuple(y_cards)
        if w.shape != shape:
            raise CardinalityMismatch(f"joint channel has shape {w.shape}, expected {shape}")
        K = len(y_cards)
        margs = []
        for k in range(K):
            drop = tuple(L + i for i in range(K) if i != k)
            margs.append(w.sum(axis=drop) if drop else w)
        prod = np.ones(shape[:L])
        for k, m in enumerate(margs):
            prod = prod[..., None] * m.reshape(shape[:L] + (1,) * k + (y_cards[k],))
        if np.abs(prod - w).max() > tol:
            raise MarkovViolation("relay outputs are not conditionally independent given the inputs")
        return cls(tuple(inputs), tuple(margs), tuple(mappings), tuple(capacities))

    @property
    def L(self) -> int:
        return len(self.inputs)

    @property
    def K(self) -> int:
        return len(self.channels)

    def p_x(self) -> np.ndarray:
        t = np.ones(())
        for p in self.inputs:
            t = t[..., None] * p
        return t

    def u_given_x(self, k: int) -> np.ndarray:
        return self.channels[k] @ self.mappings[k].rows

    def joint_xu(self) -> np.ndarray:
        """Table over (x_1..x_L, u_1..u_K)."""
        size = math.prod(p.size for p in self.inputs) * math.prod(m.u_card for m in self.mappings)
        if size > MAX_TABLE:
            raise EnumerationTooLarge(f"joint table would hold {size} entries")
        px = self.p_x()
        t = px
        for k in range(self.K):
            c = self.u_given_x(k)
            t = t[..., None] * c.reshape(px.shape + (1,) * k + (c.shape[-1],))
        return t

    def relay_penalty(self, k: int) -> float:
        """I(Y_k; U_k | X_1..X_L) = H(U_k|X) - H(U_k|Y_k)."""
        px = self.p_x()
        h_ux = float(np.sum(px * entr(self.u_given_x(k)).sum(axis=-1)))
        py = np.tensordot(px, self.channels[k], axes=self.L)
        h_uy = float(py @ entr(self.mappings[k].rows).sum(axis=1))
        return max(h_ux - h_uy, 0.0)


def _cond_entropy(t: np.ndarray, target_axes, given_axes) -> float:
    """H(target | given) from a joint table, summing out every other axis."""
    keep = sorted(set(target_axes) | set(given_axes))
    drop = tuple(a for a in range(t.ndim) if a not in keep)
    m = t.sum(axis=drop) if drop else t
    pos = {a: i for i, a in enumerate(keep)}
    g = tuple(pos[a] for a in given_axes)
    other = tuple(i for i in range(m.ndim) if i not in g)
    mg = m.sum(axis=other) if other else m
    return entropy(m) - entropy(mg)


class CranBound(NamedTuple):
    users: tuple
    relays: tuple
    bound: float


def cran_region_point(m: CranModel) -> list[CranBound]:
    """Every bound sum_{t in T} R_t <= sum_{s in S}[C_s - I(Y_s;U_s|X)] + I(X_T; U_{S^c} | X_{T^c})."""
    t = m.joint_xu()
    pen = [m.relay_penalty(k) for k in range(m.K)]
    out = []
    for tmask in range(1, 1 << m.L):
        users = tuple(l for l in range(m.L) if tmask >> l & 1)
        rest = tuple(l for l in range(m.L) if not tmask >> l & 1)
        for smask in range(1 << m.K):
            relays = tuple(k for k in range(m.K) if smask >> k & 1)
            comp = tuple(m.L + k for k in range(m.K) if not smask >> k & 1)
            info = 0.0
            if comp:
                info = _cond_entropy(t, comp, rest) - _cond_entropy(t, comp, tuple(range(m.L)))
            val = sum(m.capacities[k] - pen[k] for k in relays) + max(info, 0.0)
            out.append(CranBound(users, relays, float(val)))
    return out
