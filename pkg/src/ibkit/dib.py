"""Distributed information bottleneck: K encoders, each seeing its own view
X_k of a common target Y, with X_k conditionally independent given Y.

Time sharing is not modelled (a single operating point per call); curves
are convexified afterwards with :func:`ibkit.curve.upper_concave_envelope`.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import entr

from .errors import (
    CardinalityMismatch,
    EnumerationTooLarge,
    InfiniteBound,
    NotPositiveDefinite,
    OutOfRange,
    SandwichViolation,
    ShapeMismatch,
)
from .ib_discrete import TIE_TOL, random_encoder, restart_rng
from .prob import ROW_SUM_TOL, Encoder, entropy, kl_divergence, mutual_information_table

log = logging.getLogger(__name__)

MAX_K = 10
MAX_TABLE = 10_000_000


# --------------------------------------------------------------------------
# Discrete model
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DistributedJoint:
    """P_Y and one conditional P(X_k|Y) (``y_card x x_k``) per view."""

    p_y: np.ndarray
    conditionals: tuple

    def __post_init__(self):
        py = np.array(self.p_y, dtype=float)
        if py.ndim != 1 or py.size == 0 or np.any(py < 0) or abs(py.sum() - 1.0) > ROW_SUM_TOL:
            raise OutOfRange("p_y must be a non-empty probability vector")
        conds = []
        for k, c in enumerate(self.conditionals):
            c = np.array(c, dtype=float)
            if c.ndim != 2 or c.shape[0] != py.size:
                raise CardinalityMismatch(f"conditional {k} has shape {c.shape}, expected ({py.size}, n)")
            if np.any(c < 0) or np.any(np.abs(c.sum(axis=1) - 1.0) > ROW_SUM_TOL):
                bad = int(np.argmax(np.abs(c.sum(axis=1) - 1.0)))
                raise OutOfRange(f"conditional {k}, row {bad} is not a distribution")
            c = c / c.sum(axis=1, keepdims=True)
            c.setflags(write=False)
            conds.append(c)
        if not conds:
            raise CardinalityMismatch("need at least one view")
        if len(conds) > MAX_K:
            raise EnumerationTooLarge(f"K={len(conds)} exceeds the limit of {MAX_K} views")
        py.setflags(write=False)
        object.__setattr__(self, "p_y", py)
        object.__setattr__(self, "conditionals", tuple(conds))

    @property
    def K(self) -> int:
        return len(self.conditionals)

    @property
    def y_card(self) -> int:
        return self.p_y.size

    @property
    def x_cards(self) -> tuple:
        return tuple(c.shape[1] for c in self.conditionals)

    def p_x(self, k: int) -> np.ndarray:
        return self.p_y @ self.conditionals[k]

    def h_y(self) -> float:
        return entropy(self.p_y)

    def full_joint(self) -> np.ndarray:
        """Table of (Y, X_1..X_K)."""
        return _product_joint(self.p_y, self.conditionals)

    def mutual_information(self) -> float:
        """I(Y; X_1..X_K) in nats."""
        t = self.full_joint()
        return float(mutual_information_table(t.reshape(self.y_card, -1)))


@dataclass(frozen=True)
class EncoderBank:
    encoders: tuple

    def __post_init__(self):
        object.__setattr__(self, "encoders", tuple(e if isinstance(e, Encoder) else Encoder(e)
                                                   for e in self.encoders))

    def __len__(self):
        return len(self.encoders)

    def __getitem__(self, k) -> Encoder:
        return self.encoders[k]

    @property
    def u_cards(self) -> tuple:
        return tuple(e.u_card for e in self.encoders)


def _product_joint(p_y, channels) -> np.ndarray:
    ny = p_y.size
    size = ny * math.prod(c.shape[1] for c in channels)
    if size > MAX_TABLE:
        raise EnumerationTooLarge(f"joint table would hold {size} entries (cap {MAX_TABLE})")
    t = np.asarray(p_y, dtype=float)
    for c in channels:
        t = t[..., None] * c.reshape((ny,) + (1,) * (t.ndim - 1) + (c.shape[1],))
    return t


def _check_bank(dj: DistributedJoint, eb: EncoderBank) -> None:
    if len(eb) != dj.K:
        raise CardinalityMismatch(f"{len(eb)} encoders for {dj.K} views")
    for k, (e, n) in enumerate(zip(eb.encoders, dj.x_cards)):
        if e.x_card != n:
            raise CardinalityMismatch(f"encoder {k} has {e.x_card} rows, view {k} has {n} symbols")


def u_given_y(dj: DistributedJoint, eb: EncoderBank) -> list[np.ndarray]:
    """P(U_k|Y) for each k (``y_card x u_k``)."""
    _check_bank(dj, eb)
    return [c @ e.rows for c, e in zip(dj.conditionals, eb.encoders)]


def joint_yu(dj: DistributedJoint, eb: EncoderBank) -> np.ndarray:
    """Table of (Y, U_1..U_K) under the Markov factorization."""
    return _product_joint(dj.p_y, u_given_y(dj, eb))


def _mi_y_subset(t: np.ndarray, subset) -> float:
    keep = set(subset)
    drop = tuple(k + 1 for k in range(t.ndim - 1) if k not in keep)
    m = t.sum(axis=drop) if drop else t
    return float(mutual_information_table(m.reshape(t.shape[0], -1)))


def _h_rows(rows) -> np.ndarray:
    return entr(rows).sum(axis=-1)


def conditional_complexity(dj: DistributedJoint, eb: EncoderBank, k: int) -> float:
    """I(X_k; U_k | Y) = H(U_k|Y) - H(U_k|X_k)."""
    c = dj.conditionals[k] @ eb[k].rows
    v = dj.p_y @ _h_rows(c) - dj.p_x(k) @ _h_rows(eb[k].rows)
    return max(float(v), 0.0)


def view_complexity(dj: DistributedJoint, eb: EncoderBank, k: int) -> float:
    """I(X_k; U_k)."""
    px = dj.p_x(k)
    return float(mutual_information_table(eb[k].rows * px[:, None]))


# --------------------------------------------------------------------------
# Region, Lagrangian and parametrization
# --------------------------------------------------------------------------


class RegionReport(NamedTuple):
    subsets: tuple  # each a tuple of encoder indices in S
    bounds: np.ndarray
    slacks: np.ndarray
    feasible: bool


def dib_region_check(dj: DistributedJoint, eb: EncoderBank, delta: float, rates, tol: float = 1e-12) -> RegionReport:
    """Evaluate Delta <= sum_{k in S}[R_k - I(X_k;U_k|Y)] + I(Y; U_{S^c}) for every S."""
    _check_bank(dj, eb)
    rates = np.asarray(rates, dtype=float)
    if rates.shape != (dj.K,):
        raise CardinalityMismatch(f"need {dj.K} rates, got {rates.size}")
    if delta < 0 or np.any(rates < 0):
        raise OutOfRange("delta and rates must be >= 0")
    t = joint_yu(dj, eb)
    cond = np.array([conditional_complexity(dj, eb, k) for k in range(dj.K)])
    subsets, bounds = [], []
    for mask in range(1 << dj.K):
        s = tuple(k for k in range(dj.K) if mask >> k & 1)
        comp = tuple(k for k in range(dj.K) if not mask >> k & 1)
        bounds.append(float(np.sum(rates[list(s)] - cond[list(s)])) + _mi_y_subset(t, comp))
        subsets.append(s)
    bounds = np.array(bounds)
    slacks = bounds - delta
    return RegionReport(tuple(subsets), bounds, slacks, bool(slacks.min() >= -tol))


def dib_lagrangian(dj: DistributedJoint, eb: EncoderBank, s: float) -> float:
    """-H(Y|U_1..U_K) - s sum_k [H(Y|U_k) + I(X_k;U_k)]."""
    if not s >= 0:
        raise OutOfRange(f"s must be >= 0, got {s}")
    t = joint_yu(dj, eb)
    hy = dj.h_y()
    val = _mi_y_subset(t, range(dj.K)) - hy
    if s:
        reg = sum(hy - _mi_y_subset(t, (k,)) + view_complexity(dj, eb, k) for k in range(dj.K))
        val -= s * reg
    return float(val)


def relevance_sum_rate(dj: DistributedJoint, eb: EncoderBank) -> tuple[float, float]:
    """(I(Y;U_1..U_K), I(Y;U_1..U_K) + sum_k I(X_k;U_k|Y)) at the given encoders."""
    t = joint_yu(dj, eb)
    rel = _mi_y_subset(t, range(dj.K))
    return rel, rel + sum(conditional_complexity(dj, eb, k) for k in range(dj.K))


def prop_parametrization(dj: DistributedJoint, eb: EncoderBank, s: float) -> tuple[float, float]:
    """(Delta_s, R_s) from the Lagrangian value and the per-view informations.

    R_s = I(Y;U_K) + sum_k [I(X_k;U_k) - I(Y;U_k)];
    Delta_s = [(1+sK) H(Y) + s R_s + L_s] / (1+s).
    """
    t = joint_yu(dj, eb)
    rel = _mi_y_subset(t, range(dj.K))
    rate = rel + sum(view_complexity(dj, eb, k) - _mi_y_subset(t, (k,)) for k in range(dj.K))
    lag = dib_lagrangian(dj, eb, s)
    delta = ((1 + s * dj.K) * dj.h_y() + s * rate + lag) / (1 + s)
    return float(delta), float(rate)


# --------------------------------------------------------------------------
# Alternating solver
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DIBSolveConfig:
    s: float
    u_cards: tuple | None = None
    tol: float = 1e-8
    max_iter: int = 10_000
    n_restarts: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.s) and self.s >= 0):
            raise OutOfRange(f"s must be finite and >= 0, got {self.s}")
        if not self.tol > 0 or self.max_iter < 1 or self.n_restarts < 1:
            raise OutOfRange("tol, max_iter and n_restarts must be positive")


@dataclass(frozen=True)
class DIBSolution:
    bank: EncoderBank
    delta: float
    sum_rate: float
    lagrangian: float
    iterations: int
    converged: bool
    restart_index: int
    s: float


def _log0(a):
    with np.errstate(divide="ignore"):
        return np.log(a)


def _joint_decoder_scores(dj: DistributedJoint, chans, k: int) -> np.ndarray:
    """A[y, u_k] = sum_{u_-k} P(u_-k|y) log Q(y|u_k, u_-k) with Q the induced posterior."""
    t = _product_joint(dj.p_y, chans)
    pu = t.sum(axis=0)
    # undefined posteriors are filled with P_Y; any fill keeps the ascent valid
    q = np.where(pu[None] > 0, t / np.where(pu > 0, pu, 1.0)[None], dj.p_y.reshape((-1,) + (1,) * (t.ndim - 1)))
    logq = _log0(q)
    others = [c if j != k else np.ones((dj.y_card, 1)) for j, c in enumerate(chans)]
    w = _product_joint(np.ones(dj.y_card), others)  # P(u_-k|y), singleton axis at k
    prod = np.where(w > 0, w * logq, 0.0)
    axes = tuple(j + 1 for j in range(dj.K) if j != k)
    return prod.sum(axis=axes) if axes else prod


def _update_encoder(dj: DistributedJoint, chans, rows: np.ndarray, k: int, s: float) -> np.ndarray:
    cond = dj.conditionals[k]
    px = dj.p_x(k)
    post = np.divide((cond * dj.p_y[:, None]).T, px[:, None], out=np.zeros_like(cond.T),
                     where=px[:, None] > 0)  # P(y|x_k), x_k x y
    a_joint = _joint_decoder_scores(dj, chans, k)
    if s == 0:
        score = _expect(post, a_joint)
        new = np.zeros_like(rows)
        new[np.arange(rows.shape[0]), np.argmax(score, axis=1)] = 1.0
        return new
    c = chans[k]
    joint_yu_k = c * dj.p_y[:, None]
    pu = joint_yu_k.sum(axis=0)
    live = pu > 0
    q_yu = np.divide(joint_yu_k, pu[None, :], out=np.tile(dj.p_y[:, None], (1, pu.size)), where=live[None, :])
    score = _expect(post, _log0(q_yu) + a_joint / s)
    score = np.where(live[None, :], _log0(pu)[None, :] + score, -np.inf)
    top = score.max(axis=1, keepdims=True)
    stuck = ~np.isfinite(top[:, 0])
    score = np.exp(score - np.where(np.isfinite(top), top, 0.0))
    new = score / np.where(stuck[:, None], 1.0, score.sum(axis=1, keepdims=True))
    new[stuck] = rows[stuck]
    return new


def _expect(post: np.ndarray, table: np.ndarray) -> np.ndarray:
    """sum_y P(y|x) table[y, u], with 0 * (-inf) := 0."""
    out = np.zeros((post.shape[0], table.shape[1]))
    for x in range(post.shape[0]):
        m = post[x] > 0
        out[x] = post[x, m] @ table[m]
    return out


def _run(dj: DistributedJoint, rows: list, s: float, tol: float, max_iter: int):
    chans = [c @ r for c, r in zip(dj.conditionals, rows)]
    it = 0
    while it < max_iter:
        it += 1
        delta = 0.0
        for k in range(dj.K):
            new = _update_encoder(dj, chans, rows[k], k, s)
            delta = max(delta, float(np.abs(new - rows[k]).max()))
            rows[k] = new
            chans[k] = dj.conditionals[k] @ new
        if delta < tol:
            return rows, it, True
    return rows, it, False


def _identity_bank(dj: DistributedJoint, u_cards) -> EncoderBank:
    encs = []
    for n, m in zip(dj.x_cards, u_cards):
        e = np.zeros((n, m))
        e[np.arange(n), np.arange(n)] = 1.0
        encs.append(Encoder(e))
    return EncoderBank(tuple(encs))


def solve_dib_discrete(dj: DistributedJoint, cfg: DIBSolveConfig) -> DIBSolution:
    """Best-of-restarts alternating maximization of the sum-rate DIB Lagrangian.

    Each encoder update maximizes the variational cost with all decoders set
    to the induced posteriors, so the Lagrangian never decreases.  At s = 0
    the update is a hard assignment; when every |U_k| >= |X_k| the identity
    encoders are returned directly (they attain I(Y; X_1..X_K)).
    """
    u_cards = tuple(cfg.u_cards) if cfg.u_cards is not None else tuple(n + 1 for n in dj.x_cards)
    if len(u_cards) != dj.K or min(u_cards) < 1:
        raise CardinalityMismatch(f"need {dj.K} positive alphabet sizes, got {u_cards}")
    if cfg.s == 0 and all(m >= n for m, n in zip(u_cards, dj.x_cards)):
        bank = _identity_bank(dj, u_cards)
        rel, rate = relevance_sum_rate(dj, bank)
        return DIBSolution(bank, rel, rate, dib_lagrangian(dj, bank, 0.0), 0, True, 0, 0.0)
    best = None
    all_conv = True
    for r in range(cfg.n_restarts):
        rng = restart_rng(cfg.rng_seed, r)
        rows = [np.array(random_encoder(n, m, rng).rows) for n, m in zip(dj.x_cards, u_cards)]
        rows, it, conv = _run(dj, rows, cfg.s, cfg.tol, cfg.max_iter)
        all_conv &= conv
        bank = EncoderBank(tuple(Encoder(x) for x in rows))
        lag = dib_lagrangian(dj, bank, cfg.s)
        log.debug("s=%g restart=%d iters=%d L=%.12g", cfg.s, r, it, lag)
        if best is None or lag > best[1] + TIE_TOL:
            best = (bank, lag, it, r)
    bank, lag, it, r = best
    delta, rate = prop_parametrization(dj, bank, cfg.s)
    if not all_conv:
        log.warning("s=%g: some restarts hit max_iter=%d", cfg.s, cfg.max_iter)
    return DIBSolution(bank, delta, rate, lag, it, all_conv, r, cfg.s)


def sweep_dib(dj: DistributedJoint, s_values: Sequence[float], cfg: DIBSolveConfig) -> list[DIBSolution]:
    sols = [solve_dib_discrete(dj, replace(cfg, s=float(s))) for s in s_values]
    return sorted(sols, key=lambda x: (x.sum_rate, x.s))


# --------------------------------------------------------------------------
# Variational DIB cost
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DIBComponents:
    """Joint decoder Q(Y|U_1..U_K) (axes u_1..u_K, y), per-view decoders Q(Y|U_k) and priors Q(U_k)."""

    joint_decoder: np.ndarray
    decoders: tuple
    priors: tuple


def optimal_dib_components(dj: DistributedJoint, eb: EncoderBank) -> DIBComponents:
    t = joint_yu(dj, eb)
    pu = t.sum(axis=0)
    fill = np.broadcast_to(dj.p_y, pu.shape + (dj.y_card,))
    joint = np.where(pu[..., None] > 0, np.moveaxis(t, 0, -1) / np.where(pu > 0, pu, 1.0)[..., None], fill)
    decs, priors = [], []
    for c in u_given_y(dj, eb):
        juy = c * dj.p_y[:, None]
        p = juy.sum(axis=0)
        decs.append(np.where(p[:, None] > 0, (juy / np.where(p > 0, p, 1.0)).T, dj.p_y[None, :]))
        priors.append(p)
    return DIBComponents(joint, tuple(decs), tuple(priors))


def _check_components(dj: DistributedJoint, eb: EncoderBank, q: DIBComponents) -> None:
    shape = eb.u_cards + (dj.y_card,)
    if np.shape(q.joint_decoder) != shape:
        raise CardinalityMismatch(f"joint decoder has shape {np.shape(q.joint_decoder)}, expected {shape}")
    if len(q.decoders) != dj.K or len(q.priors) != dj.K:
        raise CardinalityMismatch("need one decoder and one prior per view")
    for k, m in enumerate(eb.u_cards):
        if np.shape(q.decoders[k]) != (m, dj.y_card) or np.shape(q.priors[k]) != (m,):
            raise CardinalityMismatch(f"components of view {k} do not match |U_{k}|={m}")


def _cross(weights: np.ndarray, q: np.ndarray) -> float:
    used = weights > 0
    if np.any(np.asarray(q)[used] <= 0):
        raise InfiniteBound("a decoder assigns zero probability to a reachable outcome")
    return float(np.sum(weights[used] * np.log(np.asarray(q)[used])))


def eval_vdib_bound(dj: DistributedJoint, eb: EncoderBank, q: DIBComponents, s: float) -> float:
    """E log Q(Y|U_K) + s sum_k (E log Q(Y|U_k) - E_X D(P_{U_k|X_k} || Q_{U_k}))."""
    if not s >= 0:
        raise OutOfRange(f"s must be >= 0, got {s}")
    _check_bank(dj, eb)
    _check_components(dj, eb, q)
    t = joint_yu(dj, eb)
    val = _cross(np.moveaxis(t, 0, -1), q.joint_decoder)
    reg = 0.0
    for k, c in enumerate(u_given_y(dj, eb)):
        reg += _cross((c * dj.p_y[:, None]).T, q.decoders[k])
        kls = np.array([kl_divergence(row, q.priors[k]) for row in eb[k].rows])
        if np.any(np.isinf(kls)):
            raise InfiniteBound(f"encoder {k} puts mass where its prior has none")
        reg -= float(dj.p_x(k) @ kls)
    return val + s * reg


class VDIBGap(NamedTuple):
    gap: float
    joint_kl: float
    view_kls: tuple  # per k: D(P_{Y|U_k} || Q_{Y|U_k} | P_{U_k}) + D(P_{U_k} || Q_{U_k})


def vdib_gap(dj: DistributedJoint, eb: EncoderBank, q: DIBComponents, s: float) -> VDIBGap:
    """L_s - L_s^VB and its relative-entropy decomposition."""
    gap = dib_lagrangian(dj, eb, s) - eval_vdib_bound(dj, eb, q, s)
    t = np.moveaxis(joint_yu(dj, eb), 0, -1)
    pu = t.sum(axis=-1)
    flat_t, flat_q = t.reshape(-1, dj.y_card), np.reshape(q.joint_decoder, (-1, dj.y_card))
    joint_kl = sum(p * kl_divergence(row / p, qr) for p, row, qr in zip(pu.ravel(), flat_t, flat_q) if p > 0)
    views = []
    for k, c in enumerate(u_given_y(dj, eb)):
        juy = (c * dj.p_y[:, None]).T
        p = juy.sum(axis=1)
        d = sum(pk * kl_divergence(row / pk, qr) for pk, row, qr in zip(p, juy, q.decoders[k]) if pk > 0)
        views.append(float(d + kl_divergence(p, q.priors[k])))
    return VDIBGap(float(gap), float(joint_kl), tuple(views))


# --------------------------------------------------------------------------
# Gaussian DIB
# --------------------------------------------------------------------------


def _sym_sqrt(a: np.ndarray, name: str) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    if w.min() <= 0:
        raise NotPositiveDefinite(f"{name} is not positive definite")
    return (v * np.sqrt(w)) @ v.T


def _as_matrix(a) -> np.ndarray:
    return np.atleast_2d(np.asarray(a, dtype=float))


@dataclass(frozen=True)
class GaussianDIBModel:
    """X_k = H_k Y + N_k with N_k ~ N(0, sigma_k), Y ~ N(0, sigma_y), plus an operating point (Omega_k, R_k).

    Rates may be ``inf``: a view with unlimited rate never makes the subset
    bounds that contain it binding.
    """

    H: tuple
    sigma: tuple
    sigma_y: np.ndarray
    omega: tuple
    rates: tuple

    def __post_init__(self):
        h = tuple(_as_matrix(x) for x in self.H)
        sig = tuple(_as_matrix(x) for x in self.sigma)
        om = tuple(_as_matrix(x) for x in self.omega)
        sy = _as_matrix(self.sigma_y)
        rates = tuple(float(r) for r in self.rates)
        K = len(h)
        if not (len(sig) == len(om) == len(rates) == K) or K == 0:
            raise CardinalityMismatch("H, sigma, omega and rates need one entry per view")
        if K > MAX_K:
            raise EnumerationTooLarge(f"K={K} exceeds the limit of {MAX_K} views")
        _sym_sqrt(sy, "sigma_y")
        for k in range(K):
            n = sig[k].shape[0]
            if h[k].shape != (n, sy.shape[0]) or om[k].shape != (n, n):
                raise ShapeMismatch(f"view {k}: H {h[k].shape}, sigma {sig[k].shape}, omega {om[k].shape}")
            if rates[k] < 0 or math.isnan(rates[k]):
                raise OutOfRange(f"rate of view {k} must be >= 0")
            root = _sym_sqrt(sig[k], f"sigma_{k}")
            w = np.linalg.eigvalsh(root @ om[k] @ root)
            if w.min() < -1e-9 or w.max() > 1 + 1e-9 or np.abs(om[k] - om[k].T).max() > 1e-10:
                raise SandwichViolation(f"omega_{k} violates 0 <= omega <= sigma^-1 (eigenvalues {w})")
        object.__setattr__(self, "H", h)
        object.__setattr__(self, "sigma", sig)
        object.__setattr__(self, "sigma_y", sy)
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "rates", rates)

    @property
    def K(self) -> int:
        return len(self.H)

    def with_point(self, omega, rates) -> "GaussianDIBModel":
        return GaussianDIBModel(self.H, self.sigma, self.sigma_y, tuple(omega), tuple(rates))

    @classmethod
    def symmetric_scalar(cls, snr: float, omega=(0.0, 0.0), rates=(0.0, 0.0)) -> "GaussianDIBModel":
        """Two views X_k = sqrt(snr) Y + N_k with unit variances."""
        g = math.sqrt(snr)
        return cls(([[g]], [[g]]), ([[1.0]], [[1.0]]), [[1.0]], tuple([[w]] for w in omega), tuple(rates))

    def mutual_information(self) -> float:
        """I(Y; X_1..X_K) in nats."""
        return _logdet_i_plus(self, range(self.K), [np.linalg.inv(s) for s in self.sigma])


def _logdet_i_plus(m: GaussianDIBModel, views, omegas) -> float:
    root = _sym_sqrt(m.sigma_y, "sigma_y")
    acc = np.eye(m.sigma_y.shape[0])
    for k in views:
        acc = acc + root @ m.H[k].T @ omegas[k] @ m.H[k] @ root
    sign, ld = np.linalg.slogdet(acc)
    return 0.5 * float(ld)


def _view_penalty(m: GaussianDIBModel, k: int) -> float:
    """(1/2) log|I - S^1/2 Omega S^1/2|, possibly -inf."""
    root = _sym_sqrt(m.sigma[k], "sigma")
    w = 1.0 - np.linalg.eigvalsh(root @ m.omega[k] @ root)
    w = np.clip(w, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        return 0.5 * float(np.sum(np.log(w)))


def gaussian_dib_bounds(m: GaussianDIBModel) -> tuple[tuple, np.ndarray]:
    """Right-hand side of the Gaussian region inequality for every subset S."""
    pen = [_view_penalty(m, k) for k in range(m.K)]
    subsets, vals = [], []
    for mask in range(1 << m.K):
        s = tuple(k for k in range(m.K) if mask >> k & 1)
        comp = [k for k in range(m.K) if not mask >> k & 1]
        total = _logdet_i_plus(m, comp, m.omega)
        for k in s:
            if math.isinf(m.rates[k]):
                total = math.inf
                break
            total += m.rates[k] + pen[k]
        subsets.append(s)
        vals.append(total)
    return tuple(subsets), np.array(vals)


def gaussian_dib_delta(m: GaussianDIBModel) -> float:
    """Largest relevance allowed by the region at the model's (Omega, R); real-valued, nats."""
    return float(gaussian_dib_bounds(m)[1].min())


def optimize_gaussian_dib(m: GaussianDIBModel, *, tied: bool = False, sweeps: int = 50,
                          xtol: float = 1e-13) -> tuple[float, GaussianDIBModel]:
    """Maximize the relevance over diagonal operating points at the model's rates.

    Omega_k = S_k^{-1/2} diag(t_k) S_k^{-1/2} with t_k in [0,1]^{n_k}, so the
    sandwich constraint becomes a box.  Coordinates are optimized one at a
    time by bounded Brent search; ``tied`` uses one shared t for every
    coordinate of every view (the symmetric case).
    """
    inv_roots = [np.linalg.inv(_sym_sqrt(s, "sigma")) for s in m.sigma]
    dims = [s.shape[0] for s in m.sigma]

    def build(ts):
        om = []
        for k, r in enumerate(inv_roots):
            o = r @ np.diag(ts[k]) @ r
            om.append(0.5 * (o + o.T))
        return m.with_point(om, m.rates)

    def value(ts):
        return gaussian_dib_delta(build(ts))

    if tied:
        f = lambda t: -value([np.full(d, t) for d in dims])
        res = minimize_scalar(f, bounds=(0.0, 1.0), method="bounded", options={"xatol": xtol})
        best_t = min([0.0, 1.0, float(res.x)], key=f)
        ts = [np.full(d, best_t) for d in dims]
        return value(ts), build(ts)

    ts = [np.zeros(d) for d in dims]
    cur = value(ts)
    for _ in range(sweeps):
        prev = cur
        for k, d in enumerate(dims):
            for i in range(d):
                def f(t, k=k, i=i):
                    trial = [x.copy() for x in ts]
                    trial[k][i] = t
                    return -value(trial)

                res = minimize_scalar(f, bounds=(0.0, 1.0), method="bounded", options={"xatol": xtol})
                cand = min([ts[k][i], 0.0, 1.0, float(res.x)], key=f)
                if -f(cand) >= cur:
                    ts[k][i] = cand
                    cur = -f(cand)
        if cur - prev <= 1e-14:
            break
    return cur, build(ts)


# --------------------------------------------------------------------------
# Symmetric scalar closed forms
# --------------------------------------------------------------------------


def symmetric_scalar_dib(snr: float, rate: float) -> tuple[float, float, float]:
    """(optimal, joint-encoding upper bound, independent-encoding lower bound), nats.

    The optimal value is rewritten so that it is exactly zero at rate 0 and
    free of cancellation for large rates.
    """
    if not (snr >= 0 and rate >= 0):
        raise OutOfRange(f"snr and rate must be >= 0, got snr={snr}, rate={rate}")
    if math.isinf(rate):
        top = 0.5 * math.log1p(2 * snr)
        return top, top, top
    rate = float(rate)
    e4 = math.exp(-4 * rate)
    e2 = math.exp(-2 * rate)
    # a - b with a = 1 + snr e4, b = sqrt(snr^2 e4^2 + (1+2snr) e4); a^2 - b^2 = 1 - e4
    root = math.sqrt(snr * snr * e4 * e4 + (1 + 2 * snr) * e4)
    inner = (0.0 - math.expm1(-4 * rate)) / (1 + snr * e4 + root)
    star = 0.5 * math.log1p(2 * snr * inner)
    ub = 0.5 * math.log1p(2 * snr) - 0.5 * math.log1p(2 * snr * e4)
    lb = 0.5 * math.log1p(2 * snr - snr * e2) - 0.5 * math.log1p(snr * e2)
    return star, ub, lb


def symmetric_scalar_dib_direct(snr: float, rate: float) -> float:
    """The optimal value evaluated literally (no rearrangement); loses accuracy for large rates."""
    e = math.exp(4 * rate)
    return 0.5 * math.log(1 + 2 * snr / e * (e + snr - math.sqrt(snr * snr + (1 + 2 * snr) * e)))
