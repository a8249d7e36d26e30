"""Variational IB bound on tabular components, Monte Carlo estimates and
reparameterized samplers.

``beta`` here multiplies the complexity term (maximize relevance minus
beta times complexity), i.e. ``beta = 1 / gamma`` of the BA solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import softmax

from .errors import (
    CardinalityMismatch,
    EmptyDataset,
    IndexOutOfRange,
    InfiniteBound,
    NegativeEntry,
    NonPositiveTemperature,
    NotNormalized,
    OutOfRange,
    ShapeMismatch,
)
from .ib_discrete import restart_rng
from .prob import (
    ROW_SUM_TOL,
    ZERO_PROB,
    Encoder,
    JointPMF,
    conditional_entropy_table,
    ib_terms,
    induced_distributions,
    kl_divergence,
    _check_compatible,
)

PI_FLOOR = 1e-12


def _stochastic(a, name: str, ndim: int) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.ndim != ndim or a.size == 0:
        raise ShapeMismatch(f"{name} must be a non-empty {ndim}-d array, got shape {a.shape}")
    if np.any(a < 0):
        raise NegativeEntry(f"{name} has a negative entry")
    sums = a.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > ROW_SUM_TOL):
        raise NotNormalized(f"{name} is not normalized (sums {sums})")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class VariationalComponents:
    """Decoder Q(Y|U) (u_card x y_card) and prior S(U)."""

    decoder: np.ndarray
    prior: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "decoder", _stochastic(self.decoder, "decoder", 2))
        object.__setattr__(self, "prior", _stochastic(self.prior, "prior", 1))
        if self.decoder.shape[0] != self.prior.size:
            raise CardinalityMismatch(
                f"decoder has {self.decoder.shape[0]} rows but prior has {self.prior.size} entries"
            )

    @property
    def u_card(self) -> int:
        return self.prior.size

    @property
    def y_card(self) -> int:
        return self.decoder.shape[1]


def _check_components(j: JointPMF, e: Encoder, v: VariationalComponents) -> None:
    _check_compatible(j, e)
    if v.u_card != e.u_card:
        raise CardinalityMismatch(f"components cover {v.u_card} U symbols, encoder emits {e.u_card}")
    if v.y_card != j.y_card:
        raise CardinalityMismatch(f"decoder covers {v.y_card} Y symbols, joint has {j.y_card}")


def _decoder_term(j: JointPMF, e: Encoder, v: VariationalComponents) -> float:
    # sum_{x,y,u} p(x,y) p(u|x) log Q(y|u)
    w = np.einsum("xy,xu->uy", j.p, e.rows)
    used = w > 0
    if np.any(used & (v.decoder <= ZERO_PROB)):
        raise InfiniteBound("decoder assigns zero probability to a reachable (u, y) pair")
    return float(np.sum(w[used] * np.log(v.decoder[used])))


def _rate_term(j: JointPMF, e: Encoder, prior) -> float:
    # sum_x p(x) D(P_{U|X=x} || S)
    kls = np.array([kl_divergence(row, prior) for row in e.rows])
    if np.any(np.isinf(kls)):
        bad = int(np.flatnonzero(np.isinf(kls))[0])
        raise InfiniteBound(f"encoder row {bad} puts mass where the prior has none")
    return float(j.p_x @ kls)


def eval_vib_bound(j: JointPMF, e: Encoder, v: VariationalComponents, beta: float) -> float:
    """E[log Q(Y|U)] - beta E_X D(P_{U|X} || S), in nats."""
    if not beta >= 0:
        raise OutOfRange(f"beta must be >= 0, got {beta}")
    _check_components(j, e, v)
    return _decoder_term(j, e, v) - beta * _rate_term(j, e, v.prior)


def optimal_components(j: JointPMF, e: Encoder) -> VariationalComponents:
    """The induced P(Y|U) and P(U); symbols with P(U)=0 get the marginal P(Y) as a filler row."""
    ind = induced_distributions(j, e)
    dec = np.where(ind.defined[:, None], ind.p_y_given_u, j.p_y[None, :])
    return VariationalComponents(dec, ind.p_u)


class VIBGap(NamedTuple):
    l_ib: float
    l_vib: float
    gap: float  # l_ib - (l_vib + H(Y))
    decoder_kl: float  # D(P_{Y|U} || Q_{Y|U} | P_U)
    prior_kl: float  # D(P_U || S_U)


def vib_gap(j: JointPMF, e: Encoder, v: VariationalComponents, beta: float) -> VIBGap:
    """Gap between the exact Lagrangian and the bound, plus its two KL parts.

    The bound's decoder term is a negative cross-entropy, so it sits H(Y)
    below I(U;Y); the gap is reported after adding H(Y) back.
    """
    l_vib = eval_vib_bound(j, e, v, beta)
    cpx, rel = ib_terms(j, e)
    l_ib = float(rel) - beta * float(cpx)
    ind = induced_distributions(j, e)
    dec_kl = 0.0
    for u in np.flatnonzero(ind.defined):
        dec_kl += ind.p_u[u] * kl_divergence(ind.p_y_given_u[u], v.decoder[u])
    prior_kl = float(kl_divergence(ind.p_u, v.prior))
    return VIBGap(l_ib, l_vib, l_ib - (l_vib + float(j.h_y())), float(dec_kl), prior_kl)


# --------------------------------------------------------------------------
# Monte Carlo estimate
# --------------------------------------------------------------------------


def draw_latents(e: Encoder, xs, m: int, seed: int = 0) -> np.ndarray:
    """Inverse-CDF draws of U ~ P(U|X=x) for each x in ``xs``; shape (len(xs), m)."""
    xs = np.asarray(xs, dtype=int)
    cdf = np.cumsum(e.rows, axis=1)
    cdf[:, -1] = 1.0
    uni = restart_rng(seed, 0).random((xs.size, m))
    return np.stack([np.searchsorted(cdf[x], uni[i], side="right") for i, x in enumerate(xs)]).reshape(xs.size, m)


def empirical_vib(samples: Sequence[tuple[int, int]], e: Encoder, v: VariationalComponents, beta: float,
                  m: int = 1, seed: int = 0) -> float:
    """Sample average of log Q(y_i|u_im) minus beta times the exact per-sample KL."""
    if len(samples) == 0:
        raise EmptyDataset("no samples given")
    if m < 1:
        raise OutOfRange("m must be >= 1")
    if v.u_card != e.u_card:
        raise CardinalityMismatch("components and encoder disagree on |U|")
    pairs = np.asarray(samples, dtype=int).reshape(-1, 2)
    xs, ys = pairs[:, 0], pairs[:, 1]
    if xs.min() < 0 or xs.max() >= e.x_card:
        raise IndexOutOfRange(f"x index outside 0..{e.x_card - 1}")
    if ys.min() < 0 or ys.max() >= v.y_card:
        raise IndexOutOfRange(f"y index outside 0..{v.y_card - 1}")
    us = draw_latents(e, xs, m, seed)
    with np.errstate(divide="ignore"):
        logq = np.log(v.decoder)
    fit = logq[us, ys[:, None]].mean(axis=1)
    kls = np.array([kl_divergence(row, v.prior) for row in e.rows])
    return float(np.mean(fit - beta * kls[xs]))


# --------------------------------------------------------------------------
# Reparameterized samplers
# --------------------------------------------------------------------------


def sample_gaussian_reparam(mu, scale, z) -> np.ndarray:
    """mu + scale @ z; ``z`` may carry leading batch axes."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    scale = np.atleast_2d(np.asarray(scale, dtype=float))
    z = np.asarray(z, dtype=float)
    if scale.shape[0] != mu.shape[-1] or z.shape[-1] != scale.shape[1]:
        raise ShapeMismatch(f"mu {mu.shape}, scale {scale.shape} and z {z.shape} do not line up")
    return mu + z @ scale.T


@dataclass(frozen=True)
class ConcreteParams:
    """Class probabilities ``pi`` (floored at 1e-12) and temperature ``lam``."""

    pi: np.ndarray
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise NonPositiveTemperature(f"temperature must be > 0, got {self.lam}")
        pi = _stochastic(self.pi, "pi", 1)
        object.__setattr__(self, "pi", np.maximum(pi, PI_FLOOR))

    @property
    def log_pi(self) -> np.ndarray:
        return np.log(self.pi)


def sample_gumbel_softmax(c: ConcreteParams, gumbels) -> np.ndarray:
    """softmax((log pi + G) / lam), evaluated with max subtraction."""
    g = np.asarray(gumbels, dtype=float)
    if g.shape[-1] != c.pi.size:
        raise ShapeMismatch(f"need {c.pi.size} Gumbel draws per sample, got {g.shape[-1]}")
    return softmax((c.log_pi + g) / c.lam, axis=-1)


def draw_gumbels(size, seed: int = 0) -> np.ndarray:
    """Standard Gumbel noise as -log(-log(u)) for uniform u."""
    u = restart_rng(seed, 0).random(size)
    return -np.log(-np.log(u))


def draw_normals(size, seed: int = 0) -> np.ndarray:
    return restart_rng(seed, 0).standard_normal(size)


# --------------------------------------------------------------------------
# Logarithmic-loss floor
# --------------------------------------------------------------------------


def _joint_table(j_uy) -> np.ndarray:
    t = np.asarray(j_uy.p if isinstance(j_uy, JointPMF) else j_uy, dtype=float)
    if t.ndim != 2 or np.any(t < 0) or abs(t.sum() - 1.0) > 1e-9:
        raise NotNormalized("joint of (U, Y) must be a non-negative table summing to 1")
    return t


def expected_log_loss(j_uy, decoder) -> float:
    """E[log 1/Q(Y|U)] under the joint table of (U, Y)."""
    t = _joint_table(j_uy)
    q = np.asarray(decoder, dtype=float)
    if q.shape != t.shape:
        raise ShapeMismatch(f"decoder shape {q.shape} differs from joint shape {t.shape}")
    used = t > 0
    if np.any(q[used] <= 0):
        return math.inf
    return float(-np.sum(t[used] * np.log(q[used])))


def log_loss_floor_check(j_uy) -> tuple[float, float]:
    """(log-loss of the posterior decoder, H(Y|U)); the two agree."""
    t = _joint_table(j_uy)
    pu = t.sum(axis=1, keepdims=True)
    post = np.divide(t, pu, out=np.full_like(t, 1.0 / t.shape[1]), where=pu > 0)
    return expected_log_loss(t, post), float(conditional_entropy_table(t))
