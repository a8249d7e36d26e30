"""Analytic IB solutions: binary symmetric source and jointly Gaussian sources.

Gaussian quantities are for real-valued vectors, so every log-determinant
carries a factor 1/2.  ``gamma`` follows the solver convention of
:mod:`ibkit.ib_discrete` (weight on relevance).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curve import CurvePoint
from .errors import EigenFailure, NotPositiveDefinite, OutOfRange, ShapeMismatch
from .prob import LN2, binary_convolution, binary_entropy

EIG_CLAMP_TOL = 1e-7


def binary_ib(p: float, q: float) -> CurvePoint:
    """IB point of DSBS(p) under the test channel U = X xor Bern(q), in nats."""
    if not 0.0 <= p <= 0.5:
        raise OutOfRange(f"crossover p must lie in [0, 1/2], got {p}")
    if not 0.0 <= q <= 1.0:
        raise OutOfRange(f"test-channel noise q must lie in [0, 1], got {q}")
    cpx = (1.0 - binary_entropy(q)) * LN2
    rel = (1.0 - binary_entropy(binary_convolution(p, q))) * LN2
    return CurvePoint(cpx, rel, q)


def scalar_gaussian_ib(snr: float, rate: float) -> float:
    """Relevance (nats) at complexity ``rate`` for X = sqrt(snr) Y + N."""
    if snr < 0 or rate < 0 or math.isnan(snr) or math.isnan(rate):
        raise OutOfRange(f"snr and rate must be >= 0, got snr={snr}, rate={rate}")
    return 0.5 * math.log1p(snr) - 0.5 * math.log1p(snr * math.exp(-2.0 * rate))


def _logdet_pd(a: np.ndarray, what: str) -> float:
    sign, ld = np.linalg.slogdet(a)
    if sign <= 0:
        raise NotPositiveDefinite(f"{what} is not positive definite")
    return float(ld)


def _sym(a, name: str) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.T).max() > 1e-10 * scale:
        raise NotPositiveDefinite(f"{name} is not symmetric")
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class GaussianIBModel:
    """Jointly Gaussian (X, Y) described by Sigma_X and Sigma_{X|Y}.

    ``eigvals``/``eigvecs`` hold the ascending eigenvalues and left
    eigenvectors (as columns) of Sigma_{X|Y} Sigma_X^{-1}, normalized so
    that v' Sigma_X v = 1.
    """

    sigma_x: np.ndarray
    sigma_x_given_y: np.ndarray
    eigvals: np.ndarray = field(init=False, repr=False)
    eigvecs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        sx = _sym(self.sigma_x, "sigma_x")
        sxy = _sym(self.sigma_x_given_y, "sigma_x_given_y")
        if sx.shape != sxy.shape:
            raise ShapeMismatch("sigma_x and sigma_x_given_y differ in shape")
        try:
            chol = np.linalg.cholesky(sx)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite("sigma_x is not positive definite") from None
        scale = max(1.0, float(np.abs(sxy).max()))
        if np.linalg.eigvalsh(sxy).min() < -1e-9 * scale:
            raise NotPositiveDefinite("sigma_x_given_y is not positive semidefinite")
        # whiten: C = L^{-1} S_{x|y} L^{-T}; v = L^{-T} w
        linv = np.linalg.inv(chol)
        c = linv @ sxy @ linv.T
        try:
            lam, w = np.linalg.eigh(0.5 * (c + c.T))
        except np.linalg.LinAlgError as exc:
            raise EigenFailure(str(exc)) from None
        if lam.min() < -EIG_CLAMP_TOL or lam.max() > 1 + EIG_CLAMP_TOL:
            raise EigenFailure(f"eigenvalues {lam} fall outside [0, 1]; is sigma_x_given_y <= sigma_x?")
        object.__setattr__(self, "sigma_x", sx)
        object.__setattr__(self, "sigma_x_given_y", sxy)
        object.__setattr__(self, "eigvals", np.clip(lam, 0.0, 1.0))
        object.__setattr__(self, "eigvecs", linv.T @ w)

    @property
    def dim(self) -> int:
        return self.sigma_x.shape[0]

    @classmethod
    def from_channel(cls, h, sigma_noise, sigma_y) -> "GaussianIBModel":
        """X = H Y + N with N ~ N(0, sigma_noise), Y ~ N(0, sigma_y)."""
        h = np.atleast_2d(np.asarray(h, dtype=float))
        sn = np.atleast_2d(np.asarray(sigma_noise, dtype=float))
        sy = np.atleast_2d(np.asarray(sigma_y, dtype=float))
        if h.shape != (sn.shape[0], sy.shape[0]):
            raise ShapeMismatch(f"H has shape {h.shape}, expected {(sn.shape[0], sy.shape[0])}")
        return cls(h @ sy @ h.T + sn, sn)

    @classmethod
    def scalar(cls, snr: float) -> "GaussianIBModel":
        """X = sqrt(snr) Y + N with unit-variance Y and N."""
        return cls([[1.0 + snr]], [[1.0]])

    def mutual_information(self) -> float:
        """I(X;Y) in nats."""
        return 0.5 * (_logdet_pd(self.sigma_x, "sigma_x") - _logdet_pd(self.sigma_x_given_y, "sigma_x_given_y"))


@dataclass(frozen=True)
class GaussianIBProjection:
    A: np.ndarray
    active_dims: int
    gamma: float


def critical_betas(m: GaussianIBModel) -> np.ndarray:
    """Ascending critical trade-off values 1/(1 - lambda_i); lambda = 1 maps to inf."""
    with np.errstate(divide="ignore"):
        return np.where(m.eigvals < 1.0, 1.0 / (1.0 - m.eigvals), np.inf)


def vector_gaussian_ib(m: GaussianIBModel, gamma: float) -> tuple[GaussianIBProjection, CurvePoint]:
    """Optimal Gaussian test channel U = A X + xi at trade-off ``gamma``."""
    if not gamma >= 0 or math.isinf(gamma):
        raise OutOfRange(f"gamma must be finite and >= 0, got {gamma}")
    betas = critical_betas(m)
    rows = []
    for lam, beta_c, v in zip(m.eigvals, betas, m.eigvecs.T):
        if not gamma > beta_c:
            continue
        r = float(v @ m.sigma_x @ v)
        if lam <= 0.0:
            raise NotPositiveDefinite(
                "sigma_x_given_y is singular along an active direction; relevance would be infinite"
            )
        alpha = math.sqrt((gamma * (1.0 - lam) - 1.0) / (lam * r))
        rows.append(alpha * v)
    a = np.array(rows).reshape(len(rows), m.dim)
    if not rows:
        return GaussianIBProjection(a, 0, gamma), CurvePoint(0.0, 0.0, gamma)
    eye = np.eye(len(rows))
    cpx = 0.5 * _logdet_pd(eye + a @ m.sigma_x @ a.T, "I + A Sx A'")
    rel = cpx - 0.5 * _logdet_pd(eye + a @ m.sigma_x_given_y @ a.T, "I + A Sx|y A'")
    return GaussianIBProjection(a, len(rows), gamma), CurvePoint(cpx, max(rel, 0.0), gamma)
