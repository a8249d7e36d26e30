"""Finite-alphabet probability machinery.

Everything here works in nats; :func:`to_bits` is the only place a base
change happens.  ``0 log 0`` is taken as 0 throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import entr

from .errors import (
    CardinalityMismatch,
    EmptyAlphabet,
    IndexOutOfRange,
    LengthMismatch,
    NegativeEntry,
    NotNormalized,
    OutOfRange,
)

LN2 = math.log(2.0)
# Probabilities below this count as zero when checking divergence support.
ZERO_PROB = 1e-15
# Accepted deviation of a raw joint table from unit mass.
RAW_SUM_TOL = 1e-6
ROW_SUM_TOL = 1e-9


class InfoValue(float):
    """A float holding an information quantity in nats."""

    @property
    def nats(self) -> float:
        return float(self)

    @property
    def bits(self) -> float:
        return float(self) / LN2

    def __repr__(self) -> str:
        return f"InfoValue({float(self)!r} nats)"


def to_bits(nats):
    return np.asarray(nats) / LN2 if np.ndim(nats) else float(nats) / LN2


def to_nats(bits):
    return np.asarray(bits) * LN2 if np.ndim(bits) else float(bits) * LN2


def _clamp(value: float) -> InfoValue:
    # Entropy-difference roundoff can go slightly negative.
    return InfoValue(max(float(value), 0.0))


def entropy(p) -> float:
    """Shannon entropy (nats) of a pmf given as an array of any shape."""
    return float(entr(np.asarray(p, dtype=float)).sum())


def mutual_information_table(pxy) -> InfoValue:
    """I(A;B) for a 2-D joint table (rows A, columns B)."""
    pxy = np.asarray(pxy, dtype=float)
    h = entropy(pxy.sum(axis=1)) + entropy(pxy.sum(axis=0)) - entropy(pxy)
    return _clamp(h)


def conditional_entropy_table(pxy) -> InfoValue:
    """H(B|A) for a 2-D joint table (rows A, columns B)."""
    pxy = np.asarray(pxy, dtype=float)
    return _clamp(entropy(pxy) - entropy(pxy.sum(axis=1)))


# --------------------------------------------------------------------------
# Joint distributions and encoders
# --------------------------------------------------------------------------


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class JointPMF:
    """Joint pmf of (X, Y) as an ``x_card x y_card`` table.

    ``x_index``/``y_index`` map the kept symbols back to the raw alphabet when
    zero-probability symbols were pruned at construction.
    """

    p: np.ndarray
    x_labels: tuple | None = None
    y_labels: tuple | None = None
    x_index: tuple = field(default=())
    y_index: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "p", _readonly(self.p))
        if not self.x_index:
            object.__setattr__(self, "x_index", tuple(range(self.p.shape[0])))
        if not self.y_index:
            object.__setattr__(self, "y_index", tuple(range(self.p.shape[1])))

    @property
    def x_card(self) -> int:
        return self.p.shape[0]

    @property
    def y_card(self) -> int:
        return self.p.shape[1]

    @property
    def p_x(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def p_y(self) -> np.ndarray:
        return self.p.sum(axis=0)

    @property
    def p_y_given_x(self) -> np.ndarray:
        return self.p / self.p_x[:, None]

    @property
    def p_x_given_y(self) -> np.ndarray:
        return (self.p / self.p_y[None, :]).T

    def h_x(self) -> InfoValue:
        return InfoValue(entropy(self.p_x))

    def h_y(self) -> InfoValue:
        return InfoValue(entropy(self.p_y))

    def h_y_given_x(self) -> InfoValue:
        return conditional_entropy_table(self.p)

    def h_x_given_y(self) -> InfoValue:
        return conditional_entropy_table(self.p.T)

    def swapped(self) -> "JointPMF":
        return JointPMF(self.p.T, self.y_labels, self.x_labels, self.y_index, self.x_index)

    @classmethod
    def dsbs(cls, p: float) -> "JointPMF":
        """Doubly symmetric binary source with crossover ``p``."""
        if not 0.0 <= p <= 1.0:
            raise OutOfRange(f"crossover must lie in [0, 1], got {p}")
        return validate_joint([[(1 - p) / 2, p / 2], [p / 2, (1 - p) / 2]], prune_zeros=False)


def validate_joint(
    raw,
    *,
    renormalize: bool = False,
    prune_zeros: bool = True,
    x_labels: Sequence | None = None,
    y_labels: Sequence | None = None,
) -> JointPMF:
    """Check and normalize a raw joint table.

    Raises :class:`NegativeEntry`, :class:`NotNormalized` or
    :class:`EmptyAlphabet`; messages name the offending row/column.
    Zero-probability rows/columns are dropped when ``prune_zeros`` is set.
    """
    rows = list(raw) if not isinstance(raw, np.ndarray) else list(raw)
    if len(rows) == 0:
        raise EmptyAlphabet("joint table has no rows")
    width = None
    for i, row in enumerate(rows):
        try:
            n = len(row)
        except TypeError:
            raise IndexOutOfRange(f"row {i} is not a sequence") from None
        if width is None:
            width = n
        elif n != width:
            raise LengthMismatch(f"row {i} has {n} entries, expected {width}")
    if not width:
        raise EmptyAlphabet("joint table has no columns")
    table = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        for k, v in enumerate(row):
            try:
                fv = float(v)
            except (TypeError, ValueError):
                raise NotNormalized(f"entry at row {i}, column {k} is not a number: {v!r}") from None
            if not math.isfinite(fv):
                raise NotNormalized(f"entry at row {i}, column {k} is not finite")
            if fv < 0:
                raise NegativeEntry(f"entry at row {i}, column {k} is negative ({fv})")
            table[i, k] = fv
    total = table.sum()
    if total <= 0:
        raise NotNormalized("joint table has zero total mass")
    if abs(total - 1.0) > RAW_SUM_TOL and not renormalize:
        raise NotNormalized(f"joint table sums to {total!r}, not 1 (pass renormalize=True to rescale)")
    table = table / total

    x_index = tuple(range(table.shape[0]))
    y_index = tuple(range(table.shape[1]))
    if prune_zeros:
        keep_x = np.flatnonzero(table.sum(axis=1) > 0)
        keep_y = np.flatnonzero(table.sum(axis=0) > 0)
        table = table[np.ix_(keep_x, keep_y)]
        x_index, y_index = tuple(int(i) for i in keep_x), tuple(int(i) for i in keep_y)
        if x_labels is not None:
            x_labels = [x_labels[i] for i in keep_x]
        if y_labels is not None:
            y_labels = [y_labels[i] for i in keep_y]
    return JointPMF(
        table,
        tuple(x_labels) if x_labels is not None else None,
        tuple(y_labels) if y_labels is not None else None,
        x_index,
        y_index,
    )


@dataclass(frozen=True)
class Encoder:
    """Stochastic map P(U|X); row ``x`` is the distribution of U given X=x."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] == 0 or rows.shape[1] == 0:
            raise EmptyAlphabet(f"encoder must be a non-empty matrix, got shape {rows.shape}")
        bad = np.argwhere(rows < 0)
        if bad.size:
            i, k = bad[0]
            raise NegativeEntry(f"encoder entry at row {i}, column {k} is negative")
        sums = rows.sum(axis=1)
        off = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
        if off.size:
            raise NotNormalized(f"encoder row {off[0]} sums to {sums[off[0]]!r}")
        object.__setattr__(self, "rows", _readonly(rows / sums[:, None]))

    @property
    def x_card(self) -> int:
        return self.rows.shape[0]

    @property
    def u_card(self) -> int:
        return self.rows.shape[1]

    @classmethod
    def identity(cls, n: int) -> "Encoder":
        return cls(np.eye(n))

    @classmethod
    def constant(cls, x_card: int, u_card: int = 1) -> "Encoder":
        rows = np.zeros((x_card, u_card))
        rows[:, 0] = 1.0
        return cls(rows)

    @classmethod
    def bsc(cls, q: float) -> "Encoder":
        return cls([[1 - q, q], [q, 1 - q]])


class Induced(NamedTuple):
    p_u: np.ndarray
    p_y_given_u: np.ndarray  # rows with p_u == 0 are NaN
    p_u_given_y: np.ndarray  # y_card x u_card
    joint_uxy: np.ndarray  # u_card x x_card x y_card
    defined: np.ndarray  # boolean mask of u with p_u > 0


def _check_compatible(j: JointPMF, e: Encoder) -> None:
    if e.x_card != j.x_card:
        raise CardinalityMismatch(f"encoder has {e.x_card} rows but X has {j.x_card} symbols")


def induced_distributions(j: JointPMF, e: Encoder) -> Induced:
    """Distributions induced by ``e`` under p(x) p(y|x) p(u|x)."""
    _check_compatible(j, e)
    joint_ux = e.rows.T * j.p_x[None, :]
    joint_uxy = e.rows.T[:, :, None] * j.p[None, :, :]
    p_u = joint_ux.sum(axis=1)
    joint_uy = joint_uxy.sum(axis=1)
    defined = p_u > 0
    p_y_given_u = np.full_like(joint_uy, np.nan)
    p_y_given_u[defined] = joint_uy[defined] / p_u[defined, None]
    p_u_given_y = (joint_uy / j.p_y[None, :]).T
    return Induced(p_u, p_y_given_u, p_u_given_y, joint_uxy, defined)


def ib_terms(j: JointPMF, e: Encoder) -> tuple[InfoValue, InfoValue]:
    """(complexity I(U;X), relevance I(U;Y)) in nats."""
    _check_compatible(j, e)
    joint_ux = e.rows * j.p_x[:, None]
    joint_uy = e.rows.T @ j.p
    return mutual_information_table(joint_ux), mutual_information_table(joint_uy)


def mutual_information(j: JointPMF) -> InfoValue:
    """I(X;Y) = H(X) + H(Y) - H(X,Y), clamped at 0."""
    return mutual_information_table(j.p)


def kl_divergence(p, q) -> InfoValue:
    """D(p||q) in nats; ``inf`` when p is not absolutely continuous w.r.t. q."""
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise LengthMismatch(f"distributions have lengths {p.size} and {q.size}")
    support = p > ZERO_PROB
    if np.any(q[support] <= ZERO_PROB):
        return InfoValue(math.inf)
    ps, qs = p[support], q[support]
    return _clamp(float(np.sum(ps * (np.log(ps) - np.log(qs)))))


def binary_entropy(x: float) -> float:
    """h2(x) in bits."""
    if not 0.0 <= x <= 1.0:
        raise OutOfRange(f"binary entropy needs 0 <= x <= 1, got {x}")
    return float(entr(x) + entr(1.0 - x)) / LN2


def binary_convolution(p: float, q: float) -> float:
    """p * q = p(1-q) + q(1-p)."""
    return p * (1 - q) + q * (1 - p)


def log_loss(y_index: int, yhat) -> InfoValue:
    """Per-letter logarithmic loss log(1/yhat[y])."""
    yhat = np.asarray(yhat, dtype=float)
    if not 0 <= y_index < yhat.size:
        raise IndexOutOfRange(f"symbol {y_index} outside alphabet of size {yhat.size}")
    v = yhat[y_index]
    return InfoValue(math.inf if v <= 0 else -math.log(v))
