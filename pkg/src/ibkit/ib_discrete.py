"""Alternating (Blahut-Arimoto style) solver for the discrete IB problem.

Parameter convention: ``gamma`` is the weight on relevance in the
"minimize I(U;X) - gamma I(U;Y)" form, which is the exponent that appears in
the encoder update.  The equivalent multiplier of the "maximize
I(U;Y) - beta I(U;X)" form is ``beta = 1 / gamma``; reported Lagrangians use
that form.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ._backend import kernels
from .curve import CurvePoint
from .errors import OutOfRange
from .prob import Encoder, JointPMF, ib_terms, induced_distributions, _check_compatible

log = logging.getLogger(__name__)

TIE_TOL = 1e-12
# Symbols whose posteriors P(X|U=u) differ by less than this are merged.
MERGE_TOL = 1e-6
# Symbols with P(U=u) below this are dropped from returned encoders.
DEAD_SYMBOL = 1e-12
WARM_MIX = 1e-3


@dataclass(frozen=True)
class IBSolveConfig:
    gamma: float
    u_card: int | None = None
    tol: float = 1e-8
    max_iter: int = 10_000
    n_restarts: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise OutOfRange(f"gamma must be finite and >= 0, got {self.gamma}")
        if not self.tol > 0:
            raise OutOfRange("tol must be > 0")
        if self.u_card is not None and self.u_card < 1:
            raise OutOfRange("u_card must be >= 1")
        if self.max_iter < 1 or self.n_restarts < 1:
            raise OutOfRange("max_iter and n_restarts must be >= 1")


@dataclass(frozen=True)
class IBSolution:
    encoder: Encoder
    relevance_nats: float
    complexity_nats: float
    lagrangian: float
    iterations: int
    converged: bool
    restart_index: int
    gamma: float
    warm_started: bool = False

    def point(self) -> CurvePoint:
        return CurvePoint(self.complexity_nats, self.relevance_nats, self.gamma, self.encoder)


def restart_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for restart ``index``: Philox keyed by ``seed``, jumped ``index`` times."""
    bitgen = np.random.Philox(key=int(seed) & 0xFFFFFFFFFFFFFFFF)
    if index:
        bitgen = bitgen.jumped(index)
    return np.random.Generator(bitgen)


def random_encoder(x_card: int, u_card: int, rng: np.random.Generator) -> Encoder:
    return Encoder(rng.dirichlet(np.ones(u_card), size=x_card))


def ib_lagrangian(relevance: float, complexity: float, gamma: float) -> float:
    """I(U;Y) - (1/gamma) I(U;X); at gamma = 0 only the trivial encoder scores finitely."""
    if gamma == 0:
        return relevance if complexity <= 0 else -math.inf
    return relevance - complexity / gamma


def ba_step(j: JointPMF, e: Encoder, gamma: float) -> Encoder:
    """One synchronous self-consistent update of the encoder."""
    _check_compatible(j, e)
    if gamma < 0:
        raise OutOfRange("gamma must be >= 0")
    ind = induced_distributions(j, e)
    pyx = j.p_y_given_x
    live = ind.defined
    score = np.full((j.x_card, e.u_card), -np.inf)
    logpu = np.log(ind.p_u[live])
    if gamma > 0:
        kl = _kl_rows(pyx, ind.p_y_given_u[live])
        score[:, live] = logpu[None, :] - gamma * kl
    else:
        score[:, live] = logpu[None, :]
    score -= score.max(axis=1, keepdims=True)
    rows = np.exp(score)
    return Encoder(rows / rows.sum(axis=1, keepdims=True))


def _kl_rows(p, q) -> np.ndarray:
    """Matrix of D(p_i || q_j) for row-stochastic p (n x m) and q (k x m)."""
    out = np.zeros((p.shape[0], q.shape[0]))
    for i, row in enumerate(p):
        s = row > 0
        with np.errstate(divide="ignore"):
            lq = np.log(q[:, s])
        out[i] = np.sum(row[s] * (np.log(row[s])[None, :] - lq), axis=1)
    return out


def prune_encoder(j: JointPMF, e: Encoder) -> Encoder:
    """Drop unused U symbols and merge symbols with identical posteriors P(X|U)."""
    rows = np.asarray(e.rows)
    pu = j.p_x @ rows
    alive = np.flatnonzero(pu > DEAD_SYMBOL)
    rows = rows[:, alive]
    rows = rows / rows.sum(axis=1, keepdims=True)
    post = (rows * j.p_x[:, None]) / (j.p_x @ rows)[None, :]
    groups: list[list[int]] = []
    for u in range(rows.shape[1]):
        for g in groups:
            if np.max(np.abs(post[:, g[0]] - post[:, u])) < MERGE_TOL:
                g.append(u)
                break
        else:
            groups.append([u])
    merged = np.stack([rows[:, g].sum(axis=1) for g in groups], axis=1)
    return Encoder(merged)


def _evaluate(j: JointPMF, rows: np.ndarray, gamma: float, iters: int, converged: bool, index: int,
              warm: bool = False) -> IBSolution:
    enc = prune_encoder(j, Encoder(rows))
    cpx, rel = ib_terms(j, enc)
    return IBSolution(enc, float(rel), float(cpx), ib_lagrangian(rel, cpx, gamma), iters, converged, index,
                      gamma, warm)


def _pad(rows: np.ndarray, u_card: int) -> np.ndarray:
    if rows.shape[1] >= u_card:
        return rows[:, :u_card] / rows[:, :u_card].sum(axis=1, keepdims=True)
    return np.hstack([rows, np.zeros((rows.shape[0], u_card - rows.shape[1]))])


def solve_ib(j: JointPMF, cfg: IBSolveConfig, init: Encoder | None = None) -> IBSolution:
    """Best-of-restarts solution of the IB problem at ``cfg.gamma``.

    When ``init`` is given it replaces the random draw of restart 0 (lightly
    mixed with that draw so no symbol starts dead).  Non-convergence is
    reported through ``converged``, never raised.
    """
    u_card = cfg.u_card or j.x_card + 1
    px = np.ascontiguousarray(j.p_x)
    pyx = np.ascontiguousarray(j.p_y_given_x)
    best: IBSolution | None = None
    all_converged = True
    total_iters = 0
    for r in range(cfg.n_restarts):
        rows0 = random_encoder(j.x_card, u_card, restart_rng(cfg.rng_seed, r)).rows
        warm = init is not None and r == 0
        if warm:
            if init.x_card != j.x_card:
                raise OutOfRange("warm-start encoder does not match X alphabet")
            rows0 = (1 - WARM_MIX) * _pad(np.asarray(init.rows), u_card) + WARM_MIX * rows0
        rows, iters, conv = kernels.ba_solve(px, pyx, np.ascontiguousarray(rows0), float(cfg.gamma),
                                             float(cfg.tol), int(cfg.max_iter))
        all_converged &= conv
        total_iters += iters
        sol = _evaluate(j, rows, cfg.gamma, iters, conv, r, warm)
        log.debug("gamma=%g restart=%d iters=%d L=%.12g", cfg.gamma, r, iters, sol.lagrangian)
        if best is None or _better(sol, best):
            best = sol
    if not all_converged:
        log.warning("gamma=%g: some restarts hit max_iter=%d", cfg.gamma, cfg.max_iter)
    return replace(best, converged=all_converged)


def _better(a: IBSolution, b: IBSolution) -> bool:
    if a.gamma == 0:
        return a.complexity_nats < b.complexity_nats - TIE_TOL
    return a.lagrangian > b.lagrangian + TIE_TOL


def sweep_solutions(j: JointPMF, gammas: Sequence[float], cfg: IBSolveConfig, *, warm_start: bool = False,
                    workers: int = 1) -> list[IBSolution]:
    """Solve at every gamma; the result is sorted by complexity.

    With ``warm_start`` the gammas are visited in increasing order and each
    solve is seeded from the previous one.  Cold sweeps may run on a thread
    pool (the compiled kernel releases the GIL); results match the
    sequential run exactly.
    """
    gammas = [float(g) for g in gammas]
    if not gammas:
        raise OutOfRange("gamma grid is empty")
    for g in gammas:
        if not (math.isfinite(g) and g >= 0):
            raise OutOfRange(f"gamma must be finite and >= 0, got {g}")
    if warm_start:
        sols = []
        prev = None
        for g in sorted(gammas):
            sol = solve_ib(j, replace(cfg, gamma=g), init=prev)
            sols.append(sol)
            prev = sol.encoder
    elif workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sols = list(pool.map(lambda g: solve_ib(j, replace(cfg, gamma=g)), gammas))
    else:
        sols = [solve_ib(j, replace(cfg, gamma=g)) for g in gammas]
    return sorted(sols, key=lambda s: (s.complexity_nats, s.gamma))


def sweep_curve(j: JointPMF, gammas: Sequence[float], cfg: IBSolveConfig, **kwargs) -> list[CurvePoint]:
    return [s.point() for s in sweep_solutions(j, gammas, cfg, **kwargs)]


def log_gamma_grid(gamma_min: float, gamma_max: float, count: int) -> np.ndarray:
    if count < 1 or gamma_min <= 0 or gamma_max < gamma_min:
        raise OutOfRange("need 0 < gamma_min <= gamma_max and count >= 1")
    if count == 1:
        return np.array([gamma_min])
    return np.geomspace(gamma_min, gamma_max, count)
