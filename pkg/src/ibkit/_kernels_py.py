"""Pure numpy versions of the compiled kernels (same signatures and semantics)."""
import numpy as np
from scipy.special import entr


def ba_solve(px, pyx, enc0, gamma, tol, max_iter):
    enc = np.array(enc0, dtype=float, copy=True)
    px = np.asarray(px, dtype=float)
    pyx = np.asarray(pyx, dtype=float)
    mask = pyx > 0
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        pu = px @ enc
        live = pu > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            pyu = (enc * px[:, None]).T @ pyx / pu[:, None]
            logpyu = np.where(live[:, None] & (pyu > 0), np.log(np.where(pyu > 0, pyu, 1.0)), -np.inf)
            logpu = np.where(live, np.log(np.where(live, pu, 1.0)), -np.inf)
            # sum_y p(y|x) log p(y|u), with 0 log(.) = 0
            cross = np.where(mask[:, None, :], pyx[:, None, :] * logpyu[None, :, :], 0.0).sum(axis=2)
        score = logpu[None, :] + (gamma * cross if gamma > 0 else np.zeros_like(enc))
        score[:, ~live] = -np.inf
        score -= score.max(axis=1, keepdims=True)
        new = np.exp(score)
        new /= new.sum(axis=1, keepdims=True)
        delta = np.abs(new - enc).max()
        enc = new
        if delta < tol:
            converged = True
            break
    return enc, it, converged


def ib_grid_block(px, pxy, cand, first_lo, first_hi):
    px = np.asarray(px, dtype=float)
    pxy = np.asarray(pxy, dtype=float)
    cand = np.asarray(cand, dtype=float)
    nx, ny = pxy.shape
    nc, nu = cand.shape
    hrow = entr(cand).sum(axis=1)
    hy = entr(pxy.sum(axis=0)).sum()
    firsts = cand[first_lo:first_hi]
    # Accumulate sums over rows by broadcasting; axis order = rows 0..nx-1.
    pu = px[0] * firsts
    puy = firsts[:, :, None] * pxy[0][None, None, :]
    hux = px[0] * hrow[first_lo:first_hi]
    for x in range(1, nx):
        pu = pu[..., None, :] + px[x] * cand
        puy = puy[..., None, :, :] + cand[:, :, None] * pxy[x][None, None, :]
        hux = hux[..., None] + px[x] * hrow
    hu = entr(pu).sum(axis=-1)
    huy = entr(puy).sum(axis=(-2, -1))
    cpx = np.maximum(hu - hux, 0.0).ravel()
    rel = np.maximum(hu + hy - huy, 0.0).ravel()
    return cpx, rel


def dib_pair_block(py, c1, c2, lo, hi):
    py = np.asarray(py, dtype=float)
    c1 = np.asarray(c1, dtype=float)[lo:hi]
    c2 = np.asarray(c2, dtype=float)
    joint = np.einsum("y,iya,jyb->ijyab", py, c1, c2)
    hy = entr(py).sum()
    hab = entr(joint.sum(axis=2)).sum(axis=(-2, -1))
    hyab = entr(joint).sum(axis=(-3, -2, -1))
    return np.maximum(hy + hab - hyab, 0.0)
