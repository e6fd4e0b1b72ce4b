"""Seeded multistart driver shared by the private and public designers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._auglag import augmented_lagrangian
from ._parallel import CHUNK, chunk_slices, run_chunks

FEAS_REL = 1e-6
KEEP_PER_CHUNK = 5


def feasible_mask(cost, obedience, nash):
    lim = FEAS_REL * (1.0 + np.abs(cost))
    return (obedience <= lim) & (nash <= lim)


def residual_maxima(ev, z):
    st = ev.state(z, need_slopes=False)
    B = z.shape[0]
    X = np.where(st["X"] < 1e-9, 0.0, st["X"])
    y = np.where(st["y"] < 1e-9, 0.0, st["y"])
    st = dict(st, X=X, y=y)
    ob = ev.obedience(st).reshape(B, -1).max(axis=1)
    na = ev.nash(st).reshape(B, -1).max(axis=1)
    return ob, na


@dataclass
class MultistartResult:
    z: np.ndarray
    cost: float
    obedience: float
    nash: float
    feasible: bool
    index: int
    n_feasible: int
    costs: np.ndarray


def multistart(ev, starts, seed, candidates=(), scale=1.0, threads=None, reweight=None):
    """Run the augmented Lagrangian from ``starts`` random points plus ``candidates``.

    Random points are drawn in one call from ``default_rng(seed)`` and then
    split into fixed chunks, so the outcome is independent of ``threads``.
    ``reweight`` may post-process the sampled batch (for example to pin the
    weights of diagonal policies). Candidate points are also kept in the pool
    unmodified, so a feasible candidate can never be lost. The winner is the
    feasible point of least cost, ties going to the lowest index.
    """
    rng = np.random.default_rng(seed)
    z0 = ev.space.sample(rng, starts)
    if reweight is not None:
        z0 = reweight(z0)
    cand = [np.asarray(c, dtype=float).reshape(-1) for c in candidates]
    if cand:
        z0 = np.vstack([np.array(cand), z0])
    z0 = ev.space.project(z0)
    B = z0.shape[0]
    slices = chunk_slices(B, CHUNK)

    def solve(sl):
        keep = KEEP_PER_CHUNK if sl.stop - sl.start > KEEP_PER_CHUNK else None
        r = augmented_lagrangian(ev, z0[sl], scale=scale, keep=keep)
        return r.z

    z = np.vstack(run_chunks(solve, slices, threads))
    if cand:
        z = np.vstack([z, z0[: len(cand)]])
    cost = ev.cost(z)
    ob, na = residual_maxima(ev, z)
    ok = feasible_mask(cost, ob, na)
    if ok.any():
        idx = np.flatnonzero(ok)
        i = int(idx[np.argmin(cost[idx])])
    else:
        viol = np.maximum(ob, na) / (1.0 + np.abs(cost))
        i = int(np.argmin(viol))
    return MultistartResult(z[i].copy(), float(cost[i]), float(ob[i]), float(na[i]), bool(ok[i]), i, int(ok.sum()), cost)
