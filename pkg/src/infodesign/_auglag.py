"""Augmented Lagrangian for inequality-constrained design problems on simplex products."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._simplex import projected_gradient


@dataclass
class ALResult:
    z: np.ndarray
    cost: np.ndarray
    violation: np.ndarray
    outer: int
    inner: np.ndarray
    refined: np.ndarray


def augmented_lagrangian(ev, z0, scale=1.0, tol=1e-7, feas_tol=1e-9, max_outer=40, inner_max_iter=4000,
                         rho0=10.0, memory=8, keep=None, screen_outer=4):
    """Minimise ``ev.cost`` subject to ``ev.constraints <= 0`` from a batch of starts.

    Objective and constraints are divided by ``scale``. Multipliers follow the
    usual ``max(0, lam + rho c)`` update; the penalty grows tenfold whenever
    the violation fails to drop by a factor of four. The inner tolerance
    tightens geometrically from 1e-3 down to ``tol``.

    With ``keep`` set, only the ``keep`` starts with the lowest merit after
    ``screen_outer`` rounds are refined further; the others are returned as
    they stand and flagged in ``refined``.
    """
    z = ev.space.project(np.atleast_2d(np.asarray(z0, dtype=float)))
    B = z.shape[0]
    lam = np.zeros((B, ev.n_constraints))
    rho = np.full(B, float(rho0))
    prev = np.full(B, np.inf)
    inner = np.zeros(B, dtype=int)
    done = np.zeros(B, dtype=bool)
    refined = np.ones(B, dtype=bool)
    merit = np.zeros(B)
    inner_tol = 1e-3
    outer = 0
    act = np.arange(B)

    def fg(zz, idx):
        idx = act[idx]
        st = ev.state(zz)
        f, g = ev.cost_grad(zz, st)
        c = ev.constraints(zz, st) / scale
        w = np.maximum(0.0, lam[idx] + rho[idx][:, None] * c)
        val = f / scale + np.sum(w * w - lam[idx] ** 2, axis=1) / (2 * rho[idx])
        return val, g / scale + ev.constraints_vjp(st, w / scale)

    for outer in range(1, max_outer + 1):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        res = projected_gradient(fg, z[act], ev.space, tol=inner_tol, max_iter=inner_max_iter, indexed=True, memory=memory)
        z[act] = res.z
        merit[act] = res.fun
        inner[act] += res.iterations
        c = ev.constraints(z[act]) / scale
        viol = np.max(np.maximum(c, 0.0), axis=1)
        lam[act] = np.maximum(0.0, lam[act] + rho[act][:, None] * c)
        grow = viol > 0.25 * prev[act]
        rho[act] = np.where(grow, np.minimum(rho[act] * 10.0, 1e12), rho[act])
        prev[act] = viol
        if inner_tol <= tol:
            done[act] = viol <= feas_tol
        inner_tol = max(tol, inner_tol * 0.1)
        if keep is not None and outer == screen_outer and keep < B:
            order = np.lexsort((np.arange(B), merit))
            cut = order[keep:]
            refined[cut] = False
            done[cut] = True
    cost = ev.cost(z)
    c = ev.constraints(z)
    return ALResult(z, cost, np.max(np.maximum(c, 0.0), axis=1), outer, inner, refined)
