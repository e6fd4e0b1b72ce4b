"""Public signaling policies: canonical matrices, Bayes Nash residuals and design."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._game import GameEvaluator
from ._multistart import multistart
from .equilibrium import bne_indirect
from .private_design import DesignError, _solution, _zero_participation, _clip_support

ROW_TOL = 1e-9


@dataclass(frozen=True)
class PublicPolicy:
    """Row-stochastic s x m matrix of message probabilities ``pi(k|w)``."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.weights, dtype=float))
        if np.any(w < -ROW_TOL) or np.any(np.abs(w.sum(axis=1) - 1.0) > ROW_TOL):
            raise DesignError("public policy rows must be probability vectors")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def m(self):
        return self.weights.shape[1]

    @property
    def n_states(self):
        return self.weights.shape[0]


def canonical_policy(kind, s, m=None):
    """``"full"`` reveals the state (identity, m = s); ``"no"`` always sends message 1."""
    if kind in ("full", "full-info"):
        m = s if m is None else int(m)
        if m != s:
            raise DesignError(f"full information needs m = s = {s}, got {m}")
        return PublicPolicy(np.eye(s))
    if kind in ("no", "no-info"):
        m = 1 if m is None else int(m)
        if m < 1:
            raise DesignError("m must be at least 1")
        w = np.zeros((s, m))
        w[:, 0] = 1.0
        return PublicPolicy(w)
    raise DesignError(f"unknown canonical policy {kind!r}")


def public_residuals(scenario, policy, flows, y):
    """Per-message obedience residuals (m x n x n) and Nash residuals (n x n).

    Entry (k, i, j) is ``x_i^(k)`` times the latency advantage of route ``j``
    over ``i``, averaged over states with the unnormalised weights
    ``pi(k|w) mu0(w)``; messages never sent contribute zero. Flows below 1e-9 count as zero.
    """
    W = np.asarray(getattr(policy, "weights", policy), dtype=float)
    flows = np.atleast_2d(np.asarray(flows, dtype=float))
    y = np.asarray(y, dtype=float)
    s, n = scenario.n_states, scenario.n_routes
    if flows.shape[1] != n or W.shape != (s, flows.shape[0]) or y.shape != (n,):
        raise DesignError("dimension mismatch between policy, flows, y and the scenario")
    nu = min(1.0, max(0.0, float(flows[0].sum() / scenario.demand)))
    ev = GameEvaluator(scenario, nu, flows.shape[0], "public")
    st = ev.state(ev.pack(flows, W, y)[None], need_slopes=False)
    st = dict(st, X=_clip_support(st["X"]), y=_clip_support(st["y"]))
    return ev.obedience(st)[0], ev.nash(st)[0]


def _pad(weights, m):
    s, k = weights.shape
    if k >= m:
        return weights[:, :m]
    return np.hstack([weights, np.zeros((s, m - k))])


def evaluate_public(scenario, policy, nu, m=None):
    """Cost of a fixed public policy under its Bayes Nash flow."""
    W = np.asarray(getattr(policy, "weights", policy), dtype=float)
    if m is not None:
        W = _pad(W, m)
    eq = bne_indirect(scenario, W, nu)
    sol = _solution(scenario, "public", nu, eq.atoms, W, eq.y, 0, 0, info={"equilibrium_residual": eq.kkt_residual})
    return sol


def optimize_public(scenario, nu, m=None, starts=100, seed=0, threads=None):
    """Multistart local solution of the public design problem with ``m`` messages.

    Policy, message flows and non-participant flow are optimized jointly with
    the Bayes Nash conditions as constraints. The no-information and (when
    ``m >= s``) full-information policies with their equilibrium flows seed
    the search and stay in the candidate pool.
    """
    nu = float(nu)
    if not 0.0 <= nu <= 1.0:
        raise DesignError(f"participation rate must lie in [0, 1], got {nu}")
    s, n = scenario.n_states, scenario.n_routes
    m = s if m is None else int(m)
    if m < 1 or starts < 1:
        raise DesignError("need m >= 1 and starts >= 1")
    if nu == 0.0:
        return _zero_participation(scenario, "public", m, False, starts, seed)
    ev = GameEvaluator(scenario, nu, m, "public")
    cands = []
    base = [canonical_policy("no", s, m).weights]
    if m >= s:
        base.append(_pad(np.eye(s), m))
    for W in base:
        eq = bne_indirect(scenario, W, nu)
        cands.append(ev.pack(eq.atoms, W, eq.y))
    scale = 1.0 + float(ev.cost(cands[0][None])[0])
    if m == 1:
        X, W, y = ev.unpack(cands[0][None])
        return _solution(scenario, "public", nu, X[0], W[0], y[0], starts, seed, info={"winner": "no-information"})
    res = multistart(ev, starts, seed, cands, scale=scale, threads=threads)
    X, W, y = ev.unpack(res.z[None])
    info = {"winner": res.index, "feasible_starts": res.n_feasible, "candidates": len(cands)}
    return _solution(scenario, "public", nu, X[0], W[0], y[0], starts, seed, info)
