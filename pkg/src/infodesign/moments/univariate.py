"""Exact SDP for two-route design with fixed non-participant flow.

With two routes the participant flow is ``x = nu T (t, 1 - t)`` for a scalar
``t`` in [0, 1], so a per-state recommendation distribution is a measure on
the unit interval. Its moments up to degree ``d = D + 1`` are characterised
by two Hankel-type PSD conditions (truncated Hausdorff moment problem):

* ``d = 2k``: ``[eta_{i+j}]_{0..k} >= 0`` and ``[eta_{i+j+1} - eta_{i+j+2}]_{0..k-1} >= 0``
* ``d = 2k+1``: ``[eta_{i+j+1}]_{0..k} >= 0`` and ``[eta_{i+j} - eta_{i+j+1}]_{0..k} >= 0``
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from cvxopt import matrix as cvxmatrix
from cvxopt import solvers

from .builders import _route_latencies
from .polynomial import Poly
from .program import MomentError
from .solver import GAP_TOL, MAX_ITER, SdpInfeasibleError


@dataclass
class UnivariateResult:
    value: float
    moments: np.ndarray  # (s, D + 2): E[x_1^d] per state
    unit_moments: np.ndarray  # (s, D + 2): E[t^d] per state
    gap: float
    relative_gap: float
    status: str
    nu: float
    y: np.ndarray


def _hankel_blocks(d):
    """Each PSD block as a list over entries (p, q) of {moment index: coefficient}."""
    blocks = []
    if d % 2 == 0:
        k = d // 2
        blocks.append([[{p + q: 1.0} for q in range(k + 1)] for p in range(k + 1)])
        if k >= 1:
            blocks.append([[{p + q + 1: 1.0, p + q + 2: -1.0} for q in range(k)] for p in range(k)])
    else:
        k = (d - 1) // 2
        blocks.append([[{p + q + 1: 1.0} for q in range(k + 1)] for p in range(k + 1)])
        blocks.append([[{p + q: 1.0, p + q + 1: -1.0} for q in range(k + 1)] for p in range(k + 1)])
    return blocks


def _coeffs(poly, d):
    out = np.zeros(d + 1)
    for (e,), v in poly.terms.items():
        out[e] += v
    return out


def two_link_univariate_sdp(scenario, y, nu=None, gap_tol=GAP_TOL, max_iter=MAX_ITER):
    """Optimal private design cost for fixed ``y`` on a two-route network.

    Returns the value and, per state, the moments of the participant flow on
    route 1. The value is exact (the moment conditions are necessary and
    sufficient), so it equals the best cost of any private policy with this
    ``y``.
    """
    if scenario.n_routes != 2:
        raise MomentError(f"the univariate SDP needs exactly two routes, got {scenario.n_routes}")
    s, T, D = scenario.n_states, scenario.demand, scenario.degree
    y = np.asarray(y, dtype=float)
    if y.shape != (2,) or np.any(y < -1e-12):
        raise MomentError("y must be a nonnegative vector of length 2")
    if nu is None:
        nu = 1.0 - y.sum() / T
    nu = float(nu)
    if not 0.0 <= nu <= 1.0 or abs(y.sum() - (1.0 - nu) * T) > 1e-8 * max(1.0, T):
        raise MomentError("y must carry the non-participant mass (1 - nu) T with nu in [0, 1]")
    d = D + 1
    mu0 = np.asarray(scenario.prior)
    t = Poly.var(1, 0)
    X = [t * (nu * T), Poly.const(1, nu * T) - t * (nu * T)]
    Yc = [Poly.const(1, v) for v in y]
    cost = np.zeros((s, d + 1))
    obed = np.zeros((2, 2, s, d + 1))
    nash = np.zeros((2, 2, s, d + 1))
    for k in range(s):
        routes, flows, link_lat = _route_latencies(scenario, k, X, Yc)
        c = Poly.const(1, 0.0)
        for f, l in zip(flows, link_lat):
            c = c + f * l
        cost[k] = mu0[k] * _coeffs(c, d)
        for i in range(2):
            for j in range(2):
                gap = routes[j] - routes[i]
                obed[i, j, k] = mu0[k] * _coeffs(X[i] * gap, d)
                nash[i, j, k] = mu0[k] * y[i] * _coeffs(gap, d)
    unit = np.zeros((s, d + 1))
    unit[:, 0] = 1.0
    if nu == 0.0:
        value = float(cost[:, 0].sum())
        for i in range(2):
            for j in range(2):
                if nash[i, j, :, 0].sum() < -1e-8 * (1.0 + abs(value)):
                    raise SdpInfeasibleError("the fixed non-participant flow is not an equilibrium")
        return UnivariateResult(value, unit.copy(), unit, 0.0, 0.0, "optimal", nu, y)
    # variables: eta_w^1..eta_w^d for each state, laid out state-major
    nv = s * d

    def col(k, e):
        return k * d + e - 1

    def row(coefs):
        """Linear form sum_w <coefs[w], eta_w> split into (vector, constant)."""
        a = np.zeros(nv)
        c0 = 0.0
        for k in range(s):
            c0 += coefs[k, 0]
            for e in range(1, d + 1):
                a[col(k, e)] += coefs[k, e]
        return a, c0

    c_vec, c0 = row(cost)
    cs = max(1.0, float(np.max(np.abs(c_vec))))
    Gl, hl = [], []
    for table in (obed, nash):
        for i in range(2):
            for j in range(2):
                if i == j:
                    continue
                a, k0 = row(table[i, j])
                nrm = max(float(np.max(np.abs(a))), abs(k0))
                if nrm > 0:
                    Gl.append(-a / nrm)
                    hl.append(k0 / nrm)
    Gs, hs, dims = [], [], []
    for k in range(s):
        for blk in _hankel_blocks(d):
            m = len(blk)
            G = np.zeros((m * m, nv))
            h = np.zeros(m * m)
            for p in range(m):
                for q in range(m):
                    r = q * m + p
                    for e, w in blk[p][q].items():
                        if e == 0:
                            h[r] += w
                        else:
                            G[r, col(k, e)] -= w
            Gs.append(G)
            hs.append(h)
            dims.append(m)
    G = np.vstack([np.array(Gl).reshape(-1, nv)] + Gs)
    h = np.concatenate([np.array(hl)] + hs)
    opts = {"show_progress": False, "maxiters": int(max_iter), "abstol": gap_tol * 1e-2,
            "reltol": gap_tol, "feastol": 1e-10, "refinement": 2}
    sol = solvers.conelp(cvxmatrix(c_vec / cs), cvxmatrix(G), cvxmatrix(h),
                         {"l": len(hl), "q": [], "s": dims}, options=opts)
    if sol["status"] == "primal infeasible":
        raise SdpInfeasibleError("no private policy is feasible with this non-participant flow")
    v = np.array(sol["x"]).ravel()
    value = float(c_vec @ v + c0)
    unit[:, 1:] = v.reshape(s, d)
    moments = unit * (nu * T) ** np.arange(d + 1)
    gap = abs(float(sol["gap"])) * cs if sol["gap"] is not None else np.nan
    rel = sol["relative gap"]
    rel = abs(float(rel)) if rel is not None else gap / max(1.0, abs(value))
    return UnivariateResult(value, moments, unit, gap, rel, sol["status"], nu, y)
