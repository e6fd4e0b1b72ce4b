"""Bayes Nash flows and the first-best benchmark as convex programs on simplices."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._game import GameEvaluator
from ._simplex import projected_gradient

GRAD_TOL = 1e-9
RESIDUAL_TOL = 1e-8
MAX_ITER = 200_000
REGULARIZATION = 1e-9


class EquilibriumError(RuntimeError):
    """Raised when a solve cannot start (bad inputs), never for slow convergence."""


@dataclass
class EquilibriumResult:
    """Participant flows per message/atom, the non-participant flow and diagnostics.

    ``kkt_residual`` is the largest flow-weighted latency gap
    ``f_i (l_i - l_j)`` over all segments; ``converged`` is true when it is
    within ``RESIDUAL_TOL``.
    """

    atoms: np.ndarray
    y: np.ndarray
    potential: float
    kkt_residual: float
    iterations: int
    converged: bool
    regularization: float = REGULARIZATION
    info: dict = field(default_factory=dict)

    @property
    def aggregates(self):
        return self.atoms + self.y[None, :]


def _check_nu(nu):
    nu = float(nu)
    if not 0.0 <= nu <= 1.0:
        raise EquilibriumError(f"participation rate must lie in [0, 1], got {nu}")
    return nu


def _segment_residual(flow, lat):
    """max_i flow_i * (lat_i - min_j lat_j) over the rows of ``flow``."""
    flow = np.where(np.abs(flow) < 1e-9, 0.0, flow)
    gap = lat - lat.min(axis=-1, keepdims=True)
    return float(np.max(flow * gap, initial=0.0))


def _solve_potential(ev, z0, tol, max_iter):
    """Regularised solve to select a minimiser, then an unregularised polish from it."""
    fg = lambda z: ev.potential_grad(z, REGULARIZATION)
    first = projected_gradient(fg, z0, ev.space, tol=tol, max_iter=max_iter)
    polish = projected_gradient(lambda z: ev.potential_grad(z), first.z, ev.space, tol=tol, max_iter=max_iter)
    return polish, int(first.iterations[0] + polish.iterations[0]), float(np.max(np.abs(polish.z - first.z)))


def _residual(ev, z, include_atoms):
    st = ev.state(z, need_slopes=False)
    Lam = st["Lam"][0]
    res = _segment_residual(st["y"][0], Lam.sum(axis=0))
    if include_atoms:
        for k in range(ev.m):
            if np.any(st["P"][0][:, k] > 0):
                res = max(res, _segment_residual(st["X"][0][k], Lam[k]))
    return res


def nonparticipant_flow(scenario, policy, nu, tol=GRAD_TOL, max_iter=MAX_ITER, y0=None):
    """Prior-based flow of the agents who receive no signal.

    ``policy`` carries ``atoms`` (m x n, on the participating simplex) and
    ``weights`` (s x m); it may be ``None`` when ``nu == 0``. The returned
    ``potential`` is the objective of the convex program in ``y`` alone,
    ``sum mu0 pi int_{x}^{x+y} l``.
    """
    nu = _check_nu(nu)
    n, T = scenario.n_routes, scenario.demand
    if policy is None:
        if nu > 0:
            raise EquilibriumError("a policy is required when nu > 0")
        atoms, weights = np.zeros((1, n)), np.ones((scenario.n_states, 1))
    else:
        atoms = np.asarray(policy.atoms, dtype=float)
        weights = np.asarray(policy.weights, dtype=float)
    if atoms.shape[1] != n or weights.shape != (scenario.n_states, atoms.shape[0]):
        raise EquilibriumError("policy dimensions do not match the scenario")
    m = atoms.shape[0]
    ev = GameEvaluator(scenario, nu, m, "private", fix_weights=True, fix_atoms=True)
    if y0 is None:
        y0 = np.full(n, (1.0 - nu) * T / n)
    z0 = ev.pack(atoms, weights, y0)
    if ev.y_mass == 0.0:
        z = z0[None]
        its, shift = 0, 0.0
    else:
        res, its, shift = _solve_potential(ev, z0, tol, max_iter)
        z = res.z
    X, W, y = ev.unpack(z)
    st = ev.state(z, need_slopes=False)
    base = ev.link_integrals(st["X"][0] @ ev.R.T)
    top = ev.link_integrals(st["F"][0] @ ev.R.T)
    pot = float(np.einsum("wk,kwe->", st["P"][0], top - base))
    kkt = _residual(ev, z, include_atoms=False)
    return EquilibriumResult(atoms, y[0].copy(), pot, kkt, its, kkt <= RESIDUAL_TOL, info={"selection_shift": shift})


def prior_equilibrium(scenario, tol=GRAD_TOL, max_iter=MAX_ITER):
    """Equilibrium when nobody receives a signal (nu = 0)."""
    return nonparticipant_flow(scenario, None, 0.0, tol=tol, max_iter=max_iter)


def bne_indirect(scenario, weights, nu, tol=GRAD_TOL, max_iter=MAX_ITER, start=None):
    """Bayes Nash flow induced by a public (indirect) policy.

    ``weights`` is the s x m message matrix or any object with a ``weights``
    attribute. Messages that are never sent carry the uniform participant
    flow and are left out of the solve. ``start`` optionally supplies an
    initial ``(atoms, y)`` pair.
    """
    nu = _check_nu(nu)
    W = np.asarray(getattr(weights, "weights", weights), dtype=float)
    s, n, T = scenario.n_states, scenario.n_routes, scenario.demand
    if W.ndim != 2 or W.shape[0] != s:
        raise EquilibriumError(f"weights must be {s} x m")
    if np.any(W < -1e-12) or np.any(np.abs(W.sum(axis=1) - 1.0) > 1e-9):
        raise EquilibriumError("weights must be row-stochastic")
    m = W.shape[1]
    sent = np.flatnonzero(W.max(axis=0) > 0)
    atoms = np.full((m, n), nu * T / n)
    y = np.full(n, (1.0 - nu) * T / n)
    if start is not None:
        atoms = np.array(start[0], dtype=float)
        y = np.array(start[1], dtype=float)
    ev = GameEvaluator(scenario, nu, sent.size, "public", fix_weights=True)
    z0 = ev.pack(atoms[sent], W[:, sent], y)
    res, its, shift = _solve_potential(ev, z0, tol, max_iter)
    X, _, yy = ev.unpack(res.z)
    atoms = np.full((m, n), nu * T / n)
    atoms[sent] = X[0]
    kkt = _residual(ev, res.z, include_atoms=True)
    return EquilibriumResult(atoms, yy[0].copy(), float(res.fun[0]), kkt, its, kkt <= RESIDUAL_TOL, info={"selection_shift": shift, "messages_sent": sent.tolist()})


@dataclass
class FirstBestResult:
    flows: np.ndarray
    state_costs: np.ndarray
    cost: float
    iterations: int
    converged: bool


def first_best(scenario, tol=GRAD_TOL, max_iter=MAX_ITER):
    """State-wise system optimum over the full demand, averaged under the prior."""
    s, n, T = scenario.n_states, scenario.n_routes, scenario.demand
    ev = GameEvaluator(scenario, 1.0, s, "private", fix_weights=True)
    z0 = ev.pack(np.full((s, n), T / n), np.eye(s), np.zeros(n))
    res = projected_gradient(lambda z: ev.cost_grad(z), z0, ev.space, tol=tol, max_iter=max_iter)
    flows = ev.unpack(res.z)[0][0]
    st = ev.state(res.z, need_slopes=False)
    state_costs = np.array([np.dot(flows[w], st["L"][0][w, w]) for w in range(s)])
    cost = float(np.dot(scenario.prior, state_costs))
    return FirstBestResult(flows, state_costs, cost, int(res.iterations[0]), bool(res.converged[0]))


def social_cost(scenario, atoms, weights, y):
    """Expected total latency of participant atoms, recommendation weights and ``y``."""
    atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
    weights = np.asarray(weights, dtype=float)
    y = np.asarray(y, dtype=float)
    s, n = scenario.n_states, scenario.n_routes
    if atoms.shape[1] != n or y.shape != (n,) or weights.shape != (s, atoms.shape[0]):
        raise ValueError("dimension mismatch between atoms, weights, y and the scenario")
    agg = atoms + y[None, :]
    lat = scenario.link_latencies(agg @ scenario.incidence.T)  # (m, s, E)
    per = np.einsum("ke,kwe->kw", agg @ scenario.incidence.T, lat)
    return float(np.einsum("w,wk,kw->", scenario.prior, weights, per))
