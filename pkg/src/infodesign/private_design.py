"""Atomic and diagonal private signaling policies: residuals, posteriors and design."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from ._game import GameEvaluator
from ._multistart import feasible_mask, multistart
from .equilibrium import nonparticipant_flow, prior_equilibrium, social_cost

ROW_TOL = 1e-9
SUPPORT_TOL = 1e-9


class DesignError(ValueError):
    pass


@dataclass(frozen=True)
class AtomicPrivatePolicy:
    """``m`` participant flow atoms and the s x m recommendation weights ``pi(k|w)``."""

    atoms: np.ndarray
    weights: np.ndarray
    nu: float

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        weights = np.atleast_2d(np.asarray(self.weights, dtype=float))
        if weights.shape[1] != atoms.shape[0]:
            raise DesignError(f"weights have {weights.shape[1]} columns but there are {atoms.shape[0]} atoms")
        if np.any(weights < -ROW_TOL) or np.any(np.abs(weights.sum(axis=1) - 1.0) > ROW_TOL):
            raise DesignError("weights must be row-stochastic")
        if not 0.0 <= float(self.nu) <= 1.0:
            raise DesignError(f"participation rate must lie in [0, 1], got {self.nu}")
        if np.any(atoms < -ROW_TOL):
            raise DesignError("atoms must be nonnegative")
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "nu", float(self.nu))

    @property
    def m(self):
        return self.atoms.shape[0]

    @property
    def is_diagonal(self):
        s = self.weights.shape[0]
        return self.m == s and np.array_equal(self.weights, np.eye(s))

    def check_masses(self, demand, tol=ROW_TOL * 10):
        target = self.nu * demand
        err = np.abs(self.atoms.sum(axis=1) - target)
        if np.any(err > tol * max(1.0, demand)):
            raise DesignError(f"atoms must each carry mass {target}")


@dataclass
class DesignSolution:
    """Best policy found by a designer together with its certificate data.

    ``atoms`` are the participant flows (per atom for private policies, per
    message for public ones) and ``weights`` the matching s x m matrix.
    """

    mode: str
    nu: float
    atoms: np.ndarray
    weights: np.ndarray
    y: np.ndarray
    cost: float
    max_obedience_residual: float
    max_nash_residual: float
    feasible: bool
    starts_used: int
    seed: int
    lower_bound: float | None = None
    gap: float | None = None
    info: dict = field(default_factory=dict)

    @property
    def m(self):
        return self.atoms.shape[0]

    @property
    def policy(self):
        if self.mode == "public":
            from .public_design import PublicPolicy

            return PublicPolicy(self.weights)
        return AtomicPrivatePolicy(self.atoms, self.weights, self.nu)

    def certify_with(self, lower_bound):
        self.lower_bound = float(lower_bound)
        self.gap = self.cost - self.lower_bound
        return self


def _check_dims(scenario, atoms, weights, y):
    s, n = scenario.n_states, scenario.n_routes
    if atoms.ndim != 2 or atoms.shape[1] != n:
        raise DesignError(f"atoms must be m x {n}")
    if weights.shape != (s, atoms.shape[0]):
        raise DesignError(f"weights must be {s} x {atoms.shape[0]}")
    if y.shape != (n,):
        raise DesignError(f"y must have {n} entries")


def _clip_support(a):
    return np.where(np.abs(a) < SUPPORT_TOL, 0.0, a)


def obedience_residuals(scenario, policy, y):
    """Obedience and Nash residual matrices of a private policy.

    Entry (i, j) of the first matrix is the expected latency gain, weighted by
    the flow recommended route ``i``, of following ``i`` instead of ``j``;
    entry (i, j) of the second is the same quantity for non-participants on
    ``i``. Both must be nonpositive. Flows below ``SUPPORT_TOL`` count as zero.
    """
    atoms = np.atleast_2d(np.asarray(policy.atoms, dtype=float))
    weights = np.asarray(policy.weights, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_dims(scenario, atoms, weights, y)
    ev = GameEvaluator(scenario, policy.nu, atoms.shape[0], "private")
    st = ev.state(ev.pack(atoms, weights, y)[None], need_slopes=False)
    st = dict(st, X=_clip_support(st["X"]), y=_clip_support(st["y"]))
    return ev.obedience(st)[0], ev.nash(st)[0]


@dataclass
class PosteriorTable:
    """Beliefs over (atom, state) pairs.

    ``recommended[i]`` is an m x s array for agents told to take route ``i``
    (``None`` when route ``i`` is never recommended); ``nonrecipient`` is the
    m x s belief of agents who receive nothing.
    """

    recommended: list
    nonrecipient: np.ndarray

    @property
    def never_recommended(self):
        return [i for i, r in enumerate(self.recommended) if r is None]

    def state_marginal(self, i):
        r = self.recommended[i]
        return None if r is None else r.sum(axis=0)


def posteriors(scenario, policy):
    atoms = np.atleast_2d(np.asarray(policy.atoms, dtype=float))
    weights = np.asarray(policy.weights, dtype=float)
    s, n = scenario.n_states, scenario.n_routes
    if atoms.shape[1] != n or weights.shape != (s, atoms.shape[0]):
        raise DesignError("policy dimensions do not match the scenario")
    joint = weights.T * np.asarray(scenario.prior)[None, :]  # (m, s)
    rec = []
    for i in range(n):
        un = atoms[:, i][:, None] * joint
        z = un.sum()
        rec.append(un / z if z > SUPPORT_TOL else None)
    return PosteriorTable(rec, joint / joint.sum())


def atom_bound(s, n, D):
    """Number of atoms that always suffices for an optimal private policy."""
    if s < 1 or n < 1 or D < 0:
        raise DesignError("need s >= 1, n >= 1 and D >= 0")
    return s * comb(D + n, D + 1)


def no_information_policy(scenario, nu, m=1, diagonal=False):
    """Everybody follows the prior equilibrium split; feasible for every ``nu``."""
    q = prior_equilibrium(scenario).y
    T = scenario.demand
    s = scenario.n_states
    share = q / T
    atoms = np.tile(nu * T * share, (m, 1))
    weights = np.eye(s) if diagonal else np.full((s, m), 1.0 / m)
    return AtomicPrivatePolicy(atoms, weights, nu), (1.0 - nu) * T * share


def _solution(scenario, mode, nu, atoms, weights, y, starts, seed, info=None):
    atoms = np.asarray(atoms, dtype=float)
    weights = np.asarray(weights, dtype=float)
    y = np.asarray(y, dtype=float)
    cost = social_cost(scenario, atoms, weights, y)
    if mode == "public":
        from .public_design import PublicPolicy, public_residuals

        ob, na = public_residuals(scenario, PublicPolicy(weights), atoms, y)
    else:
        ob, na = obedience_residuals(scenario, AtomicPrivatePolicy(atoms, weights, nu), y)
    ob = float(np.max(ob, initial=0.0))
    na = float(np.max(na, initial=0.0))
    ok = bool(feasible_mask(np.array(cost), np.array(ob), np.array(na)))
    return DesignSolution(mode, float(nu), atoms, weights, y, cost, ob, na, ok, starts, seed, info=info or {})


def _zero_participation(scenario, mode, m, diagonal, starts, seed):
    n, s = scenario.n_routes, scenario.n_states
    eq = prior_equilibrium(scenario)
    weights = np.eye(s) if diagonal else np.tile(np.eye(1, m), (s, 1))
    return _solution(scenario, mode, 0.0, np.zeros((m, n)), weights, eq.y, starts, seed, info={"degenerate": "nu=0"})


def optimize_private(scenario, nu, m=None, starts=100, seed=0, diagonal=False, fixed_y=None,
                     warm_starts=(), threads=None):
    """Multistart local solution of the atomic private design problem.

    ``m`` defaults to the number of states. With ``diagonal`` the weights are
    pinned to the identity (so ``m = s``). ``fixed_y`` pins the
    non-participant flow, dropping the Nash constraints from the search.
    ``warm_starts`` is a sequence of ``(atoms, weights, y)`` triples that are
    tried in addition to the random starts.
    """
    nu = float(nu)
    if not 0.0 <= nu <= 1.0:
        raise DesignError(f"participation rate must lie in [0, 1], got {nu}")
    s, n, T = scenario.n_states, scenario.n_routes, scenario.demand
    if diagonal:
        m = s
    m = s if m is None else int(m)
    if m < 1 or starts < 1:
        raise DesignError("need m >= 1 and starts >= 1")
    mode = "diagonal" if diagonal else "private"
    if nu == 0.0 and fixed_y is None:
        return _zero_participation(scenario, mode, m, diagonal, starts, seed)
    noinfo, y_noinfo = no_information_policy(scenario, nu, m, diagonal)
    if fixed_y is not None:
        fixed_y = np.asarray(fixed_y, dtype=float)
        if fixed_y.shape != (n,) or abs(fixed_y.sum() - (1 - nu) * T) > 1e-8 * max(1.0, T) or np.any(fixed_y < 0):
            raise DesignError("fixed_y must lie on the non-participant simplex")
    ev = GameEvaluator(scenario, nu, m, "private", fix_weights=diagonal, fix_y=fixed_y is not None)
    y_start = y_noinfo if fixed_y is None else fixed_y
    cands = [ev.pack(noinfo.atoms, noinfo.weights, y_start)]
    for a, w, yy in warm_starts:
        a = np.atleast_2d(np.asarray(a, dtype=float))
        w = np.asarray(w, dtype=float)
        if a.shape != (m, n) or w.shape != (s, m):
            continue
        if diagonal and not np.array_equal(w, np.eye(s)):
            continue
        cands.append(ev.pack(a, w, yy if fixed_y is None else fixed_y))

    def reweight(z):
        parts = ev.space.split(z)
        if diagonal:
            parts["W"][:] = np.eye(s)
        if fixed_y is not None:
            parts["y"][:] = fixed_y
        return ev.space.join(parts)

    scale = 1.0 + social_cost(scenario, noinfo.atoms, noinfo.weights, y_noinfo)
    res = multistart(ev, starts, seed, cands, scale=scale, threads=threads, reweight=reweight)
    X, W, y = ev.unpack(res.z[None])
    W = np.eye(s) if diagonal else W[0]
    info = {"winner": res.index, "feasible_starts": res.n_feasible, "candidates": len(cands)}
    sol = _solution(scenario, mode, nu, X[0], W, y[0], starts, seed, info)
    return sol


def optimize_diagonal(scenario, nu, starts=100, seed=0, warm_starts=(), threads=None):
    """Private design restricted to one atom per state with identity weights."""
    return optimize_private(scenario, nu, starts=starts, seed=seed, diagonal=True, warm_starts=warm_starts, threads=threads)


def lift_public_to_private(scenario, solution=None, *, weights=None, atoms=None, y=None, nu=None, tol=None):
    """Private policy that recommends the public-message flows with the same weights.

    Accepts a public ``DesignSolution`` or explicit ``weights``, ``atoms``,
    ``y`` and ``nu``. Raises when the input flows are not a Bayes Nash flow of
    the public policy (residual above ``tol``, default 1e-6 (1 + cost)).
    """
    if solution is not None:
        weights, atoms, y, nu = solution.weights, solution.atoms, solution.y, solution.nu
    from .public_design import PublicPolicy, public_residuals

    atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
    weights = np.asarray(weights, dtype=float)
    y = np.asarray(y, dtype=float)
    ob, na = public_residuals(scenario, PublicPolicy(weights), atoms, y)
    cost = social_cost(scenario, atoms, weights, y)
    lim = 1e-6 * (1.0 + abs(cost)) if tol is None else tol
    if max(ob.max(initial=0.0), na.max(initial=0.0)) > lim:
        raise DesignError("input flows are not an equilibrium of the public policy")
    if nu is None:
        nu = float(atoms[0].sum() / scenario.demand)
    return AtomicPrivatePolicy(atoms, weights, nu), y.copy()


def extend_policy(scenario, policy, y, nu2, eps=None):
    """Carry a policy at participation ``policy.nu`` to ``nu2 >= policy.nu``.

    Each atom absorbs ``eps (nu2 - nu1) T`` of the non-participant flow, with
    ``eps = y / ((1 - nu1) T)`` by default, so every aggregate ``x + y`` is
    unchanged. The new ``y`` is snapped down to a multiple of the coarsest ulp
    in its aggregate column, so aggregate minus ``y`` is exact and the
    aggregates are reproduced bit for bit.
    """
    nu1 = float(policy.nu)
    nu2 = float(nu2)
    y = np.asarray(y, dtype=float)
    T = scenario.demand
    if nu2 < nu1:
        raise DesignError("extension only moves to larger participation")
    if nu2 > 1.0:
        raise DesignError("participation rate cannot exceed 1")
    if nu2 == nu1:
        return policy, y.copy()
    if nu1 >= 1.0:
        raise DesignError("cannot extend from full participation")
    if eps is None:
        eps = y / ((1.0 - nu1) * T)
    eps = np.asarray(eps, dtype=float)
    shift = eps * (nu2 - nu1) * T
    if np.any(shift > y + 1e-12):
        raise DesignError("eps moves more non-participant flow than available")
    agg = policy.atoms + y[None, :]
    q = np.spacing(agg.max(axis=0))
    y2 = np.floor(np.maximum(y - shift, 0.0) / q) * q
    atoms2 = agg - y2[None, :]
    return AtomicPrivatePolicy(atoms2, policy.weights, nu2), y2


def sweep_nu(scenario, grid, mode="diagonal", m=None, starts=100, seed=0, threads=None):
    """Design solutions across participation rates (sorted ascending).

    In diagonal mode each point also tries the extension of the previous
    point's solution and keeps the cheaper feasible one, so the reported
    costs never increase with ``nu``. Public mode delegates to
    :func:`infodesign.public_design.optimize_public`.
    """
    grid = sorted(float(v) for v in grid)
    if any(v < 0 or v > 1 for v in grid):
        raise DesignError("grid must lie in [0, 1]")
    out = []
    prev = None
    for nu in grid:
        try:
            if mode == "public":
                from .public_design import optimize_public

                sol = optimize_public(scenario, nu, m=m, starts=starts, seed=seed, threads=threads)
            else:
                warm = []
                ext = None
                if prev is not None and prev.feasible and mode in ("diagonal", "private") and prev.nu < 1.0:
                    pol, y2 = extend_policy(scenario, prev.policy, prev.y, nu)
                    ext = _solution(scenario, prev.mode, nu, pol.atoms, pol.weights, y2, starts, seed,
                                    info={"extended_from": prev.nu})
                    warm.append((pol.atoms, pol.weights, y2))
                if mode == "diagonal":
                    sol = optimize_diagonal(scenario, nu, starts=starts, seed=seed, warm_starts=warm, threads=threads)
                elif mode == "private":
                    sol = optimize_private(scenario, nu, m=m, starts=starts, seed=seed, warm_starts=warm, threads=threads)
                else:
                    raise DesignError(f"unknown mode {mode!r}")
                if mode == "diagonal" and ext is not None and ext.feasible and ext.cost <= sol.cost:
                    sol = ext
        except DesignError:
            raise
        except Exception as exc:  # annotate and keep sweeping
            sol = DesignSolution(mode, nu, np.zeros((0, scenario.n_routes)), np.zeros((scenario.n_states, 0)),
                                 np.zeros(scenario.n_routes), float("nan"), float("nan"), float("nan"), False,
                                 starts, seed, info={"error": repr(exc)})
        out.append(sol)
        if sol.feasible:
            prev = sol
    return out
