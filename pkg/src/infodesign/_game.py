"""Batched evaluation of the signaling game: cost, potential, obedience and Nash terms.

All functions act on stacks of points. A point holds ``m`` participant flow
atoms ``X`` (m x n), recommendation weights ``W`` (s x m) and a non-participant
flow ``y`` (n). Gradients are analytic; the test-suite checks them against
finite differences.
"""
from __future__ import annotations

import numpy as np

from ._simplex import Block, SimplexProduct


class GameEvaluator:
    """Evaluator for one scenario at fixed participation ``nu`` and atom count ``m``.

    ``kind`` selects how obedience is aggregated: ``"private"`` sums the
    flow-weighted latency gaps over atoms, ``"public"`` keeps one constraint
    per message.
    """

    def __init__(self, scenario, nu, m, kind="private", fix_weights=False, fix_atoms=False, fix_y=False):
        if kind not in ("private", "public"):
            raise ValueError(f"unknown kind {kind!r}")
        self.scenario = scenario
        self.nu = float(nu)
        self.m = int(m)
        self.kind = kind
        s, n = scenario.n_states, scenario.n_routes
        self.s, self.n = s, n
        T = scenario.demand
        self.x_mass = self.nu * T
        self.y_mass = (1.0 - self.nu) * T
        self.space = SimplexProduct([
            Block("X", self.m, n, self.x_mass, fixed=fix_atoms or self.x_mass == 0.0),
            Block("W", s, self.m, 1.0, fixed=fix_weights),
            Block("y", 1, n, self.y_mass, fixed=fix_y or self.y_mass == 0.0),
        ])
        self.R = scenario.incidence.astype(float)
        self.mu0 = np.asarray(scenario.prior, dtype=float)
        c = scenario.coefficients
        D = c.shape[-1] - 1
        self.coef = c
        self.dcoef = c[..., 1:] * np.arange(1, D + 1)
        self.icoef = c / np.arange(1, D + 2)
        self.D = D
        self.n_obedience = (self.m if kind == "public" else 1) * n * n
        self.n_constraints = self.n_obedience + n * n

    # -- packing ---------------------------------------------------------

    def pack(self, X, W, y):
        X = np.asarray(X, dtype=float)
        W = np.asarray(W, dtype=float)
        y = np.asarray(y, dtype=float)
        batched = X.ndim == 3
        if not batched:
            X, W, y = X[None], W[None], y[None]
        z = self.space.join({"X": X, "W": W, "y": y[:, None, :]})
        return z if batched else z[0]

    def unpack(self, z):
        p = self.space.split(np.atleast_2d(z))
        return p["X"], p["W"], p["y"][:, 0, :]

    # -- core ------------------------------------------------------------

    def state(self, z, need_slopes=True):
        X, W, y = self.unpack(z)
        F = X + y[:, None, :]
        Ft = F @ self.R.T
        pw = Ft[..., None] ** np.arange(self.D + 1)
        lat = np.einsum("bked,wed->bkwe", pw, self.coef)
        L = np.einsum("bkwe,ei->bkwi", lat, self.R)
        P = self.mu0[None, :, None] * W
        Lam = np.einsum("bwk,bkwi->bki", P, L)
        st = {"X": X, "W": W, "y": y, "F": F, "Ft": Ft, "pw": pw, "L": L, "P": P, "Lam": Lam}
        if need_slopes:
            if self.D >= 1:
                dlat = np.einsum("bked,wed->bkwe", pw[..., :-1], self.dcoef)
            else:
                dlat = np.zeros_like(lat)
            st["A"] = np.einsum("bwk,bkwe->bke", P, dlat)
        return st

    def _channel(self, st, E):
        """Pull weights ``E`` on the expected route latencies back to (dF, dW)."""
        ER = np.einsum("bki,ei->bke", E, self.R)
        gF = np.einsum("bke,ei->bki", st["A"] * ER, self.R)
        gW = self.mu0[None, :, None] * np.einsum("bkwi,bki->bwk", st["L"], E)
        return gF, gW

    def _assemble(self, gF, gW, gX_direct=None, gy_direct=None):
        gX = gF if gX_direct is None else gF + gX_direct
        gy = gF.sum(axis=1)
        if gy_direct is not None:
            gy = gy + gy_direct
        g = self.space.join({"X": gX, "W": gW, "y": gy[:, None, :]})
        return np.where(self.space.free, g, 0.0)

    # -- objective -------------------------------------------------------

    def cost(self, z):
        st = self.state(z, need_slopes=False)
        return np.sum(st["F"] * st["Lam"], axis=(1, 2))

    def cost_grad(self, z, st=None):
        st = self.state(z) if st is None else st
        f = np.sum(st["F"] * st["Lam"], axis=(1, 2))
        gF, gW = self._channel(st, st["F"])
        return f, self._assemble(gF + st["Lam"], gW)

    # -- potential (equilibrium) ----------------------------------------

    def potential_grad(self, z, reg=0.0):
        """Joint Bayes Nash potential and its gradient (the expected route latencies)."""
        st = self.state(z, need_slopes=False)
        Ft = st["Ft"]
        ipw = Ft[..., None] * st["pw"]
        integ = np.einsum("bked,wed->bkwe", ipw, self.icoef)
        f = np.einsum("bwk,bkwe->b", st["P"], integ)
        Lam = st["Lam"]
        gW = self.mu0[None, :, None] * np.einsum("bkwe->bwk", integ)
        g = self.space.join({"X": Lam, "W": gW, "y": Lam.sum(axis=1)[:, None, :]})
        if reg:
            f = f + reg * np.sum(z * z, axis=1)
            g = g + 2.0 * reg * z
        return f, np.where(self.space.free, g, 0.0)

    def link_integrals(self, Ft):
        ipw = Ft[..., None] * Ft[..., None] ** np.arange(self.D + 1)
        return np.einsum("...ed,wed->...we", ipw, self.icoef)

    # -- constraints -----------------------------------------------------

    def constraints(self, z, st=None):
        st = self.state(z, need_slopes=False) if st is None else st
        return np.concatenate([self.obedience(st).reshape(len(st["X"]), -1), self.nash(st).reshape(len(st["X"]), -1)], axis=1)

    def obedience(self, st):
        X, Lam = st["X"], st["Lam"]
        if self.kind == "public":
            return X[..., :, None] * (Lam[..., :, None] - Lam[..., None, :])
        a = np.sum(X * Lam, axis=1)
        return a[:, :, None] - np.einsum("bki,bkj->bij", X, Lam)

    def nash(self, st):
        y = st["y"]
        S = st["Lam"].sum(axis=1)
        return y[:, :, None] * (S[:, :, None] - S[:, None, :])

    def constraints_vjp(self, st, w):
        """Gradient of ``sum(w * constraints)`` for nonnegative weights ``w``."""
        B = len(st["X"])
        n, m = self.n, self.m
        u = w[:, : self.n_obedience]
        v = w[:, self.n_obedience:].reshape(B, n, n)
        if self.kind == "public":
            u = u.reshape(B, m, n, n)
        else:
            u = np.broadcast_to(u.reshape(B, 1, n, n), (B, m, n, n))
        X, y, Lam = st["X"], st["y"], st["Lam"]
        U = u.sum(axis=-1)
        e = X * U - np.einsum("bkir,bki->bkr", u, X)
        V = v.sum(axis=-1)
        d = y * V - np.einsum("bir,bi->br", v, y)
        e = e + d[:, None, :]
        gX = Lam * U - np.einsum("bkij,bkj->bki", u, Lam)
        S = Lam.sum(axis=1)
        gy = S * V - np.einsum("bij,bj->bi", v, S)
        gF, gW = self._channel(st, e)
        return self._assemble(gF, gW, gX, gy)
