"""Solve moment programs with a primal-dual interior-point method (cvxopt's conelp).

The unknowns are the moments of each block other than the unit mass. Moments
of degree ``d`` are divided by ``max(1, T)**d`` before solving, which keeps
BPR-type programs (moments up to T**6) well scaled; since this is a diagonal
congruence of every moment and localizing matrix, PSD conditions are
unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from cvxopt import matrix as cvxmatrix
from cvxopt import solvers

from .polynomial import monomials
from .program import MomentError
from .rank import check_rank1

GAP_TOL = 1e-8
MAX_ITER = 200


class SdpInfeasibleError(MomentError):
    """The program has no feasible moment matrix."""


@dataclass
class SdpResult:
    value: float
    moments: dict
    matrices: dict
    gap: float
    relative_gap: float
    status: str
    primal_residual: float
    dual_residual: float
    iterations: int
    tms: object = None
    info: dict = field(default_factory=dict)

    @property
    def M(self):
        """The moment matrix when there is a single block, else the dict of blocks."""
        if len(self.matrices) == 1:
            return next(iter(self.matrices.values()))
        return self.matrices


class _Layout:
    """Variable numbering: one column per (block, nonzero exponent)."""

    def __init__(self, program):
        self.index = {}
        self.degree = []
        for b in program.blocks:
            for e in b.moment_exponents():
                if sum(e) and (b.name, e) not in self.index:
                    self.index[(b.name, e)] = len(self.degree)
                    self.degree.append(sum(e))
        self.size = len(self.degree)
        T = float(program.meta.get("demand", 1.0))
        self.base = max(1.0, T)
        self.scale = self.base ** np.asarray(self.degree, dtype=float)

    def linear(self, block, Q):
        """Row ``a`` and constant ``c`` with ``<Q, M_b> = a @ v + c`` in scaled moments ``v``."""
        a = np.zeros(self.size)
        c = 0.0
        for p, q in zip(*np.nonzero(Q)):
            e = block.entry_exponent(p, q)
            if sum(e):
                j = self.index[(block.name, e)]
                a[j] += Q[p, q] * self.scale[j]
            else:
                c += Q[p, q]
        return a, c


def _psd_rows(layout, block, basis, weights):
    """``-G`` columns and ``h`` for the scaled matrix ``sum_g w_g y_{b_p + b_q + g}``."""
    d = len(basis)
    G = np.zeros((d * d, layout.size))
    h = np.zeros(d * d)
    for p in range(d):
        for q in range(d):
            r = q * d + p  # column-major
            for g, w in weights.items():
                e = tuple(a + b + c for a, b, c in zip(basis[p], basis[q], g))
                # after the congruence only the multiplier's own degree is left
                wv = w * layout.base ** sum(g)
                if sum(e):
                    j = layout.index.get((block.name, e))
                    if j is None:
                        raise MomentError(f"moment {e} is outside block {block.name}")
                    G[r, j] -= wv
                else:
                    h[r] += wv
    return G, h


def _reduce_equalities(A, b):
    if A.shape[0] == 0:
        return A, b
    U, S, Vt = np.linalg.svd(A, full_matrices=False)
    tol = max(A.shape) * np.finfo(float).eps * S[0] * 1e3
    r = int(np.sum(S > tol))
    Ur = U[:, :r]
    resid = b - Ur @ (Ur.T @ b)
    if np.linalg.norm(resid) > 1e-9 * (1.0 + np.linalg.norm(b)):
        raise SdpInfeasibleError("equality constraints are inconsistent")
    return Vt[:r], (Ur.T @ b) / S[:r]


def _assemble(program):
    lay = _Layout(program)
    # objective
    c = np.zeros(lay.size)
    c0 = 0.0
    for name, Q in program.objective.items():
        a, k = lay.linear(program.block(name), Q)
        c += a
        c0 += k
    cs = max(1.0, float(np.max(np.abs(c))))
    lin_G, lin_h, eq_A, eq_b = [], [], [], []
    for con in program.constraints:
        a = np.zeros(lay.size)
        k = 0.0
        for name, Q in con.matrices.items():
            ai, ki = lay.linear(program.block(name), Q)
            a += ai
            k += ki
        k -= con.rhs
        nrm = max(float(np.max(np.abs(a), initial=0.0)), abs(k))
        if nrm == 0.0:
            continue
        a, k = a / nrm, k / nrm
        if con.sense == "==":
            eq_A.append(a)
            eq_b.append(-k)
        elif con.sense == ">=":
            lin_G.append(-a)
            lin_h.append(k)
        else:
            raise MomentError(f"unknown constraint sense {con.sense!r}")
    if program.nonnegative:
        lin_G.extend(-np.eye(lay.size))
        lin_h.extend(np.zeros(lay.size))
    blocks_G, blocks_h, dims_s = [], [], []
    for b in program.blocks:
        Gb, hb = _psd_rows(lay, b, b.basis, {(0,) * b.nvars: 1.0})
        blocks_G.append(Gb)
        blocks_h.append(hb)
        dims_s.append(b.dimension)
    for loc in program.localizing:
        b = program.block(loc.block)
        basis = monomials(b.nvars, loc.order)
        # scale the localizing polynomial to unit size
        w = dict(loc.poly.terms)
        wmax = max(abs(v) * lay.base ** sum(e) for e, v in w.items())
        w = {e: v / wmax for e, v in w.items()}
        Gb, hb = _psd_rows(lay, b, basis, w)
        blocks_G.append(Gb)
        blocks_h.append(hb)
        dims_s.append(len(basis))
    A = np.array(eq_A).reshape(-1, lay.size)
    bvec = np.array(eq_b)
    A, bvec = _reduce_equalities(A, bvec)
    G = np.vstack([np.array(lin_G).reshape(-1, lay.size)] + blocks_G)
    h = np.concatenate([np.array(lin_h)] + blocks_h)
    return lay, c / cs, cs, c0, G, h, A, bvec, {"l": len(lin_h), "q": [], "s": dims_s}


def solve_moment_sdp(program, gap_tol=GAP_TOL, max_iter=MAX_ITER, check=True):
    """Minimise the program; raises SdpInfeasibleError on an infeasibility certificate.

    The result carries the optimal value, the moment matrices, the duality
    gap and, when ``check`` is set, the rank-one verdict for the blocks.
    """
    lay, c, cs, c0, G, h, A, b, dims = _assemble(program)
    opts = {"show_progress": False, "maxiters": int(max_iter), "abstol": gap_tol * 1e-2,
            "reltol": gap_tol, "feastol": 1e-10, "refinement": 2}
    args = dict(c=cvxmatrix(c), G=cvxmatrix(G), h=cvxmatrix(h), dims=dims, options=opts)
    if A.shape[0]:
        args.update(A=cvxmatrix(A), b=cvxmatrix(b))
    try:
        sol = solvers.conelp(**args)
    except (ArithmeticError, ValueError) as exc:
        raise MomentError(f"interior-point solve failed: {exc}") from exc
    status = sol["status"]
    if status == "primal infeasible":
        raise SdpInfeasibleError("moment program is infeasible (primal infeasibility certificate)")
    if status == "dual infeasible":
        raise MomentError("moment program is unbounded below")
    v = np.array(sol["x"]).ravel()
    u = v * lay.scale
    value = float(cs * (c @ v) + c0)
    moments, mats = {}, {}
    for blk in program.blocks:
        mom = {(0,) * blk.nvars: 1.0}
        for (name, e), j in lay.index.items():
            if name == blk.name:
                mom[e] = float(u[j])
        moments[blk.name] = mom
        d = blk.dimension
        M = np.empty((d, d))
        for p in range(d):
            for q in range(d):
                M[p, q] = mom[blk.entry_exponent(p, q)]
        mats[blk.name] = M
    gap = abs(float(sol["gap"])) * cs if sol["gap"] is not None else np.nan
    rel = sol["relative gap"]
    rel = abs(float(rel)) if rel is not None else gap / max(1.0, abs(value))
    res = SdpResult(
        value=value,
        moments=moments,
        matrices=mats,
        gap=gap,
        relative_gap=rel,
        status=status,
        primal_residual=float(sol["primal infeasibility"] or 0.0),
        dual_residual=float(sol["dual infeasibility"] or 0.0),
        iterations=int(sol["iterations"]),
        info={"variables": lay.size, "equalities": int(A.shape[0]), "dims": dims},
    )
    if check:
        res.tms = _rank_checks(program, mats)
    return res


def _rank_checks(program, mats):
    meta = program.meta
    kind = meta.get("kind")
    nu, T = meta.get("nu"), meta.get("demand")
    if kind == "diagonal":
        b = program.blocks[0]
        N = b.nvars
        groups = [(list(idx), mass) for _, idx, mass in meta["groups"]]
        return check_rank1(mats[b.name], nu, T, groups=groups, linear_positions=list(range(1, N + 1)))
    if kind == "gpm":
        n = meta["n"]
        return {
            b.name: check_rank1(mats[b.name], nu, T, groups=[(list(range(n)), nu * T)],
                                linear_positions=list(range(1, n + 1)))
            for b in program.blocks
        }
    return None


def diagonal_point(program, point):
    """Split a first-moment vector of the diagonal program into ``(atoms s x n, y)``."""
    s, n = program.meta["s"], program.meta["n"]
    point = np.asarray(point, dtype=float)
    return point[: s * n].reshape(s, n), point[s * n:(s + 1) * n]
