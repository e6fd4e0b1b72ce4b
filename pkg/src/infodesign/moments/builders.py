"""Builders for the diagonal-policy moment SDP and the fixed-y moment relaxation."""
from __future__ import annotations

import math

import numpy as np

from .polynomial import Poly, monomials, univariate_compose
from .program import Localizing, MomentBlock, MomentConstraint, MomentError, MomentProgram


def relaxation_order(D):
    """Half the degree of the design polynomials, rounded up: ceil((D + 1) / 2)."""
    return max(1, math.ceil((D + 1) / 2))


def _route_latencies(scenario, state, x_polys, y_polys):
    """Route-latency polynomials and link flows for one state and one atom."""
    R = scenario.incidence
    E, n = R.shape
    coef = scenario.coefficients[state]
    flows = []
    for e in range(E):
        f = Poly.const(x_polys[0].nvars, 0.0)
        for i in range(n):
            if R[e, i]:
                f = f + x_polys[i] + y_polys[i]
        flows.append(f)
    link_lat = [univariate_compose(coef[e], flows[e]) for e in range(E)]
    routes = []
    for i in range(n):
        r = Poly.const(x_polys[0].nvars, 0.0)
        for e in range(E):
            if R[e, i]:
                r = r + link_lat[e]
        routes.append(r)
    return routes, flows, link_lat


def _check_nu(nu):
    nu = float(nu)
    if not 0.0 <= nu <= 1.0:
        raise MomentError(f"participation rate must lie in [0, 1], got {nu}")
    return nu


def diagonal_variables(scenario):
    s, n = scenario.n_states, scenario.n_routes
    names = [f"x[{w}]_{i + 1}" for w in scenario.states for i in range(n)]
    names += [f"y_{i + 1}" for i in range(n)]
    return names


def build_diagonal_relaxation(scenario, nu, order=None):
    """Moment relaxation of the diagonal design problem at any latency degree.

    Variables are ``z = (x^{w_1}, ..., x^{w_s}, y)``. The single moment matrix
    is indexed by all monomials of degree <= ``order`` (default
    ``ceil((D + 1) / 2)``). Constraint families: obedience ``A`` and Nash ``B``
    (``>= 0``), the simplex masses ``S_x``/``S_y`` and their products with the
    group's own monomials (``T_x``/``T_y`` for degree one, ``H_x``/``H_y``
    beyond), all ``== 0``. At order one this is exactly the affine SDP.
    """
    nu = _check_nu(nu)
    s, n, T = scenario.n_states, scenario.n_routes, scenario.demand
    order = relaxation_order(scenario.degree) if order is None else int(order)
    if 2 * order < scenario.degree + 1:
        raise MomentError(f"order {order} cannot represent degree {scenario.degree + 1} polynomials")
    N = (s + 1) * n
    X = [[Poly.var(N, k * n + i) for i in range(n)] for k in range(s)]
    Y = [Poly.var(N, s * n + i) for i in range(n)]
    block = MomentBlock("z", diagonal_variables(scenario), monomials(N, order))
    mu0 = np.asarray(scenario.prior)
    lat = []
    cost = Poly.const(N, 0.0)
    for k in range(s):
        routes, flows, link_lat = _route_latencies(scenario, k, X[k], Y)
        lat.append(routes)
        for f, l in zip(flows, link_lat):
            cost = cost + mu0[k] * (f * l)
    cons = []
    for i in range(n):
        for j in range(n):
            p = Poly.const(N, 0.0)
            q = Poly.const(N, 0.0)
            for k in range(s):
                gap = lat[k][j] - lat[k][i]
                p = p + mu0[k] * (X[k][i] * gap)
                q = q + mu0[k] * (Y[i] * gap)
            cons.append(MomentConstraint("A", (i, j), {"z": block.matrix_of(p)}, ">="))
            cons.append(MomentConstraint("B", (i, j), {"z": block.matrix_of(q)}, ">="))
    groups = [(f"x[{scenario.states[k]}]", list(range(k * n, (k + 1) * n)), nu * T) for k in range(s)]
    groups.append(("y", list(range(s * n, (s + 1) * n)), (1.0 - nu) * T))
    for g, (gname, idx, mass) in enumerate(groups):
        is_y = g == s
        lin = Poly.linear(N, [1.0 if v in idx else 0.0 for v in range(N)], -mass)
        cons.append(MomentConstraint("S_y" if is_y else "S_x", () if is_y else (g,), {"z": block.matrix_of(lin)}, "=="))
        for e in monomials(n, 2 * order - 1):
            d = sum(e)
            if d == 0:
                continue
            full = [0] * N
            for a, v in zip(e, idx):
                full[v] = a
            mono = Poly(N, {tuple(full): 1.0})
            Q = block.matrix_of(mono * lin)
            if d == 1:
                i = e.index(1)
                cons.append(MomentConstraint("T_y" if is_y else "T_x", (i,) if is_y else (i, g), {"z": Q}, "=="))
            else:
                cons.append(MomentConstraint("H_y" if is_y else "H_x", (e,) if is_y else (e, g), {"z": Q}, "=="))
    meta = {
        "kind": "diagonal",
        "nu": nu,
        "demand": T,
        "order": order,
        "n": n,
        "s": s,
        "groups": [(name, idx, mass) for name, idx, mass in groups],
        "scenario": scenario.digest(),
    }
    return MomentProgram([block], {"z": block.matrix_of(cost)}, cons, nonnegative=True, meta=meta)


def build_diagonal_sdp(scenario, nu):
    """First-level SDP for diagonal policies with affine latencies.

    The matrix has dimension ``(s + 1) n + 1``; its coefficient matrices are
    the canonical symmetric forms of the cost, obedience, Nash and simplex
    polynomials, which coincide with the published affine expressions (the
    Nash matrices use the transposed, symmetrised cross blocks).
    """
    if scenario.degree != 1:
        raise MomentError(f"the affine SDP needs degree-1 latencies, got degree {scenario.degree}")
    return build_diagonal_relaxation(scenario, nu, order=1)


def appendix_matrices(scenario, nu):
    """The affine coefficient matrices exactly as printed, for parallel networks.

    Indices are zero-based. Two matrices are reproduced literally even though
    they are defective: ``B`` keeps its untransposed cross blocks and
    unsymmetrised ``y``-block, and ``T_y`` keeps the ``+(1 - nu) T / 2`` border
    (a rank-one point needs ``-(1 - nu) T / 2``). The SDP builder generates
    the consistent forms instead.
    """
    if scenario.degree != 1 or not scenario.is_parallel:
        raise MomentError("printed expressions cover parallel networks with affine latencies")
    nu = _check_nu(nu)
    s, n, T = scenario.n_states, scenario.n_routes, scenario.demand
    # parallel: route i is link perm[i]
    perm = [int(np.flatnonzero(scenario.incidence[:, i])[0]) for i in range(n)]
    a0 = scenario.coefficients[:, perm, 0]
    a1 = scenario.coefficients[:, perm, 1]
    mu0 = np.asarray(scenario.prior)
    N = (s + 1) * n + 1
    xs = [slice(1 + k * n, 1 + (k + 1) * n) for k in range(s)]
    ys = slice(1 + s * n, N)
    abar0 = mu0 @ a0
    abar1 = mu0 @ a1
    out = {}
    C = np.zeros((N, N))
    for k in range(s):
        C[0, xs[k]] = mu0[k] * a0[k] / 2
        C[xs[k], xs[k]] = mu0[k] * np.diag(a1[k])
        C[xs[k], ys] = mu0[k] * np.diag(a1[k])
    C[0, ys] = abar0 / 2
    C[ys, ys] = np.diag(abar1)
    out["C"] = _symmetrize_upper(C)
    E = np.eye(n)

    def At(k, i, j):
        return mu0[k] * (a1[k, j] / 2 * np.outer(E[i], E[j]) - a1[k, i] / 2 * np.outer(E[i], E[i]))

    A, B = {}, {}
    for i in range(n):
        for j in range(n):
            M = np.zeros((N, N))
            for k in range(s):
                M[0, xs[k]] = mu0[k] * (a0[k, j] - a0[k, i]) / 2 * E[i]
                M[xs[k], xs[k]] = At(k, i, j) + At(k, i, j).T
                M[xs[k], ys] = At(k, i, j)
            A[(i, j)] = _symmetrize_upper(M)
            M = np.zeros((N, N))
            M[0, ys] = (abar0[j] - abar0[i]) / 2 * E[i]
            for k in range(s):
                M[xs[k], ys] = At(k, i, j)
            M[ys, ys] = sum(At(k, i, j) for k in range(s))
            B[(i, j)] = _symmetrize_upper(M, keep_diagonal_blocks=[(ys, ys)])
    out["A"], out["B"] = A, B
    Sx, Tx, Ty = {}, {}, {}
    for k in range(s):
        M = np.zeros((N, N))
        M[0, 0] = -nu * T
        M[0, xs[k]] = 0.5
        Sx[k] = _symmetrize_upper(M)
        for i in range(n):
            M = np.zeros((N, N))
            M[0, xs[k]] = -nu * T * E[i] / 2
            M[xs[k], xs[k]] = (np.outer(np.ones(n), E[i]) + np.outer(E[i], np.ones(n))) / 2
            Tx[(i, k)] = _symmetrize_upper(M)
    M = np.zeros((N, N))
    M[0, 0] = (nu - 1) * T
    M[0, ys] = 0.5
    out["S_x"], out["S_y"] = Sx, _symmetrize_upper(M)
    for i in range(n):
        M = np.zeros((N, N))
        M[0, ys] = (1 - nu) * T * E[i] / 2
        M[ys, ys] = (np.outer(np.ones(n), E[i]) + np.outer(E[i], np.ones(n))) / 2
        Ty[i] = _symmetrize_upper(M)
    out["T_x"], out["T_y"] = Tx, Ty
    return out


def _symmetrize_upper(M, keep_diagonal_blocks=()):
    """Mirror the strict upper triangle into the lower one ("*" entries).

    Diagonal blocks listed in ``keep_diagonal_blocks`` are kept as written,
    even when they are not symmetric.
    """
    out = np.triu(M) + np.triu(M, 1).T
    for rs, cs in keep_diagonal_blocks:
        out[rs, cs] = M[rs, cs]
    return out


def build_gpm_fixed_y(scenario, y, nu=None, order=None):
    """Moment relaxation of the private design problem with ``y`` held fixed.

    One block per state carries the moments of the state's recommendation
    distribution over participant flows ``x``. The monomial basis has degree
    ``ceil((D + 1) / 2)``; simplex membership enters through the mass
    equation times every monomial of degree below ``2 * order`` and, from
    order two on, localizing matrices for ``x_i >= 0`` and ``nu T - x_i >= 0``.
    """
    s, n, T = scenario.n_states, scenario.n_routes, scenario.demand
    y = np.asarray(y, dtype=float)
    if y.shape != (n,) or np.any(y < -1e-12):
        raise MomentError(f"y must be a nonnegative vector of length {n}")
    if nu is None:
        nu = 1.0 - y.sum() / T
    nu = _check_nu(nu)
    if abs(y.sum() - (1.0 - nu) * T) > 1e-8 * max(1.0, T):
        raise MomentError("y must carry the non-participant mass (1 - nu) T")
    order = relaxation_order(scenario.degree) if order is None else int(order)
    if 2 * order < scenario.degree + 1:
        raise MomentError(f"order {order} cannot represent degree {scenario.degree + 1} polynomials")
    mu0 = np.asarray(scenario.prior)
    X = [Poly.var(n, i) for i in range(n)]
    Yc = [Poly.const(n, v) for v in y]
    blocks, objective, lat = [], {}, []
    for k, w in enumerate(scenario.states):
        b = MomentBlock(f"x[{w}]", [f"x_{i + 1}" for i in range(n)], monomials(n, order))
        blocks.append(b)
        routes, flows, link_lat = _route_latencies(scenario, k, X, Yc)
        lat.append(routes)
        cost = Poly.const(n, 0.0)
        for f, l in zip(flows, link_lat):
            cost = cost + f * l
        objective[b.name] = b.matrix_of(cost * mu0[k])
    cons = []
    for i in range(n):
        for j in range(n):
            A, B = {}, {}
            for k, b in enumerate(blocks):
                gap = lat[k][j] - lat[k][i]
                A[b.name] = b.matrix_of(X[i] * gap * mu0[k])
                B[b.name] = b.matrix_of(gap * (y[i] * mu0[k]))
            cons.append(MomentConstraint("A", (i, j), A, ">="))
            cons.append(MomentConstraint("B", (i, j), B, ">="))
    lin = Poly.linear(n, [1.0] * n, -nu * T)
    loc = []
    for k, b in enumerate(blocks):
        for e in monomials(n, 2 * order - 1):
            Q = b.matrix_of(Poly(n, {e: 1.0}) * lin)
            cons.append(MomentConstraint("S", (e, k), {b.name: Q}, "=="))
        if order >= 2:
            for i in range(n):
                loc.append(Localizing(b.name, X[i], order - 1, f"x_{i + 1}>=0"))
                loc.append(Localizing(b.name, Poly.const(n, nu * T) - X[i], order - 1, f"x_{i + 1}<=nuT"))
    meta = {"kind": "gpm", "nu": nu, "demand": T, "order": order, "n": n, "s": s, "y": y.tolist(), "scenario": scenario.digest()}
    return MomentProgram(blocks, objective, cons, loc, nonnegative=True, meta=meta)


def build_private_relaxation(scenario, nu, order=None):
    """Moment relaxation of the private design problem with ``y`` as an unknown.

    One block per state over ``(x, y)``. The states' measures must agree on
    every pure-``y`` moment, which is how a deterministic non-participant
    flow ``pi_w(x) x delta(y)`` looks at the level of moments. Any private
    policy (and any public one, through its lift) maps to a feasible point,
    so the optimum is a lower bound on both design problems.
    """
    nu = _check_nu(nu)
    s, n, T = scenario.n_states, scenario.n_routes, scenario.demand
    order = relaxation_order(scenario.degree) if order is None else int(order)
    if 2 * order < scenario.degree + 1:
        raise MomentError(f"order {order} cannot represent degree {scenario.degree + 1} polynomials")
    N = 2 * n
    X = [Poly.var(N, i) for i in range(n)]
    Y = [Poly.var(N, n + i) for i in range(n)]
    names = [f"x_{i + 1}" for i in range(n)] + [f"y_{i + 1}" for i in range(n)]
    mu0 = np.asarray(scenario.prior)
    blocks, objective, lat = [], {}, []
    for k, w in enumerate(scenario.states):
        b = MomentBlock(f"xy[{w}]", names, monomials(N, order))
        blocks.append(b)
        routes, flows, link_lat = _route_latencies(scenario, k, X, Y)
        lat.append(routes)
        cost = Poly.const(N, 0.0)
        for f, l in zip(flows, link_lat):
            cost = cost + f * l
        objective[b.name] = b.matrix_of(cost * mu0[k])
    cons = []
    for i in range(n):
        for j in range(n):
            A, B = {}, {}
            for k, b in enumerate(blocks):
                gap = lat[k][j] - lat[k][i]
                A[b.name] = b.matrix_of(X[i] * gap * mu0[k])
                B[b.name] = b.matrix_of(Y[i] * gap * mu0[k])
            cons.append(MomentConstraint("A", (i, j), A, ">="))
            cons.append(MomentConstraint("B", (i, j), B, ">="))
    lin_x = Poly.linear(N, [1.0] * n + [0.0] * n, -nu * T)
    lin_y = Poly.linear(N, [0.0] * n + [1.0] * n, -(1.0 - nu) * T)
    loc = []
    for k, b in enumerate(blocks):
        for e in monomials(N, 2 * order - 1):
            mono = Poly(N, {e: 1.0})
            cons.append(MomentConstraint("S_x", (e, k), {b.name: b.matrix_of(mono * lin_x)}, "=="))
            cons.append(MomentConstraint("S_y", (e, k), {b.name: b.matrix_of(mono * lin_y)}, "=="))
        if order >= 2:
            for i in range(n):
                loc.append(Localizing(b.name, X[i], order - 1, f"x_{i + 1}>=0"))
                loc.append(Localizing(b.name, Poly.const(N, nu * T) - X[i], order - 1, f"x_{i + 1}<=nuT"))
                loc.append(Localizing(b.name, Y[i], order - 1, f"y_{i + 1}>=0"))
                loc.append(Localizing(b.name, Poly.const(N, (1.0 - nu) * T) - Y[i], order - 1, f"y_{i + 1}<=(1-nu)T"))
    first = blocks[0]
    pairs = first.pairs_by_exponent()
    for e in first.moment_exponents():
        if sum(e) == 0 or any(e[:n]):
            continue
        p, q = pairs[e][0]
        E = np.zeros((first.dimension, first.dimension))
        E[p, q] += 0.5
        E[q, p] += 0.5
        for k in range(1, s):
            cons.append(MomentConstraint("Y", (e, k), {first.name: E, blocks[k].name: -E}, "=="))
    meta = {"kind": "private", "nu": nu, "demand": T, "order": order, "n": n, "s": s, "scenario": scenario.digest()}
    return MomentProgram(blocks, objective, cons, loc, nonnegative=True, meta=meta)
