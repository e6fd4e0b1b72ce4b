"""Products of scaled simplices and a batched projected-gradient solver."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def project_simplex(v, mass=1.0):
    """Euclidean projection of each row (last axis) onto ``{x >= 0, sum x = mass}``.

    Sort-based algorithm; ``mass`` may be a scalar or broadcast against the
    leading axes. A zero mass projects to the zero vector.
    """
    v = np.asarray(v, dtype=float)
    n = v.shape[-1]
    mass = np.broadcast_to(np.asarray(mass, dtype=float), v.shape[:-1])
    u = -np.sort(-v, axis=-1)
    css = np.cumsum(u, axis=-1) - mass[..., None]
    ind = np.arange(1, n + 1)
    cond = u - css / ind > 0
    rho = n - 1 - np.argmax(cond[..., ::-1], axis=-1)
    theta = np.take_along_axis(css, rho[..., None], axis=-1) / (rho[..., None] + 1.0)
    return np.maximum(v - theta, 0.0)


def sample_simplex(rng, shape, mass=1.0):
    """Flat-Dirichlet samples on the scaled simplex; ``shape[-1]`` is the dimension."""
    g = rng.standard_exponential(shape)
    return mass * g / g.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class Block:
    """``rows`` x ``cols`` block whose rows lie on the simplex of size ``mass``."""

    name: str
    rows: int
    cols: int
    mass: float
    fixed: bool = False

    @property
    def size(self):
        return self.rows * self.cols


class SimplexProduct:
    """Flat parameterisation of a product of row-simplex blocks.

    Batched points are arrays of shape ``(B, size)``; ``split`` returns
    per-block views of shape ``(B, rows, cols)``.
    """

    def __init__(self, blocks):
        self.blocks = tuple(blocks)
        offsets, start = [], 0
        for b in self.blocks:
            offsets.append(slice(start, start + b.size))
            start += b.size
        self.slices = dict(zip((b.name for b in self.blocks), offsets))
        self.size = start
        free = np.zeros(self.size, dtype=bool)
        for b, sl in zip(self.blocks, offsets):
            free[sl] = not b.fixed
        self.free = free

    def split(self, z):
        z = np.asarray(z)
        return {b.name: z[..., self.slices[b.name]].reshape(z.shape[:-1] + (b.rows, b.cols)) for b in self.blocks}

    def join(self, parts):
        first = next(iter(parts.values()))
        lead = np.asarray(first).shape[:-2]
        z = np.empty(lead + (self.size,))
        for b in self.blocks:
            z[..., self.slices[b.name]] = np.asarray(parts[b.name]).reshape(lead + (b.size,))
        return z

    def project(self, z):
        out = np.array(z, dtype=float, copy=True)
        for b in self.blocks:
            if b.fixed:
                continue
            sl = self.slices[b.name]
            blk = out[..., sl].reshape(out.shape[:-1] + (b.rows, b.cols))
            out[..., sl] = project_simplex(blk, b.mass).reshape(out.shape[:-1] + (b.size,))
        return out

    def sample(self, rng, batch):
        parts = {}
        for b in self.blocks:
            parts[b.name] = sample_simplex(rng, (batch, b.rows, b.cols), b.mass)
        return self.join(parts)


@dataclass
class PGResult:
    z: np.ndarray
    fun: np.ndarray
    mapping_norm: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    history: list | None = None


def gradient_mapping(space, z, g):
    """Infinity norm of ``z - P(z - g)`` per batch element (unit step)."""
    return np.max(np.abs(z - space.project(z - g)), axis=-1, initial=0.0)


def projected_gradient(fun_grad, z0, space, tol=1e-9, max_iter=20000, step0=None, record=False, indexed=False, memory=1):
    """Monotone projected gradient with Barzilai-Borwein steps, batched.

    ``fun_grad(z)`` maps ``(B, N)`` points to ``(f, g)`` with shapes ``(B,)``
    and ``(B, N)``. Each batch element stops once its gradient mapping norm
    drops to ``tol``; stopped elements are no longer updated. Steps obey the
    sufficient-decrease test ``f(z+) <= f(z) + g.(z+ - z) + |z+ - z|^2 / 2t``,
    so the objective never increases. With ``indexed=True`` the callback is
    called as ``fun_grad(z, idx)`` where ``idx`` holds the batch positions of
    the rows of ``z``. ``memory > 1`` switches to the nonmonotone variant
    that compares against the largest of the last ``memory`` values.
    """
    call = fun_grad if indexed else (lambda zz, idx: fun_grad(zz))
    z = space.project(np.atleast_2d(np.asarray(z0, dtype=float)))
    B = z.shape[0]
    free = space.free
    f, g = call(z, np.arange(z.shape[0]))
    g = np.where(free, g, 0.0)
    t = np.full(B, 1.0 if step0 is None else step0)
    its = np.zeros(B, dtype=int)
    gm = gradient_mapping(space, z, g)
    active = gm > tol
    history = [f.copy()] if record else None
    recent = np.tile(f[:, None], (1, max(1, memory)))
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        za, fa, ga, ta = z[idx], f[idx], g[idx], t[idx]
        fref = recent[idx].max(axis=1)
        accepted = np.zeros(idx.size, dtype=bool)
        zn, fn, gn = za.copy(), fa.copy(), ga.copy()
        pending = np.arange(idx.size)
        for _bt in range(60):
            zc = space.project(za[pending] - ta[pending, None] * ga[pending])
            fc, gc = call(zc, idx[pending])
            d = zc - za[pending]
            ok = fc <= fref[pending] + np.sum(ga[pending] * d, axis=1) + np.sum(d * d, axis=1) / (2 * ta[pending]) + 1e-15 * np.abs(fa[pending])
            ok |= np.sum(d * d, axis=1) == 0.0
            sel = pending[ok]
            zn[sel], fn[sel], gn[sel] = zc[ok], fc[ok], gc[ok]
            accepted[sel] = True
            pending = pending[~ok]
            if pending.size == 0:
                break
            ta[pending] *= 0.5
        gn = np.where(free, gn, 0.0)
        s = zn - za
        y = gn - ga
        sy = np.sum(s * y, axis=1)
        ss = np.sum(s * s, axis=1)
        tb = np.where(sy > 0, ss / np.where(sy > 0, sy, 1.0), ta * 4.0)
        t[idx] = np.clip(tb, 1e-12, 1e12)
        z[idx], f[idx], g[idx] = zn, fn, gn
        recent[idx] = np.roll(recent[idx], 1, axis=1)
        recent[idx, 0] = fn
        its[idx] += 1
        gm[idx] = gradient_mapping(space, zn, gn)
        stalled = ~accepted
        active[idx] = (gm[idx] > tol) & ~stalled
        if record:
            history.append(f.copy())
    return PGResult(z, f, gm, its, gm <= tol, history)
