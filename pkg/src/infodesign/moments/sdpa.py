"""Sparse SDPA (.dat-s) export and import of moment programs.

The program is written in SDPA's standard form: minimise ``c @ x`` subject
to ``sum_i F_i x_i - F_0 >= 0`` blockwise. The unknowns are the moments
other than the unit masses. Each moment and localizing matrix becomes a PSD
block, and one trailing diagonal block collects moment nonnegativity, the
inequality constraints and every equality as a pair of opposite
inequalities. The objective constant, which SDPA cannot represent, is
stored in a comment line.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .polynomial import monomials
from .program import MomentError

CONSTANT_TAG = "objective-constant:"


@dataclass
class SdpaProblem:
    comments: list
    c: list
    block_sizes: list
    entries: list = field(default_factory=list)  # (mat, blk, i, j, value), 1-based

    @property
    def m(self):
        return len(self.c)

    @property
    def objective_constant(self):
        for line in self.comments:
            if line.startswith(CONSTANT_TAG):
                return float(line[len(CONSTANT_TAG):])
        return 0.0

    def dense_blocks(self):
        """``F[mat][blk]`` as dense symmetric arrays (diagonal blocks as vectors)."""
        F = [[None] * len(self.block_sizes) for _ in range(self.m + 1)]
        for mat in range(self.m + 1):
            for b, size in enumerate(self.block_sizes):
                F[mat][b] = np.zeros(abs(size)) if size < 0 else np.zeros((size, size))
        for mat, blk, i, j, v in self.entries:
            A = F[mat][blk - 1]
            if A.ndim == 1:
                A[i - 1] = v
            else:
                A[i - 1, j - 1] = v
                A[j - 1, i - 1] = v
        return F


def _fmt(v):
    return repr(float(v))


def to_sdpa(program):
    """Convert a moment program into an SdpaProblem (variables in first-seen order)."""
    index = {}
    for b in program.blocks:
        for e in b.moment_exponents():
            if sum(e) and (b.name, e) not in index:
                index[(b.name, e)] = len(index)
    for loc in program.localizing:
        b = program.block(loc.block)
        basis = monomials(b.nvars, loc.order)
        for p in basis:
            for q in basis:
                for g in loc.poly.terms:
                    e = tuple(x + y + z for x, y, z in zip(p, q, g))
                    if sum(e) and (b.name, e) not in index:
                        index[(b.name, e)] = len(index)
    nv = len(index)

    def linear(block, Q):
        a = np.zeros(nv)
        const = 0.0
        for p, q in zip(*np.nonzero(Q)):
            e = block.entry_exponent(p, q)
            if sum(e):
                a[index[(block.name, e)]] += Q[p, q]
            else:
                const += Q[p, q]
        return a, const

    c = np.zeros(nv)
    c0 = 0.0
    for name, Q in program.objective.items():
        a, k = linear(program.block(name), Q)
        c += a
        c0 += k
    entries = []
    sizes = []

    def psd_block(block, basis, terms):
        bno = len(sizes) + 1
        d = len(basis)
        sizes.append(d)
        acc = {}
        for p in range(d):
            for q in range(p, d):
                for g, w in terms.items():
                    e = tuple(x + y + z for x, y, z in zip(basis[p], basis[q], g))
                    mat = index[(block.name, e)] + 1 if sum(e) else 0
                    # F_0 enters with a minus sign
                    acc[(mat, p, q)] = acc.get((mat, p, q), 0.0) + (w if mat else -w)
        for (mat, p, q), v in acc.items():
            if v != 0.0:
                entries.append((mat, bno, p + 1, q + 1, v))

    for b in program.blocks:
        psd_block(b, b.basis, {(0,) * b.nvars: 1.0})
    for loc in program.localizing:
        b = program.block(loc.block)
        psd_block(b, monomials(b.nvars, loc.order), loc.poly.terms)
    rows = []
    if program.nonnegative:
        for j in range(nv):
            e = np.zeros(nv)
            e[j] = 1.0
            rows.append((e, 0.0))
    for con in program.constraints:
        a = np.zeros(nv)
        k = -con.rhs
        for name, Q in con.matrices.items():
            ai, ki = linear(program.block(name), Q)
            a += ai
            k += ki
        rows.append((a, k))
        if con.sense == "==":
            rows.append((-a, -k))
        elif con.sense != ">=":
            raise MomentError(f"unknown constraint sense {con.sense!r}")
    if rows:
        bno = len(sizes) + 1
        sizes.append(-len(rows))
        for r, (a, k) in enumerate(rows):
            if k != 0.0:
                entries.append((0, bno, r + 1, r + 1, -k))
            for j in np.flatnonzero(a):
                entries.append((int(j) + 1, bno, r + 1, r + 1, float(a[j])))
    entries.sort(key=lambda t: t[:4])
    meta = program.meta
    comments = [
        "infodesign moment program",
        f"kind: {meta.get('kind', 'custom')} nu: {meta.get('nu')} demand: {meta.get('demand')}",
        f"scenario: {meta.get('scenario', '')}",
        f"{CONSTANT_TAG} {_fmt(c0)}",
    ]
    return SdpaProblem(comments, [float(v) for v in c], sizes, entries)


def write_sdpa(problem, path):
    lines = [f'"{c}' for c in problem.comments]
    lines.append(str(problem.m))
    lines.append(str(len(problem.block_sizes)))
    lines.append(" ".join(str(s) for s in problem.block_sizes))
    lines.append(" ".join(_fmt(v) for v in problem.c))
    for mat, blk, i, j, v in problem.entries:
        lines.append(f"{mat} {blk} {i} {j} {_fmt(v)}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def export_sdpa(program, path):
    """Write ``program`` to ``path`` in sparse SDPA format and return the SdpaProblem."""
    problem = to_sdpa(program)
    write_sdpa(problem, path)
    return problem


def _numbers(line):
    for ch in "{}(),":
        line = line.replace(ch, " ")
    return line.split()


def import_sdpa(path):
    """Read a sparse SDPA file; comment lines (``"`` or ``*``) are kept in order."""
    comments = []
    body = []
    with open(path, encoding="ascii") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith('"') or line.startswith("*"):
                comments.append(line[1:])
            elif line.strip():
                body.append(line)
    try:
        m = int(_numbers(body[0])[0])
        nb = int(_numbers(body[1])[0])
        sizes = [int(v) for v in _numbers(body[2])[:nb]]
        c = [float(v) for v in _numbers(body[3])[:m]]
        entries = []
        for line in body[4:]:
            f = _numbers(line)
            entries.append((int(f[0]), int(f[1]), int(f[2]), int(f[3]), float(f[4])))
    except (IndexError, ValueError) as exc:
        raise MomentError(f"malformed SDPA file {path}: {exc}") from exc
    if len(sizes) != nb or len(c) != m:
        raise MomentError(f"malformed SDPA file {path}: header counts do not match")
    return SdpaProblem(comments, c, sizes, entries)
