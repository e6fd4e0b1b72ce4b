"""Moment programs: symmetric coefficient matrices acting on moment matrices."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .polynomial import Poly, monomials


class MomentError(ValueError):
    pass


@dataclass
class MomentBlock:
    """One moment matrix ``M[p, q] = E[z_p z_q]`` over ``basis`` monomials in ``variables``."""

    name: str
    variables: list
    basis: list

    @property
    def nvars(self):
        return len(self.variables)

    @property
    def dimension(self):
        return len(self.basis)

    def entry_exponent(self, p, q):
        return tuple(a + b for a, b in zip(self.basis[p], self.basis[q]))

    def moment_exponents(self):
        seen = {}
        for p in range(self.dimension):
            for q in range(p, self.dimension):
                seen.setdefault(self.entry_exponent(p, q), None)
        return list(seen)

    def pairs_by_exponent(self):
        out = {}
        for p in range(self.dimension):
            for q in range(self.dimension):
                out.setdefault(self.entry_exponent(p, q), []).append((p, q))
        return out

    def matrix_of(self, poly):
        """Canonical symmetric matrix with ``<Q, M> = E[poly]``.

        Each coefficient is spread evenly over all entries carrying its
        monomial, so constant and square terms sit on the diagonal and mixed
        terms are split in halves.
        """
        pairs = self.pairs_by_exponent()
        Q = np.zeros((self.dimension, self.dimension))
        for k, v in poly.terms.items():
            if k not in pairs:
                raise MomentError(f"monomial {k} exceeds the relaxation order")
            cells = pairs[k]
            for p, q in cells:
                Q[p, q] += v / len(cells)
        return Q

    def evaluate(self, point):
        """Rank-one moment matrix of the Dirac measure at ``point``."""
        point = np.asarray(point, dtype=float)
        v = np.array([np.prod(point ** np.array(e)) for e in self.basis])
        return np.outer(v, v)


@dataclass
class MomentConstraint:
    """``sum_b <matrices[b], M_b>  (sense)  rhs`` with sense ``">="`` or ``"=="``."""

    name: str
    index: tuple
    matrices: dict
    sense: str
    rhs: float = 0.0

    @property
    def label(self):
        if not self.index:
            return self.name
        return f"{self.name}{self.index}"


@dataclass
class Localizing:
    """PSD condition ``E[g z z^T] >= 0`` over the block's monomials up to ``order``."""

    block: str
    poly: Poly
    order: int
    name: str = ""


@dataclass
class MomentProgram:
    """Minimise ``sum_b <objective[b], M_b>`` over moment matrices of the blocks.

    Every block matrix is PSD with unit mass ``M_b[0, 0] = 1``; with
    ``nonnegative`` all moments are also constrained to be nonnegative.
    ``meta`` records how the program was built (scenario digest, nu, layout).
    """

    blocks: list
    objective: dict
    constraints: list
    localizing: list = field(default_factory=list)
    nonnegative: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def dimension(self):
        if len(self.blocks) != 1:
            return tuple(b.dimension for b in self.blocks)
        return self.blocks[0].dimension

    def block(self, name):
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    @property
    def C(self):
        return self.objective[self.blocks[0].name]

    def find(self, name, index=None):
        for c in self.constraints:
            if c.name == name and (index is None or c.index == tuple(index)):
                return c
        raise KeyError((name, index))

    def matrices(self, name):
        """All single-block matrices of constraints called ``name``, keyed by index."""
        b = self.blocks[0].name
        return {c.index: c.matrices[b] for c in self.constraints if c.name == name}

    def value(self, Ms):
        Ms = self._as_dict(Ms)
        return float(sum(np.sum(self.objective[b] * Ms[b]) for b in self.objective))

    def constraint_values(self, Ms):
        Ms = self._as_dict(Ms)
        return [float(sum(np.sum(A * Ms[b]) for b, A in c.matrices.items())) - c.rhs for c in self.constraints]

    def violation(self, Ms):
        """Largest violation of the linear constraints (PSD and sign conditions excluded)."""
        worst = 0.0
        for c, v in zip(self.constraints, self.constraint_values(Ms)):
            worst = max(worst, abs(v) if c.sense == "==" else max(0.0, -v))
        return worst

    def _as_dict(self, Ms):
        if isinstance(Ms, dict):
            return Ms
        if len(self.blocks) == 1 and not isinstance(Ms, (list, tuple)):
            return {self.blocks[0].name: np.asarray(Ms)}
        return {b.name: np.asarray(M) for b, M in zip(self.blocks, Ms)}

    def is_symmetric(self, tol=1e-12):
        mats = list(self.objective.values()) + [A for c in self.constraints for A in c.matrices.values()]
        return all(np.max(np.abs(A - A.T), initial=0.0) <= tol for A in mats)

    def copy(self):
        return replace(
            self,
            objective={k: v.copy() for k, v in self.objective.items()},
            constraints=[replace(c, matrices={k: v.copy() for k, v in c.matrices.items()}) for c in self.constraints],
            localizing=list(self.localizing),
            meta=dict(self.meta),
        )


def full_basis(nvars, order):
    return monomials(nvars, order)
