"""Sparse multivariate polynomials with float coefficients, just enough for moment builders."""
from __future__ import annotations

from itertools import combinations_with_replacement, product


class Poly:
    """Mapping from exponent tuples to coefficients over a fixed number of variables."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars, terms=None):
        self.nvars = nvars
        self.terms = {}
        if terms:
            for k, v in terms.items():
                if v != 0.0:
                    self.terms[tuple(k)] = float(v)

    @classmethod
    def const(cls, nvars, c):
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars, i, coef=1.0):
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): coef})

    @classmethod
    def linear(cls, nvars, coefs, const=0.0):
        p = cls.const(nvars, const)
        for i, c in enumerate(coefs):
            if c:
                p = p + cls.var(nvars, i, c)
        return p

    @property
    def degree(self):
        return max((sum(k) for k in self.terms), default=0)

    def _lift(self, other):
        return other if isinstance(other, Poly) else Poly.const(self.nvars, other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly(self.nvars, {k: v * other for k, v in self.terms.items()})
        out = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0.0) + v1 * v2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __call__(self, point):
        total = 0.0
        for k, v in self.terms.items():
            t = v
            for xi, e in zip(point, k):
                if e:
                    t *= xi ** e
            total += t
        return total

    def __repr__(self):
        return f"Poly({self.nvars}, {self.terms})"


def univariate_compose(coefs, p):
    """``sum_d coefs[d] p**d`` by Horner's rule."""
    out = Poly.const(p.nvars, 0.0)
    for c in reversed(list(coefs)):
        out = out * p + c
    return out


def monomials(nvars, degree):
    """All exponent tuples of total degree <= ``degree``, graded then lexicographic."""
    out = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def lexicographic_words(nvars, degree):
    """Ordered products ``x_{i1} ... x_{id}`` for d <= ``degree``, as index tuples.

    This is the redundant listing (``x1 x2`` and ``x2 x1`` both appear) used to
    describe the monomial vector: for degree 2 and two variables it has
    1 + 2 + 4 entries.
    """
    out = []
    for d in range(degree + 1):
        out.extend(product(range(nvars), repeat=d))
    return out


def word_exponent(word, nvars):
    e = [0] * nvars
    for i in word:
        e[i] += 1
    return tuple(e)
