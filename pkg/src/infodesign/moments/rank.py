"""Rank-one admissibility of a solved moment matrix and extraction of its atom."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EIG_RATIO = 1e-6
PSD_TOL = 1e-8
MASS_TOL = 1e-6

ADMISSIBLE = "rank-1-admissible"
NOT_RANK1 = "not-rank-1"
VIOLATED = "constraint-violated"


@dataclass
class TmsCheck:
    """Verdict on a truncated moment matrix ``M`` indexed by ``[1, z, ...]``.

    ``extracted_point`` is the first-moment row and is only set when the
    verdict is admissible; ``first_moments`` is always filled for diagnostics.
    """

    moment_matrix: np.ndarray
    mass_tolerance: float
    eigen_ratio_threshold: float
    verdict: str
    extracted_point: np.ndarray | None
    first_moments: np.ndarray
    eigen_ratio: float
    min_eigenvalue: float
    min_entry: float
    mass_residual: float
    second_moment_residual: float
    reasons: list = field(default_factory=list)

    @property
    def admissible(self):
        return self.verdict == ADMISSIBLE


def default_groups(dim, nu, T, n=2):
    """Simplex groups of the diagonal layout ``(x^{w_1}, ..., x^{w_s}, y)``.

    A matrix of dimension ``(s + 1) n + 1`` gets ``s`` groups of mass
    ``nu T`` followed by the ``y`` group of mass ``(1 - nu) T``.
    """
    N = dim - 1
    if N % n or N // n < 1:
        raise ValueError(f"dimension {dim} does not fit the layout (s + 1) n + 1 with n = {n}")
    g = N // n
    groups = [(list(range(k * n, (k + 1) * n)), nu * T) for k in range(g - 1)]
    groups.append((list(range((g - 1) * n, g * n)), (1.0 - nu) * T))
    return groups


def check_rank1(M, nu, T, n=2, groups=None, linear_positions=None, mass_tol=MASS_TOL,
                eig_ratio=EIG_RATIO, psd_tol=PSD_TOL):
    """Check the sufficient conditions for ``M`` to be the moment matrix of one atom.

    ``groups`` lists ``(variable indices, mass)`` for each simplex; by default
    the diagonal layout with ``n`` routes is assumed. ``linear_positions``
    gives the rows of ``M`` holding the degree-one moments (default ``1..N``).
    Tolerances are relative to the largest entry of ``M`` (mass rows: to
    ``1 + T``).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("moment matrix must be square")
    M = (M + M.T) / 2
    if linear_positions is None:
        linear_positions = list(range(1, M.shape[0]))
    lin = np.asarray(linear_positions)
    if groups is None:
        groups = default_groups(len(lin) + 1, nu, T, n)
    scale = max(1.0, float(np.max(np.abs(M))))
    eig = np.linalg.eigvalsh(M)
    lam1 = max(eig[-1], 0.0)
    ratio = float(eig[-2] / lam1) if len(eig) > 1 and lam1 > 0 else (0.0 if len(eig) == 1 else np.inf)
    first = M[0, lin].copy()
    reasons = []
    if abs(M[0, 0] - 1.0) > psd_tol * scale:
        reasons.append("unit mass")
    if eig[0] < -psd_tol * scale:
        reasons.append("not positive semidefinite")
    min_entry = float(M.min())
    if min_entry < -psd_tol * scale:
        reasons.append("negative moment")
    mres = sres = 0.0
    for idx, mass in groups:
        rows = lin[idx]
        mres = max(mres, abs(M[0, rows].sum() - mass))
        for p in lin:
            sres = max(sres, abs(M[p, rows].sum() - mass * M[0, p]))
    mtol = mass_tol * (1.0 + T)
    if mres > mtol:
        reasons.append("mass rows")
    if sres > mtol * (1.0 + T):
        reasons.append("second-moment rows")
    if reasons:
        verdict = VIOLATED
    elif ratio > eig_ratio:
        verdict = NOT_RANK1
    else:
        verdict = ADMISSIBLE
    return TmsCheck(
        moment_matrix=M,
        mass_tolerance=mtol,
        eigen_ratio_threshold=eig_ratio,
        verdict=verdict,
        extracted_point=first if verdict == ADMISSIBLE else None,
        first_moments=first,
        eigen_ratio=ratio,
        min_eigenvalue=float(eig[0]),
        min_entry=min_entry,
        mass_residual=float(mres),
        second_moment_residual=float(sres),
        reasons=reasons,
    )


def round_to_rank1(M, linear_positions=None):
    """Outer product of ``(1, first moments)``, the rank-one matrix sharing M's first row."""
    M = np.asarray(M, dtype=float)
    if linear_positions is None:
        v = M[0].copy()
    else:
        v = np.concatenate([[1.0], M[0, list(linear_positions)]])
    v[0] = 1.0
    return np.outer(v, v)
