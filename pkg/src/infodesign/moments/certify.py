"""Lower bounds on optimal design cost from the moment relaxations."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .builders import build_diagonal_sdp, build_gpm_fixed_y, build_private_relaxation
from .solver import solve_moment_sdp

MODES = ("diagonal", "private", "public")


@dataclass
class Certificate:
    lower_bound: float
    method: str
    bounds: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)


def lower_bound(scenario, nu, mode="private"):
    """Best available moment lower bound for the ``mode`` design problem at ``nu``.

    Every candidate is a valid bound for the mode: the joint relaxation with
    a shared ``y`` bounds all private (hence public) policies; with ``nu = 1``
    the fixed-``y`` relaxation at ``y = 0`` does too; the affine diagonal SDP
    bounds diagonal policies and, for two routes, all private ones.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    nu = float(nu)
    programs = {}
    if scenario.degree == 1 and (mode == "diagonal" or scenario.n_routes == 2):
        programs["diagonal-sdp"] = lambda: build_diagonal_sdp(scenario, nu)
    if nu == 1.0:
        programs["gpm-fixed-y"] = lambda: build_gpm_fixed_y(scenario, np.zeros(scenario.n_routes), 1.0)
    else:
        programs["joint-relaxation"] = lambda: build_private_relaxation(scenario, nu)
    bounds, results = {}, {}
    for name, build in programs.items():
        res = solve_moment_sdp(build())
        results[name] = res
        bounds[name] = res.value
    best = max(bounds, key=bounds.get)
    return Certificate(bounds[best], best, bounds, results)
