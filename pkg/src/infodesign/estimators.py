"""Estimator-style wrappers: configure with keyword parameters, then ``fit(scenario)``.

A "dataset" here is a routing scenario (object, file path or built-in name).
Fitted results live in trailing-underscore attributes, as in scikit-learn.
"""
from __future__ import annotations

from numbers import Integral, Real
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_scalar

from .equilibrium import bne_indirect, first_best, social_cost
from .private_design import optimize_diagonal, optimize_private
from .public_design import canonical_policy, optimize_public
from .scenario import BUILTIN_SCENARIOS, RoutingScenario, builtin, load_scenario


def check_scenario(X):
    """Coerce ``X`` to a RoutingScenario (accepts a scenario, a path or a built-in name)."""
    if isinstance(X, RoutingScenario):
        return X
    if isinstance(X, (str, Path)):
        if str(X) in BUILTIN_SCENARIOS:
            return builtin(str(X))
        return load_scenario(X)
    raise TypeError(f"expected a RoutingScenario, path or built-in name, got {type(X).__name__}")


def _check_nu(nu):
    return check_scalar(nu, "nu", Real, min_val=0.0, max_val=1.0)


class _Designer(BaseEstimator):
    mode = None

    def _common(self):
        _check_nu(self.nu)
        check_scalar(self.starts, "starts", Integral, min_val=1)
        check_scalar(self.seed, "seed", Integral, min_val=0)
        if self.threads is not None:
            check_scalar(self.threads, "threads", Integral, min_val=1)

    def _finish(self, scenario, sol):
        if self.certify:
            from .moments import lower_bound

            sol.certify_with(lower_bound(scenario, self.nu, self.mode).lower_bound)
        self.solution_ = sol
        self.atoms_ = sol.atoms
        self.weights_ = sol.weights
        self.y_ = sol.y
        self.cost_ = sol.cost
        self.feasible_ = sol.feasible
        self.lower_bound_ = sol.lower_bound
        self.gap_ = sol.gap
        self.scenario_digest_ = scenario.digest()
        return self

    def score(self, X=None, y=None):
        """Negative social cost, so that larger is better."""
        check_is_fitted(self, "solution_")
        return -self.cost_


class DiagonalSignalDesigner(_Designer):
    """One recommendation atom per state, identity weights."""

    mode = "diagonal"

    def __init__(self, nu=1.0, starts=100, seed=0, threads=None, certify=False):
        self.nu = nu
        self.starts = starts
        self.seed = seed
        self.threads = threads
        self.certify = certify

    def fit(self, X, y=None):
        self._common()
        scenario = check_scenario(X)
        sol = optimize_diagonal(scenario, self.nu, starts=self.starts, seed=self.seed, threads=self.threads)
        return self._finish(scenario, sol)


class PrivateSignalDesigner(_Designer):
    """Atomic private policy with ``n_atoms`` atoms (default: number of states)."""

    mode = "private"

    def __init__(self, nu=1.0, n_atoms=None, starts=100, seed=0, threads=None, certify=False):
        self.nu = nu
        self.n_atoms = n_atoms
        self.starts = starts
        self.seed = seed
        self.threads = threads
        self.certify = certify

    def fit(self, X, y=None):
        self._common()
        if self.n_atoms is not None:
            check_scalar(self.n_atoms, "n_atoms", Integral, min_val=1)
        scenario = check_scenario(X)
        sol = optimize_private(scenario, self.nu, m=self.n_atoms, starts=self.starts, seed=self.seed,
                               threads=self.threads)
        return self._finish(scenario, sol)


class PublicSignalDesigner(_Designer):
    """Public policy with ``n_messages`` messages (default: number of states)."""

    mode = "public"

    def __init__(self, nu=1.0, n_messages=None, starts=100, seed=0, threads=None, certify=False):
        self.nu = nu
        self.n_messages = n_messages
        self.starts = starts
        self.seed = seed
        self.threads = threads
        self.certify = certify

    def fit(self, X, y=None):
        self._common()
        if self.n_messages is not None:
            check_scalar(self.n_messages, "n_messages", Integral, min_val=1)
        scenario = check_scenario(X)
        sol = optimize_public(scenario, self.nu, m=self.n_messages, starts=self.starts, seed=self.seed,
                              threads=self.threads)
        return self._finish(scenario, sol)


class BayesNashFlow(BaseEstimator):
    """Equilibrium flow under a fixed public (or indirect) policy.

    ``policy`` is ``"no-info"``, ``"full-info"`` or an s x m row-stochastic
    matrix.
    """

    def __init__(self, policy="no-info", nu=0.0):
        self.policy = policy
        self.nu = nu

    def fit(self, X, y=None):
        _check_nu(self.nu)
        scenario = check_scenario(X)
        if isinstance(self.policy, str):
            W = canonical_policy(self.policy, scenario.n_states).weights
        else:
            W = np.asarray(self.policy, dtype=float)
        eq = bne_indirect(scenario, W, self.nu)
        self.weights_ = W
        self.atoms_ = eq.atoms
        self.y_ = eq.y
        self.potential_ = eq.potential
        self.kkt_residual_ = eq.kkt_residual
        self.converged_ = eq.converged
        self.cost_ = social_cost(scenario, eq.atoms, W, eq.y)
        return self


class FirstBest(BaseEstimator):
    """State-wise system optimum, the benchmark no signaling policy can beat."""

    def fit(self, X, y=None):
        res = first_best(check_scenario(X))
        self.flows_ = res.flows
        self.state_costs_ = res.state_costs
        self.cost_ = res.cost
        return self
