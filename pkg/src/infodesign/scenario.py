"""Game data model: states, prior, network, polynomial latencies and demand.

A scenario is read from a YAML/JSON document with the fields ``states``,
``prior``, ``links``, ``routes``, ``demand`` and ``latency`` (a mapping
``state -> link -> [alpha_0, ..., alpha_D]``). Routes are explicit link sets;
a parallel network is the special case where route ``i`` is ``{link i}``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import yaml

PRIOR_TOL = 1e-12
FLOW_TOL = 1e-9


class ScenarioError(ValueError):
    """Base class for scenario ingestion failures."""


class ScenarioParseError(ScenarioError):
    """The scenario document is malformed or misses a required field."""


class ScenarioValidationError(ScenarioError):
    """The scenario parses but violates a model invariant."""


@dataclass(frozen=True)
class LatencyPolynomial:
    """Link latency ``sum_d coefficients[d] * f**d``."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coef = tuple(float(c) for c in self.coefficients)
        if not coef:
            raise ScenarioValidationError("latency polynomial has no coefficients")
        if not all(math.isfinite(c) for c in coef):
            raise ScenarioValidationError("latency coefficients must be finite")
        object.__setattr__(self, "coefficients", coef)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_monotone(self) -> bool:
        # all-nonnegative coefficients: nonnegative and nondecreasing on [0, inf)
        return all(c >= 0.0 for c in self.coefficients)

    def __call__(self, f):
        return _horner(np.asarray(self.coefficients), np.asarray(f, dtype=float))

    def derivative(self, f):
        c = np.asarray(self.coefficients)
        dc = c[1:] * np.arange(1, len(c))
        if dc.size == 0:
            return np.zeros_like(np.asarray(f, dtype=float))
        return _horner(dc, np.asarray(f, dtype=float))

    def integral(self, a, b):
        """Closed-form integral of the latency over ``[a, b]``."""
        c = np.asarray(self.coefficients)
        ic = np.concatenate([[0.0], c / np.arange(1, len(c) + 1)])
        return _horner(ic, np.asarray(b, dtype=float)) - _horner(ic, np.asarray(a, dtype=float))


def _horner(coef, x):
    out = np.zeros_like(x, dtype=float) + coef[-1]
    for c in coef[-2::-1]:
        out = out * x + c
    return out


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RoutingScenario:
    """Validated routing game with ``s`` states, ``n`` routes and ``|E|`` links.

    Attributes
    ----------
    states : tuple of str
        State labels; their order fixes the row order of every state-indexed
        array.
    prior : ndarray of shape (s,)
        Common prior over states, strictly positive.
    links : tuple of str
    routes : tuple of tuple of str
        Route ``i`` is the set of links it traverses.
    latency : mapping
        ``latency[state][link]`` is a :class:`LatencyPolynomial`.
    demand : float
        Total traffic volume ``T``.
    """

    states: tuple[str, ...]
    prior: np.ndarray
    links: tuple[str, ...]
    routes: tuple[tuple[str, ...], ...]
    latency: Mapping[str, Mapping[str, LatencyPolynomial]]
    demand: float
    name: str = ""
    coefficients: np.ndarray = field(init=False, repr=False)
    incidence: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        object.__setattr__(self, "links", tuple(str(e) for e in self.links))
        object.__setattr__(self, "routes", tuple(tuple(str(e) for e in r) for r in self.routes))
        object.__setattr__(self, "prior", _frozen(self.prior))
        object.__setattr__(self, "demand", float(self.demand))
        self._validate()
        degree = max(p.degree for row in self.latency.values() for p in row.values())
        coef = np.zeros((self.n_states, self.n_links, degree + 1))
        for a, state in enumerate(self.states):
            for e, link in enumerate(self.links):
                c = self.latency[state][link].coefficients
                coef[a, e, : len(c)] = c
        object.__setattr__(self, "coefficients", _frozen(coef))
        inc = np.zeros((self.n_links, self.n_routes))
        for i, route in enumerate(self.routes):
            for link in route:
                inc[self.links.index(link), i] = 1.0
        object.__setattr__(self, "incidence", _frozen(inc))

    def _validate(self):
        s, prior = len(self.states), self.prior
        if s < 1:
            raise ScenarioValidationError("at least one state is required")
        if len(set(self.states)) != s:
            raise ScenarioValidationError("duplicate state labels")
        if prior.shape != (s,):
            raise ScenarioValidationError("prior length does not match states")
        if not np.all(np.isfinite(prior)) or np.any(prior <= 0.0) or abs(prior.sum() - 1.0) > PRIOR_TOL:
            raise ScenarioValidationError("prior not interior: entries must be positive and sum to 1")
        if len(set(self.links)) != len(self.links):
            raise ScenarioValidationError("duplicate link ids")
        if len(self.routes) < 2:
            raise ScenarioValidationError("at least two routes are required")
        used = set()
        for i, route in enumerate(self.routes):
            if not route:
                raise ScenarioValidationError(f"route {i} is empty")
            unknown = set(route) - set(self.links)
            if unknown:
                raise ScenarioValidationError(f"route {i} uses unknown links {sorted(unknown)}")
            if len(set(route)) != len(route):
                raise ScenarioValidationError(f"route {i} repeats a link")
            used.update(route)
        unused = set(self.links) - used
        if unused:
            raise ScenarioValidationError(f"links {sorted(unused)} appear in no route")
        if not (math.isfinite(self.demand) and self.demand > 0.0):
            raise ScenarioValidationError("demand must be a positive real")
        for state in self.states:
            row = self.latency.get(state)
            if row is None:
                raise ScenarioValidationError(f"no latency table for state {state!r}")
            for link in self.links:
                poly = row.get(link)
                if poly is None:
                    raise ScenarioValidationError(f"no latency for state {state!r}, link {link!r}")
                if not poly.is_monotone():
                    raise ScenarioValidationError(
                        f"non-monotone latency: state {state!r}, link {link!r} has a negative coefficient"
                    )

    # sizes -----------------------------------------------------------------
    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_routes(self) -> int:
        return len(self.routes)

    @property
    def n_links(self) -> int:
        return len(self.links)

    @property
    def degree(self) -> int:
        return self.coefficients.shape[2] - 1

    @property
    def is_parallel(self) -> bool:
        return self.n_links == self.n_routes and np.array_equal(self.incidence, np.eye(self.n_routes))

    # vectorised latency evaluation ----------------------------------------
    def link_latencies(self, link_flow):
        """Latency of every link in every state: ``(..., E) -> (..., s, E)``."""
        f = np.asarray(link_flow, dtype=float)[..., None, :]
        coef = self.coefficients
        out = np.broadcast_to(coef[..., -1], f.shape[:-2] + coef.shape[:2]).copy()
        for d in range(self.degree - 1, -1, -1):
            out = out * f + coef[..., d]
        return out

    def link_latency_slopes(self, link_flow):
        """Derivative of every link latency: ``(..., E) -> (..., s, E)``."""
        f = np.asarray(link_flow, dtype=float)[..., None, :]
        D = self.degree
        out = np.zeros(f.shape[:-2] + self.coefficients.shape[:2])
        for d in range(D, 0, -1):
            out = out * f + d * self.coefficients[..., d]
        return out

    def link_potentials(self, link_flow):
        """``int_0^f latency`` for every link and state: ``(..., E) -> (..., s, E)``."""
        f = np.asarray(link_flow, dtype=float)[..., None, :]
        D = self.degree
        out = np.zeros(f.shape[:-2] + self.coefficients.shape[:2])
        for d in range(D, -1, -1):
            out = out * f + self.coefficients[..., d] / (d + 1)
        return out * f

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form; identifies result files."""
        payload = json.dumps(scenario_to_dict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def with_demand(self, demand: float) -> "RoutingScenario":
        return RoutingScenario(self.states, self.prior, self.links, self.routes, self.latency, demand, self.name)

    def with_prior(self, prior) -> "RoutingScenario":
        return RoutingScenario(self.states, prior, self.links, self.routes, self.latency, self.demand, self.name)


def link_flows(scenario: RoutingScenario, route_flow) -> np.ndarray:
    """Link flows induced by route flows, ``x~_e = sum_{i: e in i} x_i``.

    Accepts a single route-flow vector or a stack of them (last axis = routes).
    """
    x = np.asarray(route_flow, dtype=float)
    if x.shape[-1:] != (scenario.n_routes,):
        raise ValueError(f"route flow must have {scenario.n_routes} entries, got shape {x.shape}")
    return x @ scenario.incidence.T


def route_latency(scenario: RoutingScenario, state, route_flow) -> np.ndarray:
    """Latency of every route in one state at the aggregate route flow."""
    if isinstance(state, str):
        if state not in scenario.states:
            raise KeyError(f"unknown state {state!r}")
        a = scenario.states.index(state)
    else:
        a = int(state)
        if not 0 <= a < scenario.n_states:
            raise KeyError(f"unknown state index {state}")
    x = np.asarray(route_flow, dtype=float)
    if np.any(x < -FLOW_TOL):
        raise ValueError("route flow must be nonnegative")
    lat = scenario.link_latencies(link_flows(scenario, x))[..., a, :]
    return lat @ scenario.incidence


def bpr_capacity(free_flow_time, alpha4):
    """Capacity implied by BPR coefficients, ``(0.15 * alpha_0 / alpha_4) ** (1/4)``."""
    return (0.15 * np.asarray(free_flow_time, dtype=float) / np.asarray(alpha4, dtype=float)) ** 0.25


# ingestion -------------------------------------------------------------------
_FIELDS = ("states", "prior", "links", "routes", "demand", "latency")


def scenario_from_dict(doc: Mapping, name: str = "") -> RoutingScenario:
    if not isinstance(doc, Mapping):
        raise ScenarioParseError("scenario document must be a mapping")
    missing = [f for f in _FIELDS if f not in doc]
    if missing:
        raise ScenarioParseError(f"missing field(s): {', '.join(missing)}")
    try:
        states = [str(s) for s in doc["states"]]
        prior = [float(p) for p in doc["prior"]]
        links = [str(e) for e in doc["links"]]
        routes = [[str(e) for e in r] for r in doc["routes"]]
        demand = float(doc["demand"])
        table = doc["latency"]
        if not isinstance(table, Mapping):
            raise TypeError("latency must be a mapping")
        latency = {}
        for state, row in table.items():
            if not isinstance(row, Mapping):
                raise TypeError(f"latency[{state!r}] must be a mapping")
            latency[str(state)] = {
                str(link): LatencyPolynomial(tuple(float(c) for c in coef)) for link, coef in row.items()
            }
    except ScenarioValidationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioParseError(f"malformed scenario: {exc}") from exc
    return RoutingScenario(states, prior, links, routes, latency, demand, name=name)


def scenario_to_dict(scenario: RoutingScenario) -> dict:
    return {
        "states": list(scenario.states),
        "prior": [float(p) for p in scenario.prior],
        "links": list(scenario.links),
        "routes": [list(r) for r in scenario.routes],
        "demand": scenario.demand,
        "latency": {
            s: {e: list(scenario.latency[s][e].coefficients) for e in scenario.links} for s in scenario.states
        },
    }


def load_scenario(path) -> RoutingScenario:
    """Read and validate a scenario file (YAML or JSON)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioParseError(f"cannot parse {path}: {exc}") from exc
    return scenario_from_dict(doc, name=path.stem)


def save_scenario(scenario: RoutingScenario, path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario_to_dict(scenario), sort_keys=False))


BUILTIN_SCENARIOS = ("two_link_affine", "two_link_bpr", "wheatstone_affine", "wheatstone_quadratic")


def builtin_path(name: str) -> Path:
    if name not in BUILTIN_SCENARIOS:
        raise KeyError(f"unknown builtin scenario {name!r}; choose from {BUILTIN_SCENARIOS}")
    return Path(str(resources.files("infodesign") / "scenarios" / f"{name}.scn"))


def builtin(name: str) -> RoutingScenario:
    """One of the bundled instances (the two-link and Wheatstone examples)."""
    return load_scenario(builtin_path(name))


def parallel_scenario(alpha: Sequence, prior, demand: float, states=None) -> RoutingScenario:
    """Build a parallel-link scenario from per-degree ``(s, n)`` coefficient matrices."""
    alpha = np.asarray(alpha, dtype=float)
    D1, s, n = alpha.shape
    states = list(states) if states is not None else [f"w{a + 1}" for a in range(s)]
    links = [str(i + 1) for i in range(n)]
    latency = {
        states[a]: {links[i]: LatencyPolynomial(tuple(alpha[:, a, i])) for i in range(n)} for a in range(s)
    }
    return RoutingScenario(states, prior, links, [[e] for e in links], latency, demand)
