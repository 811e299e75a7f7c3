"""Black-box simulator contract and its reduction to noisy bandit observations.

A model exposes a search space (initial states in verification mode, parameters
in synthesis mode) and a sampled transition.  Every simulation draws only from
the ``numpy.random.Generator`` it is handed, so replaying a stream replays the
trajectories.

Transitions are vectorised over rows: ``transition(states, param, rng)`` gets an
``(n, state_dim)`` array and returns the successor states in the same shape.
"""

from __future__ import annotations

import importlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._validation import check_int, check_point
from .exceptions import (
    ConfigurationError,
    PointOutsideDomainError,
    SimulationFault,
    UnknownModelError,
)
from .tree import as_region

VERIFICATION = "verification"
SYNTHESIS = "synthesis"


@dataclass(frozen=True)
class Observation:
    value: float
    range: tuple


@dataclass(frozen=True)
class SampleBatch:
    """Observations drawn at one point, plus how many were clamped into range."""

    values: np.ndarray
    clamped: int = 0


class NmcModel:
    """Base class for nondeterministic Markov chain simulators.

    Subclasses implement ``transition`` plus either ``is_unsafe`` (verification)
    or ``reward`` and ``initial_states`` (synthesis).  Models hold no mutable
    state once constructed and are safe to share between workers.
    """

    name = "custom"
    mode = VERIFICATION

    def __init__(self, search_space, time_bound, state_dim, obs_range=(0.0, 1.0),
                 parameter=None):
        self.search_space = as_region(search_space)
        self.time_bound = check_int(time_bound, "time_bound", min_value=1)
        self.state_dim = check_int(state_dim, "state_dim", min_value=1)
        lo, hi = (float(v) for v in obs_range)
        if not lo < hi:
            raise ConfigurationError(f"observation range must satisfy lo < hi, got {obs_range}")
        self.obs_range = (lo, hi)
        self.parameter = parameter
        if self.mode not in (VERIFICATION, SYNTHESIS):
            raise ConfigurationError(f"unknown mode {self.mode!r}")

    # -- the simulator contract -----------------------------------------
    def transition(self, states, param, rng):
        raise NotImplementedError

    def is_unsafe(self, states):
        raise NotImplementedError

    def reward(self, traces, param):
        """Rewards of ``traces`` with shape ``(n, k + 1, state_dim)``."""
        raise NotImplementedError

    def initial_states(self, n, rng):
        raise NotImplementedError

    def initial_state_from(self, point):
        """Map a verification search point to a full initial state."""
        return point

    def expected_value(self, point):
        """Closed-form mean observation at ``point``, or None when unknown."""
        return None

    @property
    def certified_sigma(self) -> float:
        """Sub-Gaussian scale certified by boundedness: half the observation range."""
        lo, hi = self.obs_range
        return (hi - lo) / 2.0

    @property
    def dim(self) -> int:
        return self.search_space.dim

    # -- sampling --------------------------------------------------------
    def check_point(self, point):
        try:
            x = check_point(point, self.dim)
        except ValueError as exc:
            raise PointOutsideDomainError(str(exc)) from None
        if not self.search_space.contains(x):
            raise PointOutsideDomainError(f"point {x.tolist()} lies outside {self.search_space}")
        return x

    def sample(self, point, n, rng) -> SampleBatch:
        """Draw ``n`` independent observations at ``point``."""
        x = self.check_point(point)
        n = check_int(n, "n", min_value=1)
        return self._simulate(x, n, rng)

    def __call__(self, point, n, rng):
        return self.sample(point, n, rng).values

    def _simulate(self, point, n, rng) -> SampleBatch:
        if self.mode == VERIFICATION:
            return SampleBatch(_rollout_hits(self, point, n, rng))
        return _rollout_rewards(self, point, n, rng)

    def __repr__(self):
        return f"{type(self).__name__}(mode={self.mode!r}, search_space={self.search_space!r})"


def _rollout_hits(model, x0, n, rng):
    state0 = np.asarray(model.initial_state_from(x0), dtype=float)
    states = np.tile(state0, (n, 1))
    hit = np.asarray(model.is_unsafe(states), dtype=bool)
    active = np.flatnonzero(~hit)
    for step in range(1, model.time_bound + 1):
        if active.size == 0:
            break
        with np.errstate(over="ignore", invalid="ignore"):
            nxt = np.asarray(model.transition(states[active], model.parameter, rng), dtype=float)
        bad = ~np.all(np.isfinite(nxt), axis=1)
        if bad.any():
            row = int(active[np.flatnonzero(bad)[0]])
            raise SimulationFault(
                f"non-finite state at step {step} (sample {row})", step=step
            )
        states[active] = nxt
        newly = np.asarray(model.is_unsafe(nxt), dtype=bool)
        hit[active[newly]] = True
        active = active[~newly]
    return hit.astype(float)


def _rollout_rewards(model, beta, n, rng):
    k = model.time_bound
    states = np.asarray(model.initial_states(n, rng), dtype=float).reshape(n, model.state_dim)
    traces = np.empty((n, k + 1, model.state_dim))
    traces[:, 0] = states
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, k + 1):
            states = np.asarray(model.transition(states, beta, rng), dtype=float)
            traces[:, step] = states
        rewards = np.asarray(model.reward(traces, beta), dtype=float).reshape(n)
    if np.isnan(rewards).any():
        row = int(np.flatnonzero(np.isnan(rewards))[0])
        raise SimulationFault(f"non-finite reward (sample {row})")
    lo, hi = model.obs_range
    outside = (rewards < lo) | (rewards > hi)
    return SampleBatch(np.clip(rewards, lo, hi), int(outside.sum()))


def simulate_hit(model, x0, rng) -> Observation:
    """One Bernoulli observation: 1 if an execution from ``x0`` hits the unsafe set."""
    if model.mode != VERIFICATION:
        raise ConfigurationError(f"{model.name} is not a verification model")
    batch = model.sample(x0, 1, rng)
    return Observation(float(batch.values[0]), model.obs_range)


def simulate_reward(model, beta, rng) -> Observation:
    """One clamped reward observation of a rollout under parameter ``beta``."""
    if model.mode != SYNTHESIS:
        raise ConfigurationError(f"{model.name} is not a synthesis model")
    batch = model.sample(beta, 1, rng)
    return Observation(float(batch.values[0]), model.obs_range)


def batch_observe(model, point, batch_size, rng) -> np.ndarray:
    return model.sample(point, batch_size, rng).values


# -- registry ---------------------------------------------------------------

_REGISTRY: dict[str, Callable[..., NmcModel]] = {}

# Named in the literature but not specified in enough detail to build.
RESERVED_MODELS = ("ml-platoon", "merging", "detect-brake")


def register_model(name):
    def deco(factory):
        _REGISTRY[name] = factory
        return factory

    return deco


def _load_builtin():
    importlib.import_module(f"{__package__}.benchmarks")


def available_models():
    _load_builtin()
    return sorted(_REGISTRY)


def get_model(name, **params) -> NmcModel:
    """Instantiate a registered model; unknown parameter keys are rejected."""
    _load_builtin()
    if name in RESERVED_MODELS:
        raise UnknownModelError(f"model {name!r} is reserved but not implemented")
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownModelError(
            f"unknown model {name!r}; available: {', '.join(sorted(_REGISTRY))}"
        ) from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for model {name!r}: {exc}") from None
