"""Concrete benchmark models, registered under ``random-motion``, ``sharp``,
``sl-platoon`` and ``lqr``.

Parameter blocks accepted by :func:`hoomb.model.get_model`:

random-motion
    ``step_sigma`` (0.1), ``radius`` (4.0), ``time_bound`` (10)
sharp
    ``s`` (0.1), ``p_max`` (0.3)
sl-platoon
    ``num_cars`` (3), ``time_bound`` (10), ``nominal_gap`` (4.0),
    ``localization_error`` (1.0), ``speed`` (10.0), ``accel`` (2.0), ``dt`` (0.5),
    ``close_gap`` (2.0), ``far_gap`` (6.0), ``action_probs``, ``leader_probs``
lqr
    ``horizon`` (20), ``noise_sigma`` (0.01), ``gain_bounds`` ((-1.0, 0.0)),
    ``initial_state`` ("circle" or a fixed 2-vector), ``cost_cap`` (25.0),
    ``A``, ``B``, ``Q``, ``R``
"""

from __future__ import annotations

import numpy as np

from ._validation import check_int, check_real
from .exceptions import ConfigurationError
from .model import (
    SYNTHESIS,
    VERIFICATION,
    NmcModel,
    SampleBatch,
    _rollout_rewards,
    register_model,
)


class RandomMotion(NmcModel):
    """A particle on the plane taking Gaussian steps; unsafe outside a disc.

    Initial set is ``[1, 2] x [2, 3]``.  With ``radius=2`` every initial state is
    already unsafe, so the default radius is 4.
    """

    name = "random-motion"
    mode = VERIFICATION

    def __init__(self, step_sigma=0.1, radius=4.0, time_bound=10):
        self.step_sigma = check_real(step_sigma, "step_sigma", low=0.0)
        self.radius = check_real(radius, "radius", low=0.0, low_open=True)
        super().__init__([(1.0, 2.0), (2.0, 3.0)], time_bound, state_dim=2)

    def transition(self, states, param, rng):
        return states + rng.normal(0.0, self.step_sigma, size=states.shape)

    def is_unsafe(self, states):
        return np.sum(states ** 2, axis=1) > self.radius ** 2


class SharpConceptual(NmcModel):
    """Hitting probability given in closed form, with a peak of width ``sqrt(s)``.

    ``p(x) = p_max * exp(-|x - (0.5, 0.5)|^2 / s)`` on the unit square; each
    observation is a Bernoulli draw with that mean and there are no dynamics.
    """

    name = "sharp"
    mode = VERIFICATION

    def __init__(self, s=0.1, p_max=0.3):
        self.s = check_real(s, "s", low=0.0, low_open=True)
        self.p_max = check_real(p_max, "p_max", low=0.0, high=1.0, low_open=True)
        super().__init__([(0.0, 1.0), (0.0, 1.0)], time_bound=1, state_dim=2)

    def expected_value(self, point):
        x = np.asarray(point, dtype=float)
        r2 = (x[..., 0] - 0.5) ** 2 + (x[..., 1] - 0.5) ** 2
        return self.p_max * np.exp(-r2 / self.s)

    def _simulate(self, point, n, rng):
        p = float(self.expected_value(point))
        return SampleBatch((rng.random(n) < p).astype(float))


# Artifact-chosen action table for the single-lane platoon: for each gap band
# (close, medium, far) the probabilities of (accelerate, cruise, brake).
DEFAULT_ACTION_PROBS = ((0.0, 0.3, 0.7), (0.2, 0.6, 0.2), (0.6, 0.3, 0.1))
DEFAULT_LEADER_PROBS = (0.2, 0.4, 0.4)


class SLPlatoon(NmcModel):
    """``num_cars`` cars on one lane, each picking accelerate/cruise/brake at random.

    State is ``(positions, speeds)`` with the leader first.  Followers choose
    their action from a probability table keyed by the gap to their predecessor;
    the leader uses ``leader_probs``.  A collision (any gap <= 0) is unsafe.
    The search space perturbs each car's nominal position by up to
    ``localization_error``.
    """

    name = "sl-platoon"
    mode = VERIFICATION

    def __init__(self, num_cars=3, time_bound=10, nominal_gap=4.0,
                 localization_error=1.0, speed=10.0, accel=2.0, dt=0.5,
                 close_gap=2.0, far_gap=6.0, action_probs=DEFAULT_ACTION_PROBS,
                 leader_probs=DEFAULT_LEADER_PROBS):
        self.num_cars = check_int(num_cars, "num_cars", min_value=2)
        self.nominal_gap = check_real(nominal_gap, "nominal_gap", low=0.0, low_open=True)
        err = check_real(localization_error, "localization_error", low=0.0, low_open=True)
        self.speed = check_real(speed, "speed", low=0.0)
        self.accel = check_real(accel, "accel", low=0.0)
        self.dt = check_real(dt, "dt", low=0.0, low_open=True)
        self.close_gap = check_real(close_gap, "close_gap")
        self.far_gap = check_real(far_gap, "far_gap")
        if self.far_gap < self.close_gap:
            raise ConfigurationError("far_gap must be >= close_gap")
        table = np.asarray(action_probs, dtype=float)
        leader = np.asarray(leader_probs, dtype=float)
        if table.shape != (3, 3) or leader.shape != (3,):
            raise ConfigurationError("action_probs must be 3x3 and leader_probs length 3")
        if np.any(table < 0) or np.any(leader < 0) or not (
            np.allclose(table.sum(axis=1), 1.0) and np.isclose(leader.sum(), 1.0)
        ):
            raise ConfigurationError("action probabilities must be non-negative and sum to 1")
        self._cum = np.cumsum(table, axis=1)
        self._leader_cum = np.cumsum(leader)
        self.nominal_positions = -self.nominal_gap * np.arange(self.num_cars, dtype=float)
        bounds = [(-err, err)] * self.num_cars
        super().__init__(bounds, time_bound, state_dim=2 * self.num_cars)

    def initial_state_from(self, point):
        pos = self.nominal_positions + np.asarray(point, dtype=float)
        return np.concatenate([pos, np.full(self.num_cars, self.speed)])

    def gaps(self, states):
        pos = states[:, : self.num_cars]
        return pos[:, :-1] - pos[:, 1:]

    def is_unsafe(self, states):
        return np.any(self.gaps(states) <= 0.0, axis=1)

    def transition(self, states, param, rng):
        m = self.num_cars
        pos, vel = states[:, :m], states[:, m:]
        gaps = self.gaps(states)
        band = np.where(gaps < self.close_gap, 0, np.where(gaps < self.far_gap, 1, 2))
        cum = np.empty((states.shape[0], m, 3))
        cum[:, 0] = self._leader_cum
        cum[:, 1:] = self._cum[band]
        u = rng.random((states.shape[0], m))
        # action 0 accelerate, 1 cruise, 2 brake
        action = (u[..., None] >= cum[..., :2]).sum(axis=-1)
        new_vel = np.maximum(vel + self.accel * self.dt * (1 - action), 0.0)
        new_pos = pos + new_vel * self.dt
        return np.concatenate([new_pos, new_vel], axis=1)


LQR_A = ((1.0, 0.1), (0.0, 1.0))
LQR_I = ((1.0, 0.0), (0.0, 1.0))


class LQRSynthesis(NmcModel):
    """Search a constant feedback gain ``u = K x`` for a noisy linear system.

    The parameter is ``K`` flattened row-major.  The observation is the negated
    quadratic cost of one rollout, clamped to ``[-cost_cap, 0]``; rollouts that
    blow up count as ``-cost_cap``.  Initial states are drawn uniformly on the
    unit circle unless ``initial_state`` fixes one.  The default box
    ``[-1, 0]^4`` surrounds the stabilizing diagonal gains; wider boxes mostly
    add divergent gains whose capped cost hides where the optimum is.
    """

    name = "lqr"
    mode = SYNTHESIS

    def __init__(self, horizon=20, noise_sigma=0.01, gain_bounds=(-1.0, 0.0),
                 initial_state="circle", cost_cap=25.0, A=LQR_A, B=LQR_I, Q=LQR_I,
                 R=LQR_I):
        self.A = np.asarray(A, dtype=float)
        self.B = np.asarray(B, dtype=float)
        self.Q = np.asarray(Q, dtype=float)
        self.R = np.asarray(R, dtype=float)
        nx, nu = self.B.shape
        if self.A.shape != (nx, nx) or self.Q.shape != (nx, nx) or self.R.shape != (nu, nu):
            raise ConfigurationError("inconsistent LQR matrix shapes")
        self.noise_sigma = check_real(noise_sigma, "noise_sigma", low=0.0)
        self.cost_cap = check_real(cost_cap, "cost_cap", low=0.0, low_open=True)
        if isinstance(initial_state, str):
            if initial_state != "circle":
                raise ConfigurationError(f"unknown initial_state {initial_state!r}")
            if nx != 2:
                raise ConfigurationError("circle initial states need a 2-D state")
            self.x0 = None
        else:
            self.x0 = np.asarray(initial_state, dtype=float).reshape(nx)
        lo, hi = (float(v) for v in gain_bounds)
        super().__init__([(lo, hi)] * (nu * nx), check_int(horizon, "horizon", min_value=1),
                         state_dim=nx, obs_range=(-self.cost_cap, 0.0))
        self.horizon = self.time_bound

    def gain(self, beta):
        return np.asarray(beta, dtype=float).reshape(self.B.shape[1], self.A.shape[0])

    def initial_states(self, n, rng):
        if self.x0 is not None:
            return np.tile(self.x0, (n, 1))
        theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
        return np.column_stack([np.cos(theta), np.sin(theta)])

    def transition(self, states, param, rng):
        u = states @ self.gain(param).T
        noise = rng.normal(0.0, self.noise_sigma, size=states.shape)
        return states @ self.A.T + u @ self.B.T + noise

    def cost(self, traces, beta):
        K = self.gain(beta)
        x = traces[:, :-1]
        u = x @ K.T
        stage = np.einsum("nti,ij,ntj->n", x, self.Q, x) + np.einsum("nti,ij,ntj->n", u, self.R, u)
        final = np.einsum("ni,ij,nj->n", traces[:, -1], self.Q, traces[:, -1])
        total = stage + final
        return np.where(np.isfinite(total), total, np.inf)

    def reward(self, traces, beta):
        return -self.cost(traces, beta)

    def evaluate_gain(self, beta, n, rng) -> SampleBatch:
        """Observations under any gain, including ones outside the search box."""
        beta = np.asarray(beta, dtype=float).reshape(-1)
        if beta.shape[0] != self.dim:
            raise ConfigurationError(f"gain has {beta.shape[0]} entries, expected {self.dim}")
        return _rollout_rewards(self, beta, check_int(n, "n", min_value=1), rng)


@register_model("random-motion")
def make_random_motion(step_sigma=0.1, radius=4.0, time_bound=10):
    return RandomMotion(step_sigma=step_sigma, radius=radius, time_bound=time_bound)


@register_model("sharp")
def make_sharp_conceptual(s=0.1, p_max=0.3, time_bound=None):
    # no dynamics, so the time bound has nothing to act on
    return SharpConceptual(s=s, p_max=p_max)


@register_model("sl-platoon")
def make_sl_platoon(num_cars=3, **params):
    return SLPlatoon(num_cars=num_cars, **params)


@register_model("lqr")
def make_lqr(horizon=20, noise_sigma=0.01, time_bound=None, **params):
    if time_bound is not None:
        horizon = time_bound
    return LQRSynthesis(horizon=horizon, noise_sigma=noise_sigma, **params)
