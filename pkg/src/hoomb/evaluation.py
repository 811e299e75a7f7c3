"""Monte-Carlo estimation, brute-force oracles and budget sweeps."""

from __future__ import annotations

import csv
import itertools
import time
from dataclasses import dataclass

import numpy as np

from ._random import EVALUATION_STREAM, ORACLE_STREAM, make_rng
from ._validation import check_int
from .exceptions import ConfigurationError, NumericalFailureError

# Keeps memory bounded for very large sample counts; part of the draw order.
_CHUNK = 100_000


@dataclass(frozen=True)
class McEstimate:
    mean: float
    sample_count: int
    std_error: float
    clamped: int = 0

    def __str__(self):
        return f"{self.mean!r} ± {self.std_error!r} (n={self.sample_count})"


def _draw(objective, point, n, rng):
    sample = getattr(objective, "sample", None)
    if callable(sample):
        batch = sample(point, n, rng)
        return np.asarray(batch.values, dtype=float), batch.clamped
    return np.asarray(objective(point, n, rng), dtype=float).reshape(-1), 0


def mc_estimate(model, point, samples, random_state=0) -> McEstimate:
    """Mean of ``samples`` independent observations at ``point``.

    ``random_state`` is a seed or a Generator.  With one sample the standard
    error is reported as 0.
    """
    samples = check_int(samples, "samples", min_value=1)
    rng = make_rng(random_state, EVALUATION_STREAM)
    chunks = []
    clamped = 0
    remaining = samples
    while remaining:
        n = min(remaining, _CHUNK)
        values, c = _draw(model, point, n, rng)
        chunks.append(values)
        clamped += c
        remaining -= n
    values = np.concatenate(chunks)
    # averaging residuals about the first draw keeps constant data exact
    resid = values - values[0]
    mean = float(values[0] + np.mean(resid))
    se = float(np.std(resid, ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return McEstimate(mean, samples, se, clamped)


def grid_points(region, resolution):
    """Cell midpoints of a uniform ``resolution``-per-dimension grid, C order."""
    axes = [lo + (np.arange(resolution) + 0.5) * (hi - lo) / resolution
            for lo, hi in zip(region.lower, region.upper)]
    return np.array(list(itertools.product(*axes)))


def grid_oracle(model, resolution, samples=None, random_state=0):
    """Brute-force argmax over grid cell midpoints.

    With ``samples=None`` the model's closed-form ``expected_value`` is used;
    otherwise every grid point gets its own seeded Monte-Carlo estimate.
    Returns ``(point, value)``; ties go to the first point in C order.
    """
    resolution = check_int(resolution, "resolution", min_value=1)
    region = model.search_space
    if region.dim > 3:
        raise ConfigurationError(f"grid oracle is limited to 3 dimensions, got {region.dim}")
    pts = grid_points(region, resolution)
    if samples is None:
        if model.expected_value(pts[0]) is None:
            raise ConfigurationError("model has no closed-form mean; pass samples")
        values = np.array([float(model.expected_value(p)) for p in pts])
    else:
        seed = 0 if random_state is None else random_state
        values = np.array([
            mc_estimate(model, p, samples, make_rng(seed, ORACLE_STREAM, j)).mean
            for j, p in enumerate(pts)
        ])
    j = int(np.argmax(values))
    return pts[j], float(values[j])


def riccati_gain(A, B, Q, R, horizon):
    """Finite-horizon discrete Riccati recursion for ``u_t = K_t x_t``.

    Returns ``(K_0, [K_0, ..., K_{T-1}])``.
    """
    A, B, Q, R = (np.atleast_2d(np.asarray(M, dtype=float)) for M in (A, B, Q, R))
    horizon = check_int(horizon, "horizon", min_value=1)
    P = Q.copy()
    gains = []
    for _ in range(horizon):
        S = R + B.T @ P @ B
        if np.linalg.cond(S) > 1e12:
            raise NumericalFailureError("R + B'PB is singular")
        K = -np.linalg.solve(S, B.T @ P @ A)
        P = Q + A.T @ P @ A + A.T @ P @ B @ K
        P = 0.5 * (P + P.T)
        gains.append(K)
    gains.reverse()
    return gains[0], gains


@dataclass(frozen=True)
class SweepRow:
    budget: int
    median: float
    q25: float
    q75: float
    nodes: int
    queries_used: int
    wall_time_s: float


SWEEP_COLUMNS = ("budget", "median", "q25", "q75", "nodes", "queries_used", "wall_time_s")


def budget_sweep(objective, budgets, repeats=1, seed=0, domain=None, **meta_params):
    """Run the parallel optimizer for every (budget, repeat) and aggregate.

    Repeat ``r`` uses seed ``seed + r``.  ``nodes`` is the per-instance tree size
    and ``queries_used`` the total per run (optimizer plus evaluation).
    """
    from .meta import ParallelHOOMB

    budgets = [check_int(b, "budget", min_value=1) for b in budgets]
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ConfigurationError("budgets must be strictly increasing")
    repeats = check_int(repeats, "repeats", min_value=1)
    rows = []
    for budget in budgets:
        start = time.perf_counter()
        estimates, nodes, queries = [], set(), set()
        for r in range(repeats):
            est = ParallelHOOMB(total_budget=budget, random_state=seed + r, **meta_params)
            est.fit(objective, domain)
            estimates.append(est.best_estimate_)
            nodes.update(inst.n_nodes for inst in est.instances_)
            queries.add(est.total_queries_)
        q25, med, q75 = np.percentile(estimates, [25, 50, 75])
        rows.append(SweepRow(budget, float(med), float(q25), float(q75), max(nodes),
                             max(queries), time.perf_counter() - start))
    return rows


def write_sweep_table(rows, fp, delimiter=","):
    writer = csv.writer(fp, delimiter=delimiter, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([repr(getattr(row, c)) if isinstance(getattr(row, c), float)
                         else getattr(row, c) for c in SWEEP_COLUMNS])
