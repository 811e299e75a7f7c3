"""Parallel search over the smoothness parameter with K HOO-MB instances.

Instance ``i`` (1-based) runs with ``nu = nu_max`` and
``rho = rho_max ** (K / (K - i + 1))`` on ``budget // K`` queries.  Each returned
point is then scored by a fresh Monte-Carlo estimate and the best one wins.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from ._random import EVALUATION_STREAM, OPTIMIZER_STREAM, make_rng
from ._validation import check_int, check_real, check_seed
from .evaluation import McEstimate, mc_estimate
from .exceptions import ConfigurationError, HoombError, ObjectiveError
from .hoo import HOOMB, HooMbOutcome, _resolve_domain


def rho_schedule(rho_max, K):
    """``[rho_max ** (K / (K - i + 1)) for i = 1..K]``, strictly decreasing."""
    rho_max = check_real(rho_max, "rho_max", low=0.0, high=1.0, low_open=True, high_open=True)
    K = check_int(K, "K", min_value=1)
    return [rho_max ** (K / (K - i + 1)) for i in range(1, K + 1)]


def resolve_n_jobs(n_jobs, n_tasks):
    """``None``/0 means one worker per CPU; never more workers than tasks."""
    if n_jobs is None or n_jobs == 0:
        n_jobs = os.cpu_count() or 1
    n_jobs = check_int(n_jobs, "n_jobs", min_value=1)
    return max(1, min(n_jobs, n_tasks))


@dataclass
class Candidate:
    point: np.ndarray
    estimate: float
    rho: float
    std_error: float
    instance: int


@dataclass
class MetaOutcome:
    candidates: list
    best_point: np.ndarray
    best_estimate: float
    best_index: int
    total_queries: int
    optimizer_queries: int
    eval_queries: int
    unspent_budget: int
    instances: list = field(default_factory=list, repr=False)


def _run_instance(objective, domain, i, seed, budget, batch_size, sigma, nu, rho, eval_samples):
    """Optimize with instance ``i``'s stream and score its candidate.

    Seeds depend only on ``(seed, i)``, never on execution order.
    """
    est = HOOMB(budget=budget, batch_size=batch_size, sigma=sigma, nu=nu, rho=rho,
                random_state=make_rng(seed, OPTIMIZER_STREAM, i))
    try:
        est.fit(objective, domain)
        score = mc_estimate(objective, est.best_point_, eval_samples,
                            make_rng(seed, EVALUATION_STREAM, i))
    except HoombError as exc:
        raise ObjectiveError(f"instance {i}: {exc}", instance=i) from exc
    return HooMbOutcome.from_estimator(est, keep_tree=False), score


class ParallelHOOMB(BaseEstimator):
    """K HOO-MB instances over a rho schedule plus Monte-Carlo final selection.

    Attributes after ``fit``: ``candidates_``, ``best_point_``,
    ``best_estimate_``, ``best_index_``, ``instances_`` (per-instance
    :class:`~hoomb.hoo.HooMbOutcome` without trees), ``total_queries_``.
    """

    def __init__(self, total_budget=20000, n_instances=4, nu_max=1.0, rho_max=0.6,
                 sigma=0.5, batch_size=100, eval_samples=500, random_state=None,
                 n_jobs=1):
        self.total_budget = total_budget
        self.n_instances = n_instances
        self.nu_max = nu_max
        self.rho_max = rho_max
        self.sigma = sigma
        self.batch_size = batch_size
        self.eval_samples = eval_samples
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _validate_params(self):
        N = check_int(self.total_budget, "total_budget", min_value=1)
        K = check_int(self.n_instances, "n_instances", min_value=1)
        b = check_int(self.batch_size, "batch_size", min_value=1)
        if N // K < b:
            raise ConfigurationError(
                f"per-instance budget {N // K} is smaller than batch_size {b}"
            )
        nu = check_real(self.nu_max, "nu_max", low=0.0, low_open=True)
        sigma = check_real(self.sigma, "sigma", low=0.0, low_open=True)
        M = check_int(self.eval_samples, "eval_samples", min_value=1)
        seed = check_seed(self.random_state)
        if isinstance(seed, np.random.Generator):
            raise ConfigurationError("random_state must be an integer seed")
        return N, K, b, nu, rho_schedule(self.rho_max, K), sigma, M, seed

    def fit(self, objective, domain=None, order=None):
        """Run all instances; ``order`` permutes execution (results do not change)."""
        N, K, b, nu, rhos, sigma, M, seed = self._validate_params()
        region = _resolve_domain(objective, domain)
        per_instance = N // K
        args = [(objective, region, i, seed, per_instance, b, sigma, nu, rhos[i - 1], M)
                for i in range(1, K + 1)]
        order = list(range(K)) if order is None else [int(j) for j in order]
        if sorted(order) != list(range(K)):
            raise ConfigurationError(f"order must be a permutation of range({K})")

        workers = resolve_n_jobs(self.n_jobs, K)
        results = [None] * K
        if workers == 1:
            for j in order:
                results[j] = _run_instance(*args[j])
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = {j: pool.submit(_run_instance, *args[j]) for j in order}
                for j, fut in futures.items():
                    results[j] = fut.result()

        self.instances_ = [r[0] for r in results]
        scores: list[McEstimate] = [r[1] for r in results]
        self.candidates_ = [
            Candidate(out.best_point, s.mean, rhos[j], s.std_error, j + 1)
            for j, (out, s) in enumerate(zip(self.instances_, scores))
        ]
        estimates = np.array([c.estimate for c in self.candidates_])
        best = int(np.argmax(estimates))  # first maximum wins ties
        self.best_index_ = best
        self.best_point_ = self.candidates_[best].point
        self.best_estimate_ = float(estimates[best])
        self.optimizer_queries_ = sum(o.queries_used for o in self.instances_)
        self.eval_queries_ = K * M
        self.total_queries_ = self.optimizer_queries_ + self.eval_queries_
        self.unspent_budget_ = N - K * per_instance
        self.n_clamped_ = sum(o.clamped for o in self.instances_) + sum(s.clamped for s in scores)
        return self

    def outcome(self) -> MetaOutcome:
        return MetaOutcome(
            candidates=self.candidates_,
            best_point=self.best_point_,
            best_estimate=self.best_estimate_,
            best_index=self.best_index_,
            total_queries=self.total_queries_,
            optimizer_queries=self.optimizer_queries_,
            eval_queries=self.eval_queries_,
            unspent_budget=self.unspent_budget_,
            instances=self.instances_,
        )


@dataclass(frozen=True)
class MetaConfig:
    total_budget: int
    instances: int = 4
    nu_max: float = 1.0
    rho_max: float = 0.6
    sigma: float = 0.5
    batch_size: int = 100
    eval_samples_per_candidate: int = 500
    seed: int = 0

    def estimator(self, **overrides) -> ParallelHOOMB:
        params = dict(total_budget=self.total_budget, n_instances=self.instances,
                      nu_max=self.nu_max, rho_max=self.rho_max, sigma=self.sigma,
                      batch_size=self.batch_size,
                      eval_samples=self.eval_samples_per_candidate, random_state=self.seed)
        params.update(overrides)
        return ParallelHOOMB(**params)


def run_meta(objective, domain, cfg: MetaConfig, n_jobs=1) -> MetaOutcome:
    return cfg.estimator(n_jobs=n_jobs).fit(objective, domain).outcome()
