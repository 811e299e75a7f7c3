"""Hierarchical optimistic optimization with mini-batches (HOO-MB).

Each iteration walks the partition tree along the larger B-values, inserts the
child it runs into, queries the midpoint of that child's cell ``batch_size``
times, folds the batch into every node on the path and then recomputes U and B
for the whole tree.  Once the budget is spent the deepest node with the largest
B-value is returned.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._random import OPTIMIZER_STREAM, make_rng
from ._validation import check_int, check_real, check_seed
from .exceptions import ConfigurationError, ContractViolation, HoombError, ObjectiveError
from .tree import PartitionTree, Region, as_region


def n_batches_for(budget: int, batch_size: int) -> int:
    """Number of mini-batches needed to spend ``budget`` queries, overshoot included."""
    return (budget - 1) // batch_size + 1


def _as_sampler(objective):
    """Adapt a model or a plain ``f(point, n, rng)`` callable to ``(values, clamped)``."""
    sample = getattr(objective, "sample", None)
    if callable(sample):
        def draw(x, n, rng):
            batch = sample(x, n, rng)
            return np.asarray(batch.values, dtype=float), batch.clamped
    elif callable(objective):
        def draw(x, n, rng):
            return np.asarray(objective(x, n, rng), dtype=float).reshape(-1), 0
    else:
        raise TypeError(f"objective must be callable or expose sample(), got {type(objective)}")
    return draw


def _resolve_domain(objective, domain) -> Region:
    if domain is None:
        domain = getattr(objective, "search_space", None)
        if domain is None:
            raise ConfigurationError("no domain given and the objective has no search_space")
    return as_region(domain)


class HOOMB(BaseEstimator):
    """Maximize a noisy black-box objective over a hyperrectangle.

    Parameters
    ----------
    budget : int
        Simulator-call budget N.  ``(N - 1) // batch_size + 1`` batches are run,
        so up to ``batch_size - 1`` extra calls may be spent.
    batch_size : int
        Observations drawn per selected cell.
    sigma : float
        Sub-Gaussian scale of a single observation.
    nu, rho : float
        Smoothness parameters; the cell-size term at depth h is ``nu * rho**h``.
    random_state : int or numpy.random.Generator
        Seed of the Philox stream handed to the objective.
    trace : bool
        Keep one record per batch in ``trace_``.

    Attributes
    ----------
    best_point_ : ndarray
        Midpoint of the returned cell.
    best_node_label_ : tuple
        ``(h, i)`` label of the returned cell.
    tree_ : PartitionTree
    n_queries_ : int
    n_batches_ : int
    max_depth_ : int
    n_clamped_ : int
        Observations the objective had to clamp into its declared range.
    """

    def __init__(self, budget=1000, batch_size=100, sigma=0.5, nu=1.0, rho=0.5,
                 random_state=None, trace=False):
        self.budget = budget
        self.batch_size = batch_size
        self.sigma = sigma
        self.nu = nu
        self.rho = rho
        self.random_state = random_state
        self.trace = trace

    def _validate_params(self):
        b = check_int(self.batch_size, "batch_size", min_value=1)
        n = check_int(self.budget, "budget", min_value=1)
        if n < b:
            raise ConfigurationError(f"budget ({n}) must be at least batch_size ({b})")
        sigma = check_real(self.sigma, "sigma", low=0.0, low_open=True)
        nu = check_real(self.nu, "nu", low=0.0, low_open=True)
        rho = check_real(self.rho, "rho", low=0.0, high=1.0, low_open=True, high_open=True)
        seed = check_seed(self.random_state)
        return n, b, sigma, nu, rho, seed

    def fit(self, objective, domain=None):
        """Run the optimizer against ``objective``.

        ``objective`` is either an :class:`~hoomb.model.NmcModel` or a callable
        ``f(point, n, rng)`` returning ``n`` observations.  ``domain`` defaults to
        the objective's ``search_space``.
        """
        budget, b, sigma, nu, rho, seed = self._validate_params()
        region = _resolve_domain(objective, domain)
        draw = _as_sampler(objective)
        rng = make_rng(seed, OPTIMIZER_STREAM, 0)

        n_batches = n_batches_for(budget, b)
        tree = PartitionTree(region, capacity=n_batches + 1)
        records = [] if self.trace else None
        clamped = 0
        for m in range(1, n_batches + 1):
            path, label = tree.traverse()
            new = tree.insert(label)
            x = tree.midpoint(new)
            try:
                y, c = draw(x, b, rng)
            except HoombError as exc:
                raise ObjectiveError(f"objective failed in batch {m}: {exc}", batch_index=m) from exc
            except Exception as exc:
                raise ObjectiveError(
                    f"objective failed in batch {m}: {type(exc).__name__}: {exc}", batch_index=m
                ) from exc
            if y.shape[0] != b:
                raise ContractViolation(f"batch {m}: objective returned {y.shape[0]} values, expected {b}")
            clamped += c
            path.append(new)
            tree.update_path(path, y, b)
            tree.batch_count += 1
            tree.query_count += b
            tree.backup_all(sigma, nu, rho, b)
            if records is not None:
                records.append({
                    "m": m,
                    "node": list(label),
                    "point": x.tolist(),
                    "batch_mean": float(np.mean(y)),
                    "max_depth": tree.max_depth,
                })

        best = tree.best_node()
        self.tree_ = tree
        self.best_node_label_ = tree.labels[best]
        self.best_point_ = tree.midpoint(best)
        self.best_b_value_ = float(tree.b_value[best])
        self.n_batches_ = tree.batch_count
        self.n_queries_ = tree.query_count
        self.max_depth_ = tree.max_depth
        self.n_nodes_ = tree.n_nodes
        self.n_clamped_ = clamped
        self.trace_ = records
        return self

    def write_trace(self, fp):
        """Write the per-batch trace as JSON lines."""
        check_is_fitted(self, "tree_")
        if self.trace_ is None:
            raise ConfigurationError("fit with trace=True to record a trace")
        for rec in self.trace_:
            fp.write(json.dumps(rec) + "\n")


@dataclass(frozen=True)
class HooMbConfig:
    budget: int
    batch_size: int = 100
    sigma: float = 0.5
    nu: float = 1.0
    rho: float = 0.5
    seed: int = 0

    def estimator(self, **overrides) -> HOOMB:
        params = dict(budget=self.budget, batch_size=self.batch_size, sigma=self.sigma,
                      nu=self.nu, rho=self.rho, random_state=self.seed)
        params.update(overrides)
        return HOOMB(**params)


@dataclass
class HooMbOutcome:
    best_point: np.ndarray
    best_node_label: tuple
    n_nodes: int
    max_depth: int
    batch_count: int
    queries_used: int
    clamped: int = 0
    tree: Optional[PartitionTree] = field(default=None, repr=False)

    @classmethod
    def from_estimator(cls, est: HOOMB, keep_tree=True):
        return cls(
            best_point=est.best_point_,
            best_node_label=est.best_node_label_,
            n_nodes=est.n_nodes_,
            max_depth=est.max_depth_,
            batch_count=est.n_batches_,
            queries_used=est.n_queries_,
            clamped=est.n_clamped_,
            tree=est.tree_ if keep_tree else None,
        )


def run_hoo_mb(objective, domain, cfg: HooMbConfig) -> HooMbOutcome:
    est = cfg.estimator().fit(objective, domain)
    return HooMbOutcome.from_estimator(est)


def simple_regret(true_optimum, achieved):
    """Gap between the optimum value and the value at the returned point."""
    return float(true_optimum) - float(achieved)
