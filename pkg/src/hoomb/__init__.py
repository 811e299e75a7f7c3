"""Tree-bandit optimization with mini-batches for verifying and tuning stochastic systems."""

from .evaluation import (
    McEstimate,
    SweepRow,
    budget_sweep,
    grid_oracle,
    mc_estimate,
    riccati_gain,
    write_sweep_table,
)
from .exceptions import (
    ConfigurationError,
    ContractViolation,
    DegenerateRegionError,
    HoombError,
    NumericalFailureError,
    ObjectiveError,
    PointOutsideDomainError,
    SimulationFault,
    UnknownModelError,
)
from .hoo import HOOMB, HooMbConfig, HooMbOutcome, run_hoo_mb, simple_regret
from .meta import MetaConfig, MetaOutcome, ParallelHOOMB, rho_schedule, run_meta
from .model import NmcModel, available_models, get_model, register_model
from .tree import PartitionTree, Region, TreeNode

__version__ = "0.1.0"

__all__ = [
    "HOOMB", "ParallelHOOMB", "HooMbConfig", "HooMbOutcome", "MetaConfig", "MetaOutcome",
    "run_hoo_mb", "run_meta", "rho_schedule", "simple_regret",
    "PartitionTree", "Region", "TreeNode",
    "NmcModel", "available_models", "get_model", "register_model",
    "McEstimate", "SweepRow", "budget_sweep", "grid_oracle", "mc_estimate", "riccati_gain",
    "write_sweep_table",
    "HoombError", "ConfigurationError", "ContractViolation", "DegenerateRegionError",
    "NumericalFailureError", "ObjectiveError", "PointOutsideDomainError", "SimulationFault",
    "UnknownModelError",
]
