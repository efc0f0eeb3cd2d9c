"""Optimal privacy-preserving announcements of automated decision rules."""

from .dataset import QidGroup, WeightedDataset, load_dataset, partition_by_qid
from .fidelity import FidelitySpec, bounds_for, bounds_from_alpha, bounds_from_delta
from .solver import solve_group, solve_master, tradeoff_sweep

__version__ = "0.1.0"

__all__ = [
    "FidelitySpec",
    "QidGroup",
    "WeightedDataset",
    "bounds_for",
    "bounds_from_alpha",
    "bounds_from_delta",
    "load_dataset",
    "partition_by_qid",
    "solve_group",
    "solve_master",
    "tradeoff_sweep",
]
