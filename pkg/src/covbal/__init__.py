"""Minimum-imbalance control selection for observational studies."""

from .balance2 import (Solve2Result, build_maxflow_graph, build_mcnf_graph, classify_3type,
                       recover_selection, solve_maxflow2, solve_mcnf2)
from .core import (Dataset, ImbalanceReport, LevelIndex, Sample, Selection, imbalance,
                   index_levels, intersection_counts, kappa_expand, materialize)
from .matchbal import Assignment, DistanceMatrix, assign_controls
from .oracle import (OracleResult, ThreeDMInstance, exact_min_imbalance, gen_3dm_dataset,
                     random_3dm_instance, random_instance)

__all__ = [
    "Assignment", "Dataset", "DistanceMatrix", "ImbalanceReport", "LevelIndex", "OracleResult",
    "Sample", "Selection", "Solve2Result", "ThreeDMInstance", "assign_controls",
    "build_maxflow_graph", "build_mcnf_graph", "classify_3type", "exact_min_imbalance",
    "gen_3dm_dataset", "imbalance", "index_levels", "intersection_counts", "kappa_expand",
    "materialize", "random_3dm_instance", "random_instance", "recover_selection",
    "solve_maxflow2", "solve_mcnf2",
]
