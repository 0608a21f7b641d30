"""Generalized leverage scores and deterministic column selection."""

__version__ = "0.1.0"

from .linalg import (
    SvdFactors,
    orthonormal_basis,
    principal_angle_cosines,
    projection_energy,
    svd,
)
from .leverage import (
    IndexSet,
    LeverageScores,
    StatisticalLeverages,
    generalized_leverage_scores,
    scaled_leverage_update,
    statistical_leverages,
)
from .selection import (
    ColumnSelection,
    CcaResult,
    GcssResult,
    choose_singular_set,
    gcss,
    greedy_gcss,
    random_baseline,
    select_columns_to_mass,
    sparse_cca,
)
from .bounds import (
    BoundReport,
    cca_bound_value,
    gcss_bound_value,
    powerlaw_column_count,
    verify_general_bound,
    verify_topk_bound,
)
from .instances import InstancePair, altschuler_instance, powerlaw_instance, random_lowrank_instance

__all__ = [
    "SvdFactors", "svd", "orthonormal_basis", "projection_energy", "principal_angle_cosines",
    "IndexSet", "LeverageScores", "StatisticalLeverages", "generalized_leverage_scores",
    "statistical_leverages", "scaled_leverage_update",
    "ColumnSelection", "GcssResult", "CcaResult", "choose_singular_set", "select_columns_to_mass",
    "gcss", "sparse_cca", "greedy_gcss", "random_baseline",
    "BoundReport", "verify_topk_bound", "verify_general_bound", "gcss_bound_value",
    "cca_bound_value", "powerlaw_column_count",
    "InstancePair", "altschuler_instance", "powerlaw_instance", "random_lowrank_instance",
]
