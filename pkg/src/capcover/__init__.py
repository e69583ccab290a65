"""Capacitated covering via knapsack-cover LPs and lifted multi-cover rounding,
applied to preemptive scheduling with general completion-time costs."""
from __future__ import annotations

from .errors import (
    InfeasibleError,
    InstanceError,
    InternalConsistencyError,
    SizeLimitError,
    StageError,
)
from .gsp import GspInstance, parse_gsp, preprocess
from .kclp import CapCoverInstance, parse_capcover, solve_kc_lp
from .pipeline import PipelineLedger, run_pipeline

__all__ = [
    "CapCoverInstance",
    "GspInstance",
    "InfeasibleError",
    "InstanceError",
    "InternalConsistencyError",
    "PipelineLedger",
    "SizeLimitError",
    "StageError",
    "parse_capcover",
    "parse_gsp",
    "preprocess",
    "run_pipeline",
    "solve_kc_lp",
]
