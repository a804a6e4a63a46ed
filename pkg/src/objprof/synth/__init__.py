"""Synthetic workloads, ground truth and the brute-force attribution oracle."""
from .fuzz import random_config, random_trace
from .generator import (
    KINDS, SCENARIOS, GroundTruth, ParameterError, Scenario, bloat, catalog, deal,
    gc_churn, generate, mixed, numa, stride,
)
from .oracle import SiteTally, Summary, diff_summaries, oracle_attribute, summarize
from .truthio import dumps_truth, loads_truth

__all__ = [
    "KINDS", "SCENARIOS", "GroundTruth", "ParameterError", "Scenario", "SiteTally",
    "Summary", "bloat", "catalog", "deal", "diff_summaries", "dumps_truth", "gc_churn",
    "generate", "loads_truth", "mixed", "numa", "oracle_attribute", "random_config",
    "random_trace", "stride", "summarize",
]
