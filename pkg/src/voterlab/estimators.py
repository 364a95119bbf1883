"""Shared estimator utilities for the Monte Carlo experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SummaryStat:
    n_samples: int
    mean: float
    std_error: float
    ci95_lo: float
    ci95_hi: float


def summarize(samples) -> SummaryStat:
    """Mean, standard error and normal 95% confidence interval."""
    arr = np.asarray(samples, dtype=float)
    if arr.size < 2:
        raise ValueError("need at least 2 samples")
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(arr.size))
    return SummaryStat(arr.size, mean, se, mean - 1.96 * se, mean + 1.96 * se)


def cross_graph_variance(per_graph_means) -> float:
    """Sample variance of per-graph quenched means."""
    arr = np.asarray(per_graph_means, dtype=float)
    if arr.size < 2:
        raise ValueError("need at least 2 graphs")
    return float(arr.var(ddof=1))
