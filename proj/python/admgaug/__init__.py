"""Causal-graph data augmentation with instance-weighted gradient boosted trees."""

from ._core import (
    Error,
    GbrtConfig,
    GbrtModel,
    augment,
    default_grid,
    fit,
    graph_summary,
    grid_search_cv,
    run_benchmark,
    sample_sem,
    silverman_bandwidth,
    train,
)

__all__ = [
    "Error",
    "GbrtConfig",
    "GbrtModel",
    "augment",
    "default_grid",
    "fit",
    "graph_summary",
    "grid_search_cv",
    "run_benchmark",
    "sample_sem",
    "silverman_bandwidth",
    "train",
]
