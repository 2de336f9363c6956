"""Reservoir-computing exploration agent driven by k-NN negative density."""

from novex._core import (
    ConfigError,
    DivergenceError,
    __version__,
    config_hash,
    config_keys,
    export_maze,
    knn_negdensity,
    normalize_config,
    prim_maze,
    read_episode_log,
    run,
    summarize,
    sweep,
    wilson_maze,
)

__all__ = [
    "ConfigError",
    "DivergenceError",
    "__version__",
    "config_hash",
    "config_keys",
    "export_maze",
    "knn_negdensity",
    "normalize_config",
    "prim_maze",
    "read_episode_log",
    "run",
    "summarize",
    "sweep",
    "wilson_maze",
]
