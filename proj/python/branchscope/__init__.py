"""Co-clustering and citation dependency analysis of a publication corpus."""

from ._core import (
    ConfigError,
    DataError,
    StageError,
    fit,
    generate,
    modularity,
    paper_credit,
    porter_stem,
    propagate,
    run_pipeline,
    scan_k,
    tokenize,
    zscore,
)

__all__ = [
    "ConfigError",
    "DataError",
    "StageError",
    "fit",
    "generate",
    "modularity",
    "paper_credit",
    "porter_stem",
    "propagate",
    "run_pipeline",
    "scan_k",
    "tokenize",
    "zscore",
]
