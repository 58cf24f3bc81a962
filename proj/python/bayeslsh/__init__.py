# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The BayesLSH Authors
"""Python interface to the BayesLSH similarity search library."""

from ._bayeslsh import (
    ContractViolation,
    Corpus,
    Error,
    GuardError,
    IoError,
    NumericError,
    ParseError,
    SearchConfig,
    UsageError,
    generate_synthetic,
    ground_truth,
    map_estimate,
    min_matches,
    ml_estimate,
    num_tables,
    prune_probability,
    required_hashes,
)
from ._bayeslsh import search as _search

__all__ = [
    "ContractViolation",
    "Corpus",
    "Error",
    "GuardError",
    "IoError",
    "NumericError",
    "ParseError",
    "SearchConfig",
    "UsageError",
    "generate_synthetic",
    "ground_truth",
    "map_estimate",
    "min_matches",
    "ml_estimate",
    "num_tables",
    "prune_probability",
    "required_hashes",
    "search",
]


def search(corpus, evaluate=False, **options):
    """Run candidate generation and verification.

    Keyword options are SearchConfig attributes, e.g. threshold=0.7,
    verifier="bayeslsh-lite", seed=3. Returns a dict with "pairs" as
    (i, j, estimate, exact, low_confidence, hashes_used) tuples.
    """
    config = SearchConfig()
    for key, value in options.items():
        if not hasattr(config, key):
            raise TypeError(f"unknown search option '{key}'")
        setattr(config, key, value)
    return _search(corpus, config, evaluate)
