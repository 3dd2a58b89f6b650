"""Deterministic seeding for every randomized code path.

The environment variable ``LSQFLOW_SEED`` overrides the default seed of
0, so randomized property checks stay reproducible while remaining
re-seedable from the outside.
"""

from __future__ import annotations

import os

ENV_VAR = "LSQFLOW_SEED"


def default_seed() -> int:
    raw = os.environ.get(ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
