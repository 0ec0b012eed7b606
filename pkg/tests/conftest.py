from __future__ import annotations

import os

import numpy as np
import pytest


def _seed() -> int:
    return int(os.environ.get("QLVAR_SEED", "0"))


@pytest.fixture
def rng() -> np.random.Generator:
    """Deterministic generator; override with QLVAR_SEED."""
    return np.random.default_rng(_seed())
