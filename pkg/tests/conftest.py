from __future__ import annotations

import numpy as np
import pytest

from aggrisk import engine

BACKENDS = ["compiled", "python"] if engine.HAVE_COMPILED else ["python"]


@pytest.fixture(params=BACKENDS)
def backend(request) -> str:
    return request.param


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260819)
