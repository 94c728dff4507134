from __future__ import annotations

import numpy as np
import pytest

from logit_anchor import default_scene, preset


@pytest.fixture(scope="session")
def scene():
    return default_scene()


@pytest.fixture(scope="session")
def nodecay_scene():
    return preset("no-decay")


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
