import os

import numpy as np
import pytest
from hypothesis import settings

from graphdual.core.logger import setup_logging
from graphdual.engine.graph_core import builtin_graph


settings.register_profile("ci", settings(max_examples=200, deadline=None))
settings.register_profile("thorough", settings(max_examples=2000, deadline=None))
settings.register_profile("default", settings(max_examples=50, deadline=None))
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

# structlog writes to stderr so CLI tests can read reports from stdout
setup_logging("WARNING")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def c4():
    return builtin_graph("C4")


@pytest.fixture
def s2():
    # star with centre 1 and leaves 2, 3
    return builtin_graph("S2")


@pytest.fixture
def k4():
    return builtin_graph("K4")
