import json
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)
quaternion_arrays = st.lists(finite, min_size=4, max_size=4).map(np.array)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def operator_file(tmp_path):
    """Write an operator spec JSON and return its path."""

    def write(spec, name="op.json"):
        path = tmp_path / name
        path.write_text(json.dumps(spec))
        return path

    return write


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
