import sys
from pathlib import Path

import pytest

import contexture.lp

# every solve in the test run re-checks its witness against the constraints
contexture.lp.VERIFY_WITNESSES = True

sys.path.insert(0, str(Path(__file__).parent))

from contexture.scenario import epr_scenario, lg_scenario  # noqa: E402


@pytest.fixture
def pr_box():
    return epr_scenario([1, 1, 1, -1])


@pytest.fixture
def tsirelson_like():
    c = "7/10"
    return epr_scenario([c, c, c, "-7/10"])


@pytest.fixture
def lg_classical():
    return lg_scenario([1, 1, 1])


@pytest.fixture
def lg_anticorrelated():
    return lg_scenario([-1, -1, -1])
