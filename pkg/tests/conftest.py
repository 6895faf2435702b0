import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mfspec.presets import preset  # noqa: E402

SEC61 = [0.5, 0.2, 0.3, 0.0]
SEC62 = [0.4, 0.1, 0.04, 0.06, 0.34, 0.06, 0.0, 0.0]
SEC63 = [0.35, 0.14, 0.01, 0.03, 0.025, 0.325, 0.11, 0.01, 0.0, 0.0]


@pytest.fixture(scope="session")
def presets():
    return {name: preset(name) for name in ("sec61", "sec62", "sec63")}


@pytest.fixture(scope="session")
def ntrans3():
    return preset("nTrans(3)")
