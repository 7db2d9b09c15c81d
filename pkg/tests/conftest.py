import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from photonfield.lattice import GridSpec  # noqa: E402


@pytest.fixture
def grid():
    """Default lattice: N = 128, L = 20 pi, so dp = 0.1 and p = 1 sits at k = 10."""
    return GridSpec(128, 20 * math.pi)


@pytest.fixture
def small_grid():
    return GridSpec(16, 2 * math.pi)
