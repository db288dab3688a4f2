import sys
from pathlib import Path

import numpy as np
import pytest

from rle.decompose import ImageBuffer

FIXTURES = Path(__file__).parent / "fixtures"


def bridge_command(mode: str):
    return [sys.executable, str(FIXTURES / "fake_bridge.py"), mode]


def checker_image(side_px=48, grid=3, seed=0) -> ImageBuffer:
    """Image of grid x grid flat-colored patches with distinct colors."""
    rng = np.random.default_rng(seed)
    colors = rng.integers(0, 256, size=(grid * grid, 3), dtype=np.uint8)
    # make colors pairwise distinct so patches are identifiable by content
    while len({tuple(c) for c in colors}) < grid * grid:
        colors = rng.integers(0, 256, size=(grid * grid, 3), dtype=np.uint8)
    ph = side_px // grid
    arr = np.empty((side_px, side_px, 3), dtype=np.uint8)
    for r in range(grid):
        for c in range(grid):
            arr[r * ph:(r + 1) * ph, c * ph:(c + 1) * ph] = colors[r * grid + c]
    return ImageBuffer.from_array(arr)


@pytest.fixture
def small_image():
    rng = np.random.default_rng(7)
    return ImageBuffer.from_array(
        rng.integers(0, 256, size=(24, 24, 3), dtype=np.uint8)
    )
