import os

import numpy as np
import pytest

from cupid.descriptors import DescriptorSet
from cupid.img_io import PixelBuffer
from cupid.partition import Cuboid, Orientation, PartitionTree, SplitDecision

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture
def fixture_path():
    def _path(name):
        return os.path.join(FIXTURES, name)

    return _path


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_image(rng, width, height, channels=1, levels=256):
    """Random frame; a small `levels` produces many equal-objective candidates."""
    palette = np.linspace(0, 255, levels).round().astype(np.uint8)
    indices = rng.integers(0, levels, size=(channels, height, width))
    return PixelBuffer(palette[indices])


def make_tree(rng, width, height, n):
    """Random tree with n leaves built by splitting random splittable leaves."""
    root = Cuboid(0, 0, width, height)
    leaves = [root]
    splits = {}
    while len(leaves) < n:
        candidates = [c for c in leaves if c.area >= 2]
        cuboid = candidates[rng.integers(len(candidates))]
        orientations = [o for o in Orientation if cuboid.extent(o) >= 2]
        orientation = orientations[rng.integers(len(orientations))]
        offset = int(rng.integers(1, cuboid.extent(orientation)))
        splits[cuboid] = SplitDecision(orientation, offset)
        leaves.remove(cuboid)
        leaves.extend(cuboid.split(orientation, offset))
    return PartitionTree.from_splits(width, height, splits)


def make_descriptors(rng, n, channels):
    return DescriptorSet(rng.integers(0, 256, size=(n, channels)))


@pytest.fixture
def random_image(rng):
    def _make(width, height, channels=1, levels=256):
        return make_image(rng, width, height, channels, levels)

    return _make


@pytest.fixture
def random_tree(rng):
    def _make(width, height, n):
        return make_tree(rng, width, height, n)

    return _make


@pytest.fixture
def two_tone():
    """4x4 gray: left two columns 0, right two columns 255."""
    plane = np.zeros((4, 4), dtype=np.uint8)
    plane[:, 2:] = 255
    return PixelBuffer(plane[np.newaxis])


@pytest.fixture
def constant_image():
    def _make(width, height, value=77, channels=1):
        return PixelBuffer(np.full((channels, height, width), value, dtype=np.uint8))

    return _make
