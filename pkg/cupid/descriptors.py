"""Per-cuboid mean descriptors and the coarse frame rebuilt from them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .img_io import PixelBuffer, as_samples
from .partition import PartitionTree


@dataclass(frozen=True, eq=False)
class DescriptorSet:
    """
    values: uint8 array of shape (n, channels), row i holding m^(i) for the
    i-th leaf in preorder.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] not in (1, 3):
            raise ValueError(f"descriptor array must be (n, 1|3), got shape {values.shape}")
        values = as_samples(values, "descriptor values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    def to_bytes(self) -> bytes:
        """Leaf-major, channel-minor bytes."""
        return self.values.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, channels: int) -> "DescriptorSet":
        return cls(np.frombuffer(data, dtype=np.uint8).reshape(-1, channels))

    def __eq__(self, other):
        if not isinstance(other, DescriptorSet):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(np.array_equal(self.values, other.values))

    __hash__ = None


def _check_frame(tree: PartitionTree, width: int, height: int) -> None:
    if (tree.width, tree.height) != (width, height):
        raise DimensionMismatch(
            f"tree covers {tree.width}x{tree.height} but the frame is {width}x{height}"
        )


def _leaf_sums(buf: PixelBuffer, tree: PartitionTree) -> tuple[np.ndarray, np.ndarray]:
    """(per-leaf per-channel sample sums as (n, channels) int64, per-leaf areas)"""
    _check_frame(tree, buf.width, buf.height)
    leaves = tree.leaves()
    xs = np.array([c.x for c in leaves], dtype=np.intp)
    ys = np.array([c.y for c in leaves], dtype=np.intp)
    x2 = xs + np.array([c.w for c in leaves], dtype=np.intp)
    y2 = ys + np.array([c.h for c in leaves], dtype=np.intp)

    # summed-area table with a zero border row/column
    table = np.zeros((buf.channels, buf.height + 1, buf.width + 1), dtype=np.int64)
    table[:, 1:, 1:] = buf.planes.astype(np.int64).cumsum(axis=1).cumsum(axis=2)
    sums = table[:, y2, x2] - table[:, ys, x2] - table[:, y2, xs] + table[:, ys, xs]
    areas = (x2 - xs) * (y2 - ys)
    return sums.T, areas.astype(np.int64)


def leaf_means(buf: PixelBuffer, tree: PartitionTree) -> np.ndarray:
    """Unrounded per-leaf per-channel means, shape (n, channels)."""
    sums, areas = _leaf_sums(buf, tree)
    return sums / areas[:, np.newaxis]


def compute_descriptors(buf: PixelBuffer, tree: PartitionTree) -> DescriptorSet:
    """m_j^(i) = round(mean of channel j over leaf i), halves rounded away from zero."""
    sums, areas = _leaf_sums(buf, tree)
    areas = areas[:, np.newaxis]
    # non-negative integers: floor((2s + a) / 2a) == round-half-up(s / a)
    return DescriptorSet((2 * sums + areas) // (2 * areas))


def label_map(tree: PartitionTree) -> np.ndarray:
    """(height, width) array holding each pixel's leaf index in preorder."""
    labels = np.empty((tree.height, tree.width), dtype=np.int64)
    for index, leaf in enumerate(tree.leaves()):
        leaf.slice(labels)[...] = index
    return labels


def reconstruct(tree: PartitionTree, desc: DescriptorSet, dims: tuple[int, int]) -> PixelBuffer:
    """Coarse frame R_co: every pixel of leaf i takes descriptor i."""
    width, height = dims
    _check_frame(tree, width, height)
    n = tree.n_leaves
    if desc.n != n:
        raise DimensionMismatch(f"{desc.n} descriptors for a tree with {n} leaves")
    planes = np.empty((desc.channels, height, width), dtype=np.uint8)
    for leaf, value in zip(tree.leaves(), desc.values):
        for channel in range(desc.channels):
            leaf.slice(planes[channel])[...] = value[channel]
    return PixelBuffer(planes)
