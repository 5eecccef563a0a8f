"""Cuboid map rendering: leaf borders drawn as white pixels over the frame."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch
from .img_io import PixelBuffer
from .partition import PartitionTree

WHITE = 255


def border_mask(tree: PartitionTree) -> np.ndarray:
    """Boolean (height, width) mask of every leaf's one-pixel outer ring."""
    mask = np.zeros((tree.height, tree.width), dtype=bool)
    for leaf in tree.leaves():
        ring = leaf.slice(mask)
        ring[0, :] = True
        ring[-1, :] = True
        ring[:, 0] = True
        ring[:, -1] = True
    return mask


def render_overlay(buf: PixelBuffer, tree: PartitionTree) -> PixelBuffer:
    if (tree.width, tree.height) != buf.dims:
        raise DimensionMismatch(f"tree covers {tree.width}x{tree.height} but the frame is {buf.width}x{buf.height}")
    planes = buf.planes.copy()
    planes[:, border_mask(tree)] = WHITE
    return PixelBuffer(planes)
