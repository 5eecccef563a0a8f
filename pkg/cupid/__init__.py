"""Hierarchical cuboid partitioning and coarse-frame coding."""

from .codec import CodedStream, deserialize, predicted_size_bits, read_stream_header, serialize
from .descriptors import DescriptorSet, compute_descriptors, leaf_means, reconstruct
from .img_io import PixelBuffer, load_image, load_ppm, save_image, save_ppm
from .metrics import INFINITE, MetricsRecord, analyze_sweep, mse, sweep_csv, y_psnr
from .overlay import render_overlay
from .partition import (
    Cuboid,
    ObjectiveConfig,
    Orientation,
    PartitionTree,
    SplitDecision,
    Weighting,
    best_split,
    best_split_naive,
    entropy,
    leaves_preorder,
    luma_plane,
    partition,
    quantized_luma,
    split_costs,
    split_objective,
)

__all__ = [
    "CodedStream",
    "Cuboid",
    "DescriptorSet",
    "INFINITE",
    "MetricsRecord",
    "ObjectiveConfig",
    "Orientation",
    "PartitionTree",
    "PixelBuffer",
    "SplitDecision",
    "Weighting",
    "analyze_sweep",
    "best_split",
    "best_split_naive",
    "compute_descriptors",
    "deserialize",
    "entropy",
    "leaf_means",
    "leaves_preorder",
    "load_image",
    "load_ppm",
    "luma_plane",
    "mse",
    "partition",
    "predicted_size_bits",
    "quantized_luma",
    "read_stream_header",
    "reconstruct",
    "render_overlay",
    "save_image",
    "save_ppm",
    "serialize",
    "split_costs",
    "split_objective",
    "sweep_csv",
    "y_psnr",
]
