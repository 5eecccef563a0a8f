"""
Greedy hierarchical cuboid partitioning.

A frame is split by axis-aligned lines into two cuboids, choosing among the
(w - 1) vertical and (h - 1) horizontal candidates the one that minimises the
entropy objective of the split pair. Splitting continues on the leaf with the
largest objective gain until the requested number of cuboids exists.

Histograms are taken over the 8-bit luma plane (256 bins, base-2 entropy).
"""

from __future__ import annotations

import enum
import heapq
import itertools
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from .errors import EmptyHistogram, NTooLarge, NZero
from .img_io import PixelBuffer

logger = logging.getLogger(__name__)

BINS = 256
# objectives closer than this (relative) are treated as tied
_TIE_RTOL = 1e-10


def _log(event: str, level: int = logging.DEBUG, **fields) -> None:
    if logger.isEnabledFor(level):
        logger.log(level, json.dumps({"event": event, **fields}, ensure_ascii=False))


class Orientation(enum.IntEnum):
    VERTICAL = 0
    HORIZONTAL = 1


class Weighting(str, enum.Enum):
    PIXEL_WEIGHTED = "weighted"
    UNWEIGHTED = "unweighted"


@dataclass(frozen=True)
class ObjectiveConfig:
    weighting: Weighting = Weighting.PIXEL_WEIGHTED
    bins: int = BINS

    def __post_init__(self):
        object.__setattr__(self, "weighting", Weighting(self.weighting))
        if self.bins != BINS:
            raise ValueError(f"histogram bins are fixed at {BINS}, got {self.bins}")

    @classmethod
    def from_name(cls, name: str) -> "ObjectiveConfig":
        """'weighted' | 'unweighted'"""
        try:
            return cls(Weighting(str(name).lower()))
        except ValueError:
            raise ValueError(f"unknown objective mode {name!r} (expected weighted or unweighted)") from None


@dataclass(frozen=True)
class Cuboid:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1 or self.x < 0 or self.y < 0:
            raise ValueError(f"invalid cuboid {self}")

    @property
    def area(self) -> int:
        return self.w * self.h

    def extent(self, orientation: Orientation) -> int:
        """Size along the axis a split of this orientation cuts."""
        return self.w if orientation == Orientation.VERTICAL else self.h

    def can_split(self, orientation: Orientation, offset: int) -> bool:
        return 1 <= offset <= self.extent(orientation) - 1

    def split(self, orientation: Orientation, offset: int) -> tuple["Cuboid", "Cuboid"]:
        """(left, right) for vertical splits, (top, bottom) for horizontal ones."""
        if not self.can_split(orientation, offset):
            raise ValueError(f"split {Orientation(orientation).name}@{offset} out of bounds for {self}")
        if orientation == Orientation.VERTICAL:
            return (
                Cuboid(self.x, self.y, offset, self.h),
                Cuboid(self.x + offset, self.y, self.w - offset, self.h),
            )
        return (
            Cuboid(self.x, self.y, self.w, offset),
            Cuboid(self.x, self.y + offset, self.w, self.h - offset),
        )

    def slice(self, plane: np.ndarray) -> np.ndarray:
        """View of a (height, width) plane restricted to this cuboid."""
        return plane[self.y : self.y + self.h, self.x : self.x + self.w]

    def as_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}


@dataclass(frozen=True)
class SplitDecision:
    orientation: Orientation
    offset: int
    # not carried by the bitstream, so not part of equality
    objective: float = field(default=0.0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        if self.objective < 0:
            raise ValueError(f"objective must be non-negative, got {self.objective}")


@dataclass(frozen=True, eq=False)
class PartitionNode:
    cuboid: Cuboid
    split: Optional[SplitDecision] = None
    first: Optional["PartitionNode"] = None
    second: Optional["PartitionNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.split is None


@dataclass(frozen=True, eq=False)
class PartitionTree:
    """
    Binary split tree over a width x height frame.

    history holds the executed greedy splits in order; it is empty for trees
    that were not produced by partition() (e.g. decoded ones).
    """

    width: int
    height: int
    root: PartitionNode
    history: tuple[tuple[Cuboid, SplitDecision], ...] = ()

    @classmethod
    def from_splits(
        cls,
        width: int,
        height: int,
        splits: Mapping[Cuboid, SplitDecision],
        history: Sequence[tuple[Cuboid, SplitDecision]] = (),
    ) -> "PartitionTree":
        """Assemble a tree from a cuboid -> split mapping rooted at the full frame."""
        root = Cuboid(0, 0, width, height)
        order = []
        stack = [root]
        while stack:
            cuboid = stack.pop()
            order.append(cuboid)
            decision = splits.get(cuboid)
            if decision is not None:
                first, second = cuboid.split(decision.orientation, decision.offset)
                stack.append(second)
                stack.append(first)

        if len(order) != 2 * len(splits) + 1:
            raise ValueError("split mapping contains cuboids outside the tree")

        # reverse preorder: children are built before their parent
        nodes: dict[Cuboid, PartitionNode] = {}
        for cuboid in reversed(order):
            decision = splits.get(cuboid)
            if decision is None:
                nodes[cuboid] = PartitionNode(cuboid)
            else:
                first, second = cuboid.split(decision.orientation, decision.offset)
                nodes[cuboid] = PartitionNode(cuboid, decision, nodes.pop(first), nodes.pop(second))
        return cls(width, height, nodes[root], tuple(history))

    def walk(self) -> Iterator[PartitionNode]:
        """Depth-first preorder over all nodes, first child before second."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.second)
                stack.append(node.first)

    def leaves(self) -> list[Cuboid]:
        return [node.cuboid for node in self.walk() if node.is_leaf]

    def splits_preorder(self) -> list[tuple[Cuboid, SplitDecision]]:
        return [(node.cuboid, node.split) for node in self.walk() if not node.is_leaf]

    @property
    def n_leaves(self) -> int:
        return sum(1 for node in self.walk() if node.is_leaf)

    def depth(self) -> int:
        deepest = 0
        stack = [(self.root, 0)]
        while stack:
            node, level = stack.pop()
            deepest = max(deepest, level)
            if not node.is_leaf:
                stack.append((node.first, level + 1))
                stack.append((node.second, level + 1))
        return deepest

    def prefix(self, k: int) -> "PartitionTree":
        """Tree after the first k - 1 greedy splits (k leaves)."""
        if not 1 <= k <= len(self.history) + 1:
            raise ValueError(f"prefix size {k} outside 1..{len(self.history) + 1}")
        steps = self.history[: k - 1]
        return PartitionTree.from_splits(self.width, self.height, dict(steps), steps)

    def leaf_map(self) -> list[dict]:
        return [leaf.as_dict() for leaf in self.leaves()]

    def __eq__(self, other):
        if not isinstance(other, PartitionTree):
            return NotImplemented
        if (self.width, self.height) != (other.width, other.height):
            return False
        mine = [(n.cuboid, n.split) for n in self.walk()]
        theirs = [(n.cuboid, n.split) for n in other.walk()]
        return mine == theirs

    __hash__ = None


# --- luma ---
def luma_plane(buf: PixelBuffer) -> np.ndarray:
    """Real-valued luma, Y = 0.299 R + 0.587 G + 0.114 B for RGB frames."""
    if buf.channels == 1:
        return buf.planes[0].astype(np.float64)
    r, g, b = buf.planes.astype(np.float64)
    return 0.299 * r + 0.587 * g + 0.114 * b


def quantized_luma(buf: PixelBuffer) -> np.ndarray:
    """8-bit luma used for histograms, rounded half away from zero (exact integer arithmetic)."""
    if buf.channels == 1:
        return buf.planes[0]
    r, g, b = buf.planes.astype(np.int32)
    return ((299 * r + 587 * g + 114 * b + 500) // 1000).astype(np.uint8)


# --- entropy ---
def _xlog2x(counts: np.ndarray) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.float64)
    logs = np.log2(counts, out=np.zeros_like(counts), where=counts > 0)
    return counts * logs


def _entropy_mass(counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise (N * H, N) for a (k, BINS) count array."""
    totals = counts.sum(axis=-1)
    mass = _xlog2x(totals) - _xlog2x(counts).sum(axis=-1)
    return np.maximum(mass, 0.0), totals


def entropy(hist) -> float:
    """Shannon entropy in bits per sample of a 256-bin count histogram."""
    hist = np.asarray(hist, dtype=np.int64).reshape(1, -1)
    mass, totals = _entropy_mass(hist)
    if totals[0] < 1:
        raise EmptyHistogram("histogram has no samples")
    return float(mass[0] / totals[0])


def _pair_costs(left: np.ndarray, right: np.ndarray, cfg: ObjectiveConfig) -> np.ndarray:
    """
    Objective J of each candidate given its (k, bins) left/right histograms.

    All rows share one total; bins empty in that total are dropped first so the
    sums only run over symbols present in the cuboid.
    """
    if left.shape[0] == 0:
        return np.empty(0, dtype=np.float64)
    present = (left[0] + right[0]) > 0
    if not present.all():
        left, right = left[:, present], right[:, present]
    mass_left, n_left = _entropy_mass(left)
    mass_right, n_right = _entropy_mass(right)
    if cfg.weighting == Weighting.PIXEL_WEIGHTED:
        return mass_left + mass_right
    return mass_left / n_left + mass_right / n_right


def _histogram(samples: np.ndarray) -> np.ndarray:
    return np.bincount(samples.ravel(), minlength=BINS)


def split_objective(
    plane: np.ndarray,
    cuboid: Cuboid,
    orientation: Orientation,
    offset: int,
    cfg: Optional[ObjectiveConfig] = None,
) -> float:
    """J of a single candidate split, computed from scratch."""
    cfg = cfg or ObjectiveConfig()
    first, second = cuboid.split(orientation, offset)
    left = _histogram(first.slice(plane))[np.newaxis, :]
    right = _histogram(second.slice(plane))[np.newaxis, :]
    return float(_pair_costs(left, right, cfg)[0])


# --- split search ---
def _sweep(region: np.ndarray, cfg: ObjectiveConfig) -> tuple[np.ndarray, np.ndarray]:
    """
    Costs of every split between columns of region, plus the region histogram.

    One bincount builds all column histograms; their running sum is the left
    half of each candidate and total - running sum the right half.
    """
    height, width = region.shape
    keys = region.astype(np.intp) + (np.arange(width, dtype=np.intp) * BINS)[np.newaxis, :]
    column_hist = np.bincount(keys.ravel(), minlength=width * BINS).reshape(width, BINS)
    total = column_hist.sum(axis=0)
    present = total > 0
    left = np.cumsum(column_hist[:-1, present], axis=0)
    right = total[np.newaxis, present] - left
    return _pair_costs(left, right, cfg), total


def split_costs(
    plane: np.ndarray, cuboid: Cuboid, cfg: Optional[ObjectiveConfig] = None
) -> tuple[np.ndarray, np.ndarray]:
    """(vertical costs for i = 1..w-1, horizontal costs for j = 1..h-1)"""
    cfg = cfg or ObjectiveConfig()
    region = cuboid.slice(plane)
    vertical, _ = _sweep(region, cfg)
    horizontal, _ = _sweep(region.T, cfg)
    return vertical, horizontal


def _select(vertical: np.ndarray, horizontal: np.ndarray) -> Optional[SplitDecision]:
    """Lowest objective; ties go to vertical, then to the smaller offset."""
    costs = np.concatenate([vertical, horizontal])
    if costs.size == 0:
        return None
    best = float(costs.min())
    tolerance = _TIE_RTOL * max(1.0, abs(best))
    index = int(np.flatnonzero(costs <= best + tolerance)[0])
    if index < len(vertical):
        return SplitDecision(Orientation.VERTICAL, index + 1, float(costs[index]))
    return SplitDecision(Orientation.HORIZONTAL, index - len(vertical) + 1, float(costs[index]))


def _search(plane: np.ndarray, cuboid: Cuboid, cfg: ObjectiveConfig) -> tuple[Optional[SplitDecision], float]:
    """Best split of cuboid and the cuboid's own objective E (N*H or H)."""
    region = cuboid.slice(plane)
    vertical, total = _sweep(region, cfg)
    horizontal, _ = _sweep(region.T, cfg)
    mass, count = _entropy_mass(total[np.newaxis, :])
    own = float(mass[0]) if cfg.weighting == Weighting.PIXEL_WEIGHTED else float(mass[0] / count[0])
    return _select(vertical, horizontal), own


def best_split(plane: np.ndarray, cuboid: Cuboid, cfg: Optional[ObjectiveConfig] = None) -> Optional[SplitDecision]:
    """Entropy-minimising split of cuboid, or None for a 1x1 cuboid."""
    return _search(plane, cuboid, cfg or ObjectiveConfig())[0]


def best_split_naive(
    plane: np.ndarray, cuboid: Cuboid, cfg: Optional[ObjectiveConfig] = None
) -> Optional[SplitDecision]:
    """Reference search: every candidate's histograms are rebuilt from scratch."""
    cfg = cfg or ObjectiveConfig()
    costs = []
    for orientation in (Orientation.VERTICAL, Orientation.HORIZONTAL):
        lefts, rights = [], []
        for offset in range(1, cuboid.extent(orientation)):
            first, second = cuboid.split(orientation, offset)
            lefts.append(_histogram(first.slice(plane)))
            rights.append(_histogram(second.slice(plane)))
        left = np.array(lefts, dtype=np.int64).reshape(-1, BINS)
        right = np.array(rights, dtype=np.int64).reshape(-1, BINS)
        costs.append(_pair_costs(left, right, cfg))
    return _select(*costs)


# --- greedy partition ---
def _pop_earliest(heap: list) -> tuple:
    """
    Pop the earliest-created entry among those whose gain ties the largest one.

    Entries are (-gain, creation order, cuboid, decision); gains within the
    objective tie tolerance of the maximum count as equal.
    """
    top = heapq.heappop(heap)
    floor = -top[0] - _TIE_RTOL * max(1.0, abs(top[0]))
    tied = [top]
    while heap and -heap[0][0] >= floor:
        tied.append(heapq.heappop(heap))
    chosen = min(tied, key=lambda entry: entry[1])
    for entry in tied:
        if entry is not chosen:
            heapq.heappush(heap, entry)
    return chosen


def partition(
    buf: PixelBuffer,
    n: int,
    cfg: Optional[ObjectiveConfig] = None,
    *,
    workers: int = 1,
) -> PartitionTree:
    """
    Split buf into exactly n cuboids.

    Every leaf keeps its best split; the leaf with the largest gain
    E(leaf) - J(best split) is split next, ties going to the earliest-created
    leaf. With workers > 1 the two children of a split are searched
    concurrently; the result does not depend on workers.
    """
    cfg = cfg or ObjectiveConfig()
    width, height = buf.dims
    if n < 1:
        raise NZero(f"n must be at least 1, got {n}")
    if n > width * height:
        raise NTooLarge(f"n={n} exceeds the {width}x{height} pixel count {width * height}")

    started = time.perf_counter()
    plane = quantized_luma(buf)
    root = Cuboid(0, 0, width, height)
    heap: list = []
    created = itertools.count()
    history: list[tuple[Cuboid, SplitDecision]] = []

    def push(cuboid: Cuboid, found: tuple[Optional[SplitDecision], float]) -> None:
        decision, own = found
        order = next(created)
        if decision is None:
            return  # 1x1
        heapq.heappush(heap, (-(own - decision.objective), order, cuboid, decision))

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        push(root, _search(plane, root, cfg))
        while len(history) < n - 1:
            _, _, cuboid, decision = _pop_earliest(heap)
            history.append((cuboid, decision))
            children = cuboid.split(decision.orientation, decision.offset)
            if pool is not None:
                found = list(pool.map(lambda c: _search(plane, c, cfg), children))
            else:
                found = [_search(plane, c, cfg) for c in children]
            for child, result in zip(children, found):
                push(child, result)
    finally:
        if pool is not None:
            pool.shutdown()

    tree = PartitionTree.from_splits(width, height, dict(history), history)
    _log(
        "partition.complete",
        width=width,
        height=height,
        n=n,
        weighting=cfg.weighting.value,
        workers=workers,
        seconds=round(time.perf_counter() - started, 6),
    )
    return tree


def leaves_preorder(tree: PartitionTree) -> list[Cuboid]:
    return tree.leaves()
