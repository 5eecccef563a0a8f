"""
.cupd bitstream: split indices plus descriptors.

Layout (version 1):
    header       "CUPD", version u8, channels u8, width u16 BE, height u16 BE  (10 bytes)
    tree         preorder, MSB-first: leaf -> 0; internal -> 1, orientation bit
                 (0 vertical, 1 horizontal), offset - 1 in ceil(log2(D - 1)) bits,
                 D = node extent along the split axis
    padding      zero bits up to a byte boundary
    descriptors  n * channels bytes, leaves in preorder
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Union

from .bitio import BitReader, BitWriter
from .descriptors import DescriptorSet
from .errors import (
    BadMagic,
    BadVersion,
    DimensionMismatch,
    FrameTooLarge,
    InfeasibleSplit,
    StreamError,
    TrailingData,
    TruncatedStream,
)
from .partition import Cuboid, Orientation, PartitionTree, SplitDecision

MAGIC = b"CUPD"
VERSION = 1
MAX_SIDE = 0xFFFF
_HEADER = struct.Struct(">4sBBHH")
HEADER_BYTES = _HEADER.size


@dataclass(frozen=True)
class StreamHeader:
    version: int
    channels: int
    width: int
    height: int


@dataclass(frozen=True)
class CodedStream:
    data: bytes

    def __len__(self) -> int:
        return len(self.data)

    @property
    def bits(self) -> int:
        return 8 * len(self.data)


def offset_bits(extent: int) -> int:
    """Field width of offset - 1 for a node extent D >= 2: ceil(log2(D - 1))."""
    return (extent - 2).bit_length()


def _tree_bits(tree: PartitionTree) -> int:
    bits = 0
    for node in tree.walk():
        bits += 1
        if not node.is_leaf:
            bits += 1 + offset_bits(node.cuboid.extent(node.split.orientation))
    return bits


def predicted_size_bits(tree: PartitionTree, channels: int) -> int:
    """Exact size in bits of serialize(tree, descriptors with `channels` channels)."""
    tree_bits = _tree_bits(tree)
    padding = -tree_bits % 8
    return 8 * HEADER_BYTES + tree_bits + padding + 8 * tree.n_leaves * channels


def serialize(tree: PartitionTree, desc: DescriptorSet) -> CodedStream:
    if tree.width > MAX_SIDE or tree.height > MAX_SIDE:
        raise FrameTooLarge(f"{tree.width}x{tree.height} exceeds the {MAX_SIDE} pixel header limit")
    n = tree.n_leaves
    if desc.n != n:
        raise DimensionMismatch(f"{desc.n} descriptors for a tree with {n} leaves")

    writer = BitWriter()
    for node in tree.walk():
        if node.is_leaf:
            writer.write_bool(False)
            continue
        split = node.split
        extent = node.cuboid.extent(split.orientation)
        writer.write_bool(True)
        writer.write_uint(int(split.orientation), 1)
        writer.write_uint(split.offset - 1, offset_bits(extent))

    header = _HEADER.pack(MAGIC, VERSION, desc.channels, tree.width, tree.height)
    return CodedStream(header + writer.getvalue() + desc.to_bytes())


def read_stream_header(data: bytes) -> StreamHeader:
    if len(data) < HEADER_BYTES:
        raise TruncatedStream(f"stream is {len(data)} bytes, header needs {HEADER_BYTES}")
    magic, version, channels, width, height = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r} (expected {MAGIC!r})")
    if version != VERSION:
        raise BadVersion(f"unsupported stream version {version}")
    if channels not in (1, 3):
        raise StreamError(f"unsupported channel count {channels}")
    if width < 1 or height < 1:
        raise StreamError(f"empty frame {width}x{height}")
    return StreamHeader(version, channels, width, height)


def deserialize(stream: Union[CodedStream, bytes]) -> tuple[PartitionTree, DescriptorSet]:
    data = bytes(stream.data if isinstance(stream, CodedStream) else stream)
    header = read_stream_header(data)

    reader = BitReader(data, start_bit=8 * HEADER_BYTES)
    splits: dict[Cuboid, SplitDecision] = {}
    leaves = 0
    stack = [Cuboid(0, 0, header.width, header.height)]
    while stack:
        cuboid = stack.pop()
        if not reader.read_bool():
            leaves += 1
            continue
        orientation = Orientation(reader.read_uint(1))
        extent = cuboid.extent(orientation)
        if extent < 2:
            raise InfeasibleSplit(
                f"{orientation.name.lower()} split of {cuboid.w}x{cuboid.h} cuboid at ({cuboid.x},{cuboid.y})"
            )
        offset = reader.read_uint(offset_bits(extent)) + 1
        if offset > extent - 1:
            raise InfeasibleSplit(f"offset {offset} out of range 1..{extent - 1} for {cuboid}")
        splits[cuboid] = SplitDecision(orientation, offset)
        first, second = cuboid.split(orientation, offset)
        stack.append(second)
        stack.append(first)

    start = reader.align()
    end = start + leaves * header.channels
    if len(data) < end:
        raise TruncatedStream(f"descriptor block needs {end} bytes, stream has {len(data)}")
    if len(data) > end:
        raise TrailingData(f"{len(data) - end} unexpected bytes after the descriptor block")

    tree = PartitionTree.from_splits(header.width, header.height, splits)
    return tree, DescriptorSet.from_bytes(data[start:end], header.channels)
