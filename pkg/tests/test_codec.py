import numpy as np
import pytest

from cupid.bitio import BitReader, BitWriter
from cupid.codec import (
    HEADER_BYTES,
    CodedStream,
    StreamHeader,
    deserialize,
    offset_bits,
    predicted_size_bits,
    read_stream_header,
    serialize,
)
from cupid.descriptors import DescriptorSet, compute_descriptors
from cupid.errors import (
    BadMagic,
    BadVersion,
    DimensionMismatch,
    FrameTooLarge,
    InfeasibleSplit,
    StreamError,
    TrailingData,
    TruncatedStream,
)
from cupid.partition import Cuboid, Orientation, PartitionTree, SplitDecision, partition

GOLDEN = bytes.fromhex("43555044 01 01 0002 0002 80 0afa".replace(" ", ""))


def _golden_tree():
    return PartitionTree.from_splits(2, 2, {Cuboid(0, 0, 2, 2): SplitDecision(Orientation.VERTICAL, 1)})


def _header(width, height, channels=1, version=1, magic=b"CUPD"):
    return magic + bytes([version, channels]) + width.to_bytes(2, "big") + height.to_bytes(2, "big")


def test_golden_fixture_matches_serializer(fixture_path):
    with open(fixture_path("golden_2x2_n2.cupd"), "rb") as f:
        data = f.read()
    stream = serialize(_golden_tree(), DescriptorSet(np.array([[10], [250]])))

    assert data == GOLDEN
    assert stream.data == GOLDEN
    assert len(stream) == 13
    assert stream.bits == 104 == predicted_size_bits(_golden_tree(), 1)


def test_golden_fixture_decodes(fixture_path):
    with open(fixture_path("golden_2x2_n2.cupd"), "rb") as f:
        tree, desc = deserialize(f.read())

    assert tree == _golden_tree()
    assert tree.leaves() == [Cuboid(0, 0, 1, 2), Cuboid(1, 0, 1, 2)]
    assert desc.values.tolist() == [[10], [250]]


def test_single_leaf_stream():
    tree = PartitionTree.from_splits(5, 3, {})
    stream = serialize(tree, DescriptorSet(np.array([[128]])))

    assert stream.data == _header(5, 3) + b"\x00\x80"
    assert stream.bits == 96 == predicted_size_bits(tree, 1)


def test_partitioned_frame_matches_golden(fixture_path):
    from cupid.img_io import load_image

    buf = load_image(fixture_path("two_column_2x2.pgm"))
    tree = partition(buf, 2)

    assert serialize(tree, compute_descriptors(buf, tree)).data == GOLDEN


@pytest.mark.parametrize("extent, width", [(2, 0), (3, 1), (4, 2), (5, 2), (6, 3), (9, 3), (10, 4), (65535, 16)])
def test_offset_bits(extent, width):
    assert offset_bits(extent) == width


def test_roundtrip_fuzz(rng, random_tree):
    for trial in range(1000):
        if trial % 10 == 0:
            # long thin frames exercise wide offset fields
            width, height = int(rng.integers(200, 2000)), int(rng.integers(1, 4))
        else:
            width, height = int(rng.integers(1, 41)), int(rng.integers(1, 41))
        n = int(rng.integers(1, min(width * height, 60) + 1))
        channels = 1 if trial % 2 else 3
        tree = random_tree(width, height, n)
        desc = DescriptorSet(rng.integers(0, 256, size=(n, channels)))

        stream = serialize(tree, desc)
        decoded_tree, decoded_desc = deserialize(stream)

        assert stream.bits == predicted_size_bits(tree, channels)
        assert decoded_tree == tree
        assert decoded_desc == desc
        assert serialize(decoded_tree, decoded_desc).data == stream.data


def test_serialize_is_deterministic(random_image):
    buf = random_image(30, 20, 3)
    streams = set()
    for _ in range(3):
        tree = partition(buf, 25)
        streams.add(serialize(tree, compute_descriptors(buf, tree)).data)

    assert len(streams) == 1


def test_read_stream_header():
    assert read_stream_header(GOLDEN) == StreamHeader(version=1, channels=1, width=2, height=2)


@pytest.mark.parametrize(
    "data, error",
    [
        (GOLDEN[:9], TruncatedStream),
        (b"", TruncatedStream),
        (b"CUPX" + GOLDEN[4:], BadMagic),
        (GOLDEN[:4] + b"\x02" + GOLDEN[5:], BadVersion),
        (GOLDEN[:5] + b"\x02" + GOLDEN[6:], StreamError),
        (_header(0, 2) + b"\x00", StreamError),
    ],
)
def test_bad_headers(data, error):
    with pytest.raises(error):
        deserialize(data)


def test_vertical_split_of_single_column():
    # internal node, vertical orientation, on a 1-pixel-wide frame
    with pytest.raises(InfeasibleSplit):
        deserialize(_header(1, 2) + b"\x80" + b"\x00\x00")


def test_offset_out_of_range():
    # 4x1 frame, vertical, offset field 0b11 -> offset 4
    with pytest.raises(InfeasibleSplit):
        deserialize(_header(4, 1) + b"\xb0" + b"\x00\x00")


def test_truncated_tree_and_descriptors():
    with pytest.raises(TruncatedStream):
        deserialize(_header(2, 2))
    with pytest.raises(TruncatedStream):
        deserialize(GOLDEN[:-1])


def test_trailing_bytes():
    with pytest.raises(TrailingData):
        deserialize(GOLDEN + b"\x00")


def test_stream_errors_are_value_errors():
    with pytest.raises(ValueError):
        deserialize(CodedStream(b"nope"))


def test_serialize_limits():
    wide = PartitionTree.from_splits(65536, 1, {})
    with pytest.raises(FrameTooLarge):
        serialize(wide, DescriptorSet(np.array([[0]])))
    with pytest.raises(DimensionMismatch):
        serialize(_golden_tree(), DescriptorSet(np.array([[1]])))


# --- bit packing ---
def test_bit_writer_msb_first():
    writer = BitWriter()
    writer.write_uint(5, 3)
    writer.write_bool(True)
    writer.write_uint(0, 0)

    assert writer.bits_written == 4
    assert writer.getvalue() == b"\xb0"


def test_bit_writer_spans_bytes():
    writer = BitWriter()
    writer.write_uint(0x1FF, 9)
    writer.write_uint(0x2A, 7)

    assert writer.getvalue() == bytes([0xFF, 0xAA])


def test_bit_writer_rejects_overflow():
    with pytest.raises(ValueError):
        BitWriter().write_uint(8, 3)


def test_bit_reader():
    reader = BitReader(b"\xb0\xff", start_bit=0)

    assert reader.read_uint(3) == 5
    assert reader.read_bool() is True
    assert reader.position == 4
    assert reader.align() == 1
    assert reader.read_uint(8) == 0xFF
    with pytest.raises(TruncatedStream):
        reader.read_bool()


def test_header_size():
    assert HEADER_BYTES == 10
