import json
import shutil

import pytest

from app.config import settings
from cupid.codec import deserialize
from cupid.img_io import load_image, save_image
from cupid.metrics import format_db, y_psnr
from jobs.cli import EXIT_IO, EXIT_OK, EXIT_STREAM, EXIT_USAGE, main

GOLDEN = bytes.fromhex("43555044010100020002800afa")
HUGE_FRAME = bytes.fromhex("435550440101ffffffff0080")


@pytest.fixture
def two_column(tmp_path, fixture_path):
    path = tmp_path / "frame.pgm"
    shutil.copy(fixture_path("two_column_2x2.pgm"), path)
    return path


def test_encode_golden(two_column, tmp_path, capsys):
    out = tmp_path / "frame.cupd"

    assert main(["encode", str(two_column), "--n", "2", "-o", str(out)]) == EXIT_OK
    assert out.read_bytes() == GOLDEN
    assert capsys.readouterr().out.strip() == "n=2 bits=104 y_psnr=inf"


def test_encode_writes_reconstruction(tmp_path, random_image):
    source = tmp_path / "frame.ppm"
    save_image(random_image(12, 10, 3), source)
    out, recon = tmp_path / "frame.cupd", tmp_path / "coarse.png"

    assert main(["encode", str(source), "--n", "9", "-o", str(out), "--recon", str(recon)]) == EXIT_OK
    coarse = load_image(recon)
    tree, desc = deserialize(out.read_bytes())
    assert coarse.dims == (12, 10)
    assert tree.n_leaves == 9
    assert desc.channels == 3


def test_encode_is_deterministic(tmp_path, random_image):
    source = tmp_path / "frame.ppm"
    save_image(random_image(20, 16, 3), source)

    for name in ("a.cupd", "b.cupd"):
        assert main(["encode", str(source), "--n", "40", "--objective", "unweighted", "-o", str(tmp_path / name)]) == 0
    assert (tmp_path / "a.cupd").read_bytes() == (tmp_path / "b.cupd").read_bytes()


@pytest.mark.parametrize("n", ["0", "5"])
def test_encode_n_out_of_range(two_column, tmp_path, n, capsys):
    code = main(["encode", str(two_column), "--n", n, "-o", str(tmp_path / "x.cupd")])

    assert code == EXIT_USAGE
    assert not (tmp_path / "x.cupd").exists()
    assert capsys.readouterr().err


def test_missing_and_unreadable_input(tmp_path):
    garbage = tmp_path / "bad.pgm"
    garbage.write_bytes(b"P5\n2 2\n255\n\x00")

    assert main(["encode", str(tmp_path / "absent.ppm"), "--n", "1", "-o", str(tmp_path / "o.cupd")]) == EXIT_IO
    assert main(["encode", str(garbage), "--n", "1", "-o", str(tmp_path / "o.cupd")]) == EXIT_IO


def test_missing_required_flag_exits_with_usage():
    with pytest.raises(SystemExit) as exc:
        main(["encode", "frame.ppm"])
    assert exc.value.code == EXIT_USAGE


def test_decode_default_output(tmp_path):
    stream = tmp_path / "frame.cupd"
    stream.write_bytes(GOLDEN)

    assert main(["decode", str(stream)]) == EXIT_OK
    assert (tmp_path / "frame.pgm").read_bytes() == b"P5\n2 2\n255\n" + bytes([10, 250, 10, 250])


def test_decode_corrupt_stream(tmp_path, capsys):
    stream = tmp_path / "frame.cupd"
    stream.write_bytes(GOLDEN + b"\x00")

    assert main(["decode", str(stream), "-o", str(tmp_path / "out.pgm")]) == EXIT_STREAM
    assert capsys.readouterr().err.strip() == "1 unexpected bytes after the descriptor block"
    assert not (tmp_path / "out.pgm").exists()



def test_decode_truncated_stream(tmp_path, capsys):
    stream = tmp_path / "frame.cupd"
    stream.write_bytes(GOLDEN[:-1])

    assert main(["decode", str(stream), "-o", str(tmp_path / "out.pgm")]) == EXIT_STREAM
    assert capsys.readouterr().err.strip() == "descriptor block needs 13 bytes, stream has 12"
    assert not (tmp_path / "out.pgm").exists()


def test_decode_rejects_frame_over_pixel_limit(tmp_path, capsys):
    stream = tmp_path / "huge.cupd"
    stream.write_bytes(HUGE_FRAME)

    assert main(["decode", str(stream), "-o", str(tmp_path / "out.pgm")]) == EXIT_USAGE
    assert "65535x65535" in capsys.readouterr().err
    assert not (tmp_path / "out.pgm").exists()


def test_decode_pixel_limit_from_config(tmp_path, monkeypatch):
    stream = tmp_path / "frame.cupd"
    stream.write_bytes(GOLDEN)

    monkeypatch.setitem(settings.config["server"], "max_decode_pixels", 3)
    assert main(["decode", str(stream)]) == EXIT_USAGE
    monkeypatch.setitem(settings.config["server"], "max_decode_pixels", 4)
    assert main(["decode", str(stream)]) == EXIT_OK


def test_decode_unknown_output_extension(tmp_path, capsys):
    stream = tmp_path / "frame.cupd"
    stream.write_bytes(GOLDEN)

    assert main(["decode", str(stream), "-o", str(tmp_path / "out.xyz")]) == EXIT_IO
    assert capsys.readouterr().err.startswith("❌")


def test_encode_then_decode_reports_same_y_psnr(tmp_path, random_image, capsys):
    source, out, decoded = tmp_path / "frame.ppm", tmp_path / "frame.cupd", tmp_path / "coarse.ppm"
    save_image(random_image(16, 12, 3), source)

    assert main(["encode", str(source), "--n", "11", "-o", str(out)]) == EXIT_OK
    printed = capsys.readouterr().out.strip().split("y_psnr=")[1]
    assert main(["decode", str(out), "-o", str(decoded)]) == EXIT_OK
    assert printed == format_db(y_psnr(load_image(source), load_image(decoded)))

def test_decode_missing_stream(tmp_path):
    assert main(["decode", str(tmp_path / "absent.cupd")]) == EXIT_IO


def test_partition_map_and_overlay(two_column, tmp_path):
    leaves, overlay = tmp_path / "leaves.json", tmp_path / "overlay.pgm"

    assert main(["partition", str(two_column), "--n", "2", "--map", str(leaves), "--overlay", str(overlay)]) == 0
    assert json.loads(leaves.read_text(encoding="utf-8")) == [
        {"x": 0, "y": 0, "w": 1, "h": 2},
        {"x": 1, "y": 0, "w": 1, "h": 2},
    ]
    # every pixel of a 1-pixel-wide leaf lies on its border
    assert load_image(overlay).planes.min() == 255


def test_partition_needs_an_output(two_column):
    assert main(["partition", str(two_column), "--n", "2"]) == EXIT_USAGE


def test_analyze_to_stdout(two_column, capsys):
    assert main(["analyze", str(two_column), "--n-list", "1,2,4", "-o", "-"]) == EXIT_OK

    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,bits,encode_time_s,y_psnr_db"
    assert [line.split(",")[0] for line in lines[1:]] == ["1", "2", "4"]
    assert [line.split(",")[1] for line in lines[1:]] == ["96", "104", "128"]
    assert lines[2].endswith(",inf")


def test_analyze_with_frame_rate(two_column, tmp_path):
    out = tmp_path / "sweep.csv"

    assert main(["analyze", str(two_column), "--n-list", "2", "--fps", "30", "-o", str(out)]) == EXIT_OK
    header, row = out.read_text(encoding="utf-8").splitlines()
    assert header == "n,bits,encode_time_s,y_psnr_db,bitrate_kbps"
    assert row.startswith("2,104,")
    assert row.endswith(",inf,3.120000")


@pytest.mark.parametrize("n_list", ["1,,2", "a", "1,9"])
def test_analyze_bad_n_list(two_column, n_list):
    assert main(["analyze", str(two_column), "--n-list", n_list]) == EXIT_USAGE
