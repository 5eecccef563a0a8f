#!/usr/bin/env python3
"""
CuPID cuboid 분할 / 부호화 커맨드라인 도구

사용법:
    python main.py partition frame.ppm --n 70 --overlay map.ppm --map leaves.json
    python main.py encode frame.ppm --n 300 -o frame.cupd --recon coarse.ppm
    python main.py decode frame.cupd -o coarse.ppm
    python main.py analyze frame.ppm --n-list 100,200,300 -o sweep.csv

종료 코드:
    0  성공
    1  입출력 실패 (파일 없음, 읽을 수 없는 이미지 등)
    2  잘못된 인자 / 범위 (n=0, n > X*Y, 복호화 픽셀 한도 초과 등)
    3  손상된 .cupd 스트림
"""

import argparse
import json
import logging
import os
import sys

from app.config.settings import get_default_n_list
from app.services.pipeline import (
    decode_stream,
    encode_image,
    objective_config,
    parse_n_list,
    partition_map,
    run_analyze,
)
from cupid.errors import FrameTooLarge, ImageFormatError, PartitionError, StreamError
from cupid.img_io import load_image, save_image
from cupid.metrics import sweep_csv

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_STREAM = 3


def _fail(message: str, code: int) -> int:
    print(f"❌ {message}", file=sys.stderr)
    return code


def _load_input(path):
    """입력 이미지 로드; 실패 시 (None, exit code)"""
    try:
        return load_image(path), EXIT_OK
    except (OSError, ImageFormatError) as e:
        return None, _fail(f"입력 이미지를 읽을 수 없습니다: {path} ({e})", EXIT_IO)


def _write_bytes(path, data: bytes) -> None:
    with open(path, "wb") as f:
        f.write(data)


def cmd_encode(args) -> int:
    buf, code = _load_input(args.input)
    if buf is None:
        return code
    try:
        cfg = objective_config(args.objective)
        result = encode_image(buf, args.n, cfg)
    except (PartitionError, ValueError) as e:
        return _fail(str(e), EXIT_USAGE)

    try:
        _write_bytes(args.output, result.stream.data)
        if args.recon:
            save_image(result.recon, args.recon)
    except (OSError, ValueError) as e:
        return _fail(f"출력 파일 저장 실패: {e}", EXIT_IO)

    print(result.summary())
    return EXIT_OK


def _default_decode_path(stream_path: str, channels: int) -> str:
    stem = os.path.splitext(stream_path)[0]
    return stem + (".pgm" if channels == 1 else ".ppm")


def cmd_decode(args) -> int:
    try:
        with open(args.input, "rb") as f:
            data = f.read()
    except OSError as e:
        return _fail(f"스트림 파일을 읽을 수 없습니다: {e}", EXIT_IO)

    try:
        frame = decode_stream(data)
    except StreamError as e:
        # 디코더 메시지 그대로 출력
        print(str(e), file=sys.stderr)
        return EXIT_STREAM
    except FrameTooLarge as e:
        return _fail(str(e), EXIT_USAGE)

    output = args.output or _default_decode_path(args.input, frame.channels)
    try:
        save_image(frame, output)
    except (OSError, ValueError) as e:
        return _fail(f"출력 이미지 저장 실패: {e}", EXIT_IO)

    print(f"✅ {frame.width}x{frame.height} ({frame.channels}ch) -> {output}", file=sys.stderr)
    return EXIT_OK


def cmd_partition(args) -> int:
    if not args.overlay and not args.map:
        return _fail("--overlay 또는 --map 중 하나는 필요합니다", EXIT_USAGE)

    buf, code = _load_input(args.input)
    if buf is None:
        return code
    try:
        cfg = objective_config(args.objective)
        tree, overlay = partition_map(buf, args.n, cfg)
    except (PartitionError, ValueError) as e:
        return _fail(str(e), EXIT_USAGE)

    try:
        if args.overlay:
            save_image(overlay, args.overlay)
        if args.map:
            with open(args.map, "w", encoding="utf-8") as f:
                json.dump(tree.leaf_map(), f)
    except (OSError, ValueError) as e:
        return _fail(f"출력 파일 저장 실패: {e}", EXIT_IO)

    print(f"✅ {tree.n_leaves} cuboids (depth {tree.depth()})", file=sys.stderr)
    return EXIT_OK


def cmd_analyze(args) -> int:
    buf, code = _load_input(args.input)
    if buf is None:
        return code
    try:
        n_list = parse_n_list(args.n_list) if args.n_list else get_default_n_list()
        cfg = objective_config(args.objective)
        records = run_analyze(buf, n_list, cfg)
    except (PartitionError, ValueError) as e:
        return _fail(str(e), EXIT_USAGE)

    text = sweep_csv(records, frame_rate=args.fps)
    if args.output in (None, "-"):
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(args.output, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        return _fail(f"CSV 저장 실패: {e}", EXIT_IO)

    print(f"📊 {len(records)}개 n 값 분석 완료 -> {args.output}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cupid",
        description="엔트로피 기반 계층적 cuboid 분할로 프레임을 부호화합니다.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
예제:
  %(prog)s encode frame.ppm --n 300 -o frame.cupd
  %(prog)s decode frame.cupd -o coarse.ppm
  %(prog)s partition frame.ppm --n 70 --overlay map.ppm
  %(prog)s analyze frame.ppm --n-list 100,200,300 -o sweep.csv
        """,
    )
    parser.add_argument("--verbose", action="store_true", help="DEBUG 로그 출력 (stderr)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_objective(p):
        p.add_argument(
            "--objective",
            choices=["weighted", "unweighted"],
            default=None,
            help="분할 목적함수 (기본: config.json 의 partition.objective)",
        )

    p = sub.add_parser("encode", help="이미지 -> .cupd 스트림")
    p.add_argument("input", help="입력 이미지 (PPM/PGM, PNG 등)")
    p.add_argument("--n", type=int, required=True, help="cuboid 개수")
    add_objective(p)
    p.add_argument("-o", "--output", required=True, help="출력 .cupd 경로")
    p.add_argument("--recon", help="복원된 coarse 프레임 저장 경로")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help=".cupd 스트림 -> coarse 프레임")
    p.add_argument("input", help="입력 .cupd 경로")
    p.add_argument("-o", "--output", help="출력 이미지 경로 (기본: 입력명 + .pgm/.ppm)")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("partition", help="cuboid 맵 (경계 오버레이 / JSON 목록)")
    p.add_argument("input", help="입력 이미지")
    p.add_argument("--n", type=int, required=True, help="cuboid 개수")
    add_objective(p)
    p.add_argument("--overlay", "-o", dest="overlay", help="흰색 경계 오버레이 이미지 경로")
    p.add_argument("--map", help="leaf 목록 JSON 경로 ([{x,y,w,h}, ...])")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("analyze", help="n 값별 bits / 시간 / Y-PSNR CSV")
    p.add_argument("input", help="입력 이미지")
    p.add_argument("--n-list", help="쉼표로 구분한 n 목록 (기본: config.json 의 analyze.default_n_list)")
    add_objective(p)
    p.add_argument("--fps", type=float, help="지정 시 bitrate_kbps 열 추가")
    p.add_argument("-o", "--output", help="CSV 경로 ('-' 또는 생략 시 stdout)")
    p.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(message)s",
        stream=sys.stderr,
    )

    try:
        return args.func(args)
    except KeyboardInterrupt:
        print("\n\n❌ 사용자가 작업을 중단했습니다.", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
