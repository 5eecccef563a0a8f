"""Encode / decode / analyze workflows shared by the CLI and the HTTP service."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from typing import Optional

from app.config.settings import (
    get_analyze_workers,
    get_max_decode_pixels,
    get_objective_mode,
    get_partition_workers,
)
from cupid.codec import CodedStream, deserialize, read_stream_header, serialize
from cupid.descriptors import DescriptorSet, compute_descriptors, reconstruct
from cupid.errors import FrameTooLarge, NTooLarge, NZero
from cupid.img_io import PixelBuffer
from cupid.metrics import MetricsRecord, analyze_sweep, format_db, y_psnr
from cupid.overlay import render_overlay
from cupid.partition import ObjectiveConfig, PartitionTree, partition

logger = logging.getLogger(__name__)


def _log(event: str, **fields) -> None:
    logger.info(json.dumps({"event": event, **fields}, ensure_ascii=False))


@dataclass(frozen=True)
class EncodeResult:
    n: int
    stream: CodedStream
    tree: PartitionTree
    descriptors: DescriptorSet
    recon: PixelBuffer
    y_psnr: float
    encode_time: float

    @property
    def bits(self) -> int:
        return self.stream.bits

    def summary(self) -> str:
        return f"n={self.n} bits={self.bits} y_psnr={format_db(self.y_psnr)}"


def objective_config(mode: Optional[str] = None) -> ObjectiveConfig:
    """Objective for an explicit mode, or the configured default."""
    return ObjectiveConfig.from_name(mode or get_objective_mode())


def parse_n_list(text: str) -> list[int]:
    """'100,200,300' -> [100, 200, 300]"""
    values = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            raise ValueError(f"empty entry in n-list {text!r}")
        try:
            values.append(int(part))
        except ValueError:
            raise ValueError(f"n-list entry {part!r} is not an integer") from None
    return values


def check_n(buf: PixelBuffer, n: int) -> None:
    limit = buf.width * buf.height
    if n < 1:
        raise NZero(f"n must be at least 1, got {n}")
    if n > limit:
        raise NTooLarge(f"n={n} exceeds the {buf.width}x{buf.height} pixel count {limit}")


def encode_image(buf: PixelBuffer, n: int, cfg: Optional[ObjectiveConfig] = None) -> EncodeResult:
    """
    Partition + descriptors + serialize; the reported Y-PSNR comes from the
    frame decoded back out of the produced stream.
    """
    cfg = cfg or objective_config()
    check_n(buf, n)

    started = time.perf_counter()
    tree = partition(buf, n, cfg, workers=get_partition_workers())
    desc = compute_descriptors(buf, tree)
    stream = serialize(tree, desc)
    elapsed = time.perf_counter() - started

    recon = _decode(stream)
    result = EncodeResult(
        n=n,
        stream=stream,
        tree=tree,
        descriptors=desc,
        recon=recon,
        y_psnr=y_psnr(buf, recon),
        encode_time=elapsed,
    )
    _log(
        "encode.complete",
        width=buf.width,
        height=buf.height,
        channels=buf.channels,
        n=n,
        objective=cfg.weighting.value,
        bits=result.bits,
        y_psnr=format_db(result.y_psnr),
        encode_time_s=round(elapsed, 6),
    )
    return result


def _decode(stream) -> PixelBuffer:
    tree, desc = deserialize(stream)
    return reconstruct(tree, desc, (tree.width, tree.height))


def decode_stream(stream) -> PixelBuffer:
    """
    Coarse frame R_co from .cupd bytes. Streams whose header declares more
    than server.max_decode_pixels pixels are rejected before anything is
    allocated.
    """
    data = stream.data if isinstance(stream, CodedStream) else stream
    header = read_stream_header(bytes(data))
    limit = get_max_decode_pixels()
    if header.width * header.height > limit:
        raise FrameTooLarge(f"{header.width}x{header.height} frame exceeds the {limit} pixel decode limit")
    return _decode(stream)


def partition_map(buf: PixelBuffer, n: int, cfg: Optional[ObjectiveConfig] = None) -> tuple[PartitionTree, PixelBuffer]:
    """(tree, overlay frame with white leaf borders)"""
    cfg = cfg or objective_config()
    check_n(buf, n)
    tree = partition(buf, n, cfg, workers=get_partition_workers())
    return tree, render_overlay(buf, tree)


def run_analyze(buf: PixelBuffer, n_list: list[int], cfg: Optional[ObjectiveConfig] = None) -> list[MetricsRecord]:
    cfg = cfg or objective_config()
    if not n_list:
        raise ValueError("n-list is empty")
    for n in n_list:
        check_n(buf, n)
    records = analyze_sweep(
        buf,
        n_list,
        cfg,
        workers=get_analyze_workers(),
        partition_workers=get_partition_workers(),
    )
    _log("analyze.complete", width=buf.width, height=buf.height, points=len(records), n_list=list(n_list))
    return records
