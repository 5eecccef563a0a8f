"""Rate, quality and timing measurement for coarse frames."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .codec import deserialize, serialize
from .descriptors import compute_descriptors, reconstruct
from .errors import DimensionMismatch, NTooLarge, NZero
from .img_io import PixelBuffer
from .partition import ObjectiveConfig, luma_plane, partition

logger = logging.getLogger(__name__)

INFINITE = math.inf
CSV_HEADER = ("n", "bits", "encode_time_s", "y_psnr_db")
_PEAK_SQUARED = 255.0**2


def _log(event: str, level: int = logging.DEBUG, **fields) -> None:
    if logger.isEnabledFor(level):
        logger.log(level, json.dumps({"event": event, **fields}, ensure_ascii=False))


@dataclass(frozen=True)
class MetricsRecord:
    n: int
    bits: int
    encode_time: float
    y_psnr: float
    mse: tuple[float, ...]

    def bitrate_kbps(self, frame_rate: float) -> float:
        """Rate if every frame of a frame_rate fps sequence cost this many bits."""
        return self.bits * frame_rate / 1000.0

    def as_dict(self, frame_rate: Optional[float] = None) -> dict:
        record = {
            "n": self.n,
            "bits": self.bits,
            "encode_time_s": self.encode_time,
            "y_psnr_db": format_db(self.y_psnr),
            "mse": list(self.mse),
        }
        if frame_rate is not None:
            record["bitrate_kbps"] = self.bitrate_kbps(frame_rate)
        return record


def format_db(value: float, decimals: int = 6) -> str:
    return "inf" if math.isinf(value) else f"{value:.{decimals}f}"


def _check_same_shape(a: PixelBuffer, b: PixelBuffer) -> None:
    if a.planes.shape != b.planes.shape:
        raise DimensionMismatch(
            f"{a.width}x{a.height}x{a.channels} vs {b.width}x{b.height}x{b.channels}"
        )


def mse(a: PixelBuffer, b: PixelBuffer) -> tuple[float, ...]:
    """Per-channel mean squared sample difference."""
    _check_same_shape(a, b)
    diff = a.planes.astype(np.float64) - b.planes.astype(np.float64)
    return tuple(float(v) for v in np.mean(diff * diff, axis=(1, 2)))


def psnr_from_mse(value: float) -> float:
    if value == 0:
        return INFINITE
    return 10.0 * math.log10(_PEAK_SQUARED / value)


def y_psnr(original: PixelBuffer, recon: PixelBuffer) -> float:
    """PSNR of the unrounded luma planes; INFINITE when they are identical."""
    _check_same_shape(original, recon)
    diff = luma_plane(original) - luma_plane(recon)
    return psnr_from_mse(float(np.mean(diff * diff)))


def _measure(buf: PixelBuffer, n: int, cfg: ObjectiveConfig, partition_workers: int) -> MetricsRecord:
    started = time.perf_counter()
    tree = partition(buf, n, cfg, workers=partition_workers)
    desc = compute_descriptors(buf, tree)
    stream = serialize(tree, desc)
    elapsed = time.perf_counter() - started

    recon = reconstruct(*deserialize(stream), buf.dims)
    record = MetricsRecord(
        n=n,
        bits=stream.bits,
        encode_time=elapsed,
        y_psnr=y_psnr(buf, recon),
        mse=mse(buf, recon),
    )
    _log("sweep.point", n=n, bits=record.bits, y_psnr=format_db(record.y_psnr), seconds=round(elapsed, 6))
    return record


def analyze_sweep(
    buf: PixelBuffer,
    n_list: Sequence[int],
    cfg: Optional[ObjectiveConfig] = None,
    *,
    workers: int = 1,
    partition_workers: int = 1,
) -> list[MetricsRecord]:
    """
    Partition, describe, serialize and reconstruct buf once per n.

    encode_time covers partition + descriptors + serialize only. Records come
    back in n_list order whatever the value of workers.
    """
    cfg = cfg or ObjectiveConfig()
    limit = buf.width * buf.height
    for n in n_list:
        if n < 1:
            raise NZero(f"n must be at least 1, got {n}")
        if n > limit:
            raise NTooLarge(f"n={n} exceeds the {buf.width}x{buf.height} pixel count {limit}")

    if workers > 1 and len(n_list) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda n: _measure(buf, n, cfg, partition_workers), n_list))
    return [_measure(buf, n, cfg, partition_workers) for n in n_list]


def sweep_csv(records: Iterable[MetricsRecord], frame_rate: Optional[float] = None, decimals: int = 6) -> str:
    """CSV with one row per record; a bitrate_kbps column is added when frame_rate is given."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = list(CSV_HEADER)
    if frame_rate is not None:
        header.append("bitrate_kbps")
    writer.writerow(header)
    for record in records:
        row = [record.n, record.bits, f"{record.encode_time:.{decimals}f}", format_db(record.y_psnr, decimals)]
        if frame_rate is not None:
            row.append(f"{record.bitrate_kbps(frame_rate):.{decimals}f}")
        writer.writerow(row)
    return out.getvalue()
