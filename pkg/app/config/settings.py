"""Runtime settings loaded from config.json."""

import copy
import json
import os

CONFIG_FILE = os.environ.get("CUPID_CONFIG") or os.path.join(
    os.path.dirname(__file__), "..", "..", "config.json"
)

DEFAULT_CONFIG = {
    "partition": {
        "objective": "weighted",
        "workers": 1,
    },
    "analyze": {
        "default_n_list": [100, 200, 300],
        "workers": 1,
        "frame_rate": 30,
    },
    "server": {
        "max_upload_mb": 32,
        "max_decode_pixels": 100_000_000,
    },
}


def load_config(path=None):
    """config.json 로드 (없으면 기본값, 섹션 단위로 기본값 위에 병합)"""
    merged = copy.deepcopy(DEFAULT_CONFIG)
    try:
        with open(path or CONFIG_FILE, "r", encoding="utf-8") as f:
            loaded = json.load(f)
    except FileNotFoundError:
        return merged

    for section, values in loaded.items():
        if isinstance(values, dict) and isinstance(merged.get(section), dict):
            merged[section].update(values)
        else:
            merged[section] = values
    return merged


# 전역 설정 객체
config = load_config()


def get_objective_mode():
    """기본 목적함수 모드 (weighted | unweighted)"""
    return config["partition"]["objective"]


def get_partition_workers():
    """자식 cuboid 분할 탐색 스레드 수"""
    return max(1, int(config["partition"]["workers"]))


def get_default_n_list():
    return [int(n) for n in config["analyze"]["default_n_list"]]


def get_analyze_workers():
    return max(1, int(config["analyze"]["workers"]))


def get_frame_rate():
    """bits -> Kbps 환산용 초당 프레임 수"""
    return float(config["analyze"]["frame_rate"])


def get_max_upload_bytes():
    return int(config["server"]["max_upload_mb"]) * 1024 * 1024


def get_max_decode_pixels():
    """복호화 허용 최대 픽셀 수 (width * height)"""
    return int(config["server"]["max_decode_pixels"])
