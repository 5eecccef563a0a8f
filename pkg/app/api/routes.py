import datetime
import hmac
import json
import logging
import os

from flask import Flask, Response, jsonify, request

from app.config.settings import get_default_n_list, get_frame_rate, get_max_upload_bytes
from app.services.pipeline import (
    decode_stream,
    encode_image,
    objective_config,
    parse_n_list,
    partition_map,
    run_analyze,
)
from cupid.errors import CupidError, FrameTooLarge, ImageFormatError, StreamError
from cupid.img_io import decode_image_bytes, save_ppm
from cupid.metrics import format_db

logger = logging.getLogger(__name__)


def _log(event: str, **fields) -> None:
    logger.info(json.dumps({"event": event, **fields}, ensure_ascii=False))


def _is_production() -> bool:
    env = (os.environ.get("ENV") or os.environ.get("FLASK_ENV") or "").lower()
    return env in {"prod", "production"}


def _is_authorized(req) -> bool:
    """Shared token auth (X-Job-Token)."""
    expected_token = os.environ.get("CUPID_API_TOKEN")

    # 운영 환경에서는 토큰 미설정 시 차단
    if not expected_token:
        return not _is_production()

    provided_token = req.headers.get("X-Job-Token", "")
    return hmac.compare_digest(provided_token, expected_token)


def _error(message: str, status: int):
    return jsonify({"success": False, "error": message}), status


def _status_for(exc: Exception) -> int:
    # 이미지/스트림 형식 오류와 처리 한도를 넘는 프레임은 422, 나머지 인자/범위 오류는 400
    if isinstance(exc, (ImageFormatError, StreamError, FrameTooLarge)):
        return 422
    return 400


def _int_arg(name: str) -> int:
    raw = request.args.get(name)
    if raw is None:
        raise ValueError(f"missing query parameter '{name}'")
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"query parameter '{name}' must be an integer, got {raw!r}") from None


def create_app() -> Flask:
    app = Flask(__name__)
    app.config["MAX_CONTENT_LENGTH"] = get_max_upload_bytes()

    @app.before_request
    def require_token():
        if request.method == "POST" and not _is_authorized(request):
            _log("request.unauthorized", path=request.path, remote_addr=request.remote_addr)
            return _error("unauthorized", 401)
        return None

    @app.errorhandler(413)
    def too_large(_e):
        return _error(f"request body exceeds {get_max_upload_bytes()} bytes", 413)

    @app.route("/encode", methods=["POST"])
    def encode():
        """이미지 -> .cupd 스트림"""
        _log("encode.start", at=datetime.datetime.now().isoformat(), size=request.content_length)
        try:
            n = _int_arg("n")
            cfg = objective_config(request.args.get("objective"))
            buf = decode_image_bytes(request.get_data())
            result = encode_image(buf, n, cfg)
        except (CupidError, ValueError) as e:
            _log("encode.rejected", error=str(e))
            return _error(str(e), _status_for(e))

        response = Response(result.stream.data, status=200, mimetype="application/octet-stream")
        response.headers["X-Cupid-Bits"] = str(result.bits)
        response.headers["X-Cupid-Y-Psnr"] = format_db(result.y_psnr)
        return response

    @app.route("/decode", methods=["POST"])
    def decode():
        """.cupd 스트림 -> PGM/PPM"""
        try:
            frame = decode_stream(request.get_data())
        except (CupidError, ValueError) as e:
            _log("decode.rejected", error=str(e))
            return _error(str(e), _status_for(e))

        mimetype = "image/x-portable-graymap" if frame.channels == 1 else "image/x-portable-pixmap"
        return Response(save_ppm(frame), status=200, mimetype=mimetype)

    @app.route("/partition", methods=["POST"])
    def cuboid_map():
        """이미지 -> cuboid 목록 (JSON)"""
        try:
            n = _int_arg("n")
            cfg = objective_config(request.args.get("objective"))
            buf = decode_image_bytes(request.get_data())
            tree, _ = partition_map(buf, n, cfg)
        except (CupidError, ValueError) as e:
            _log("partition.rejected", error=str(e))
            return _error(str(e), _status_for(e))

        return jsonify({"success": True, "n": n, "leaves": tree.leaf_map()}), 200

    @app.route("/analyze", methods=["POST"])
    def analyze():
        """n 목록별 bits / 시간 / Y-PSNR"""
        try:
            raw_list = request.args.get("n_list")
            n_list = parse_n_list(raw_list) if raw_list else get_default_n_list()
            fps = float(request.args.get("fps", get_frame_rate()))
            cfg = objective_config(request.args.get("objective"))
            buf = decode_image_bytes(request.get_data())
            records = run_analyze(buf, n_list, cfg)
        except (CupidError, ValueError) as e:
            _log("analyze.rejected", error=str(e))
            return _error(str(e), _status_for(e))

        _log("analyze.complete", points=len(records))
        return jsonify({"success": True, "records": [r.as_dict(fps) for r in records]}), 200

    @app.route("/health", methods=["GET"])
    def health():
        """헬스체크 엔드포인트"""
        return jsonify({"status": "healthy"}), 200

    return app
