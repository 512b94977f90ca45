"""Pluggable image-translator boundary and its framed wire protocol.

Wire format, per frame: 4-byte little-endian header length, UTF-8 JSON header
{"w","h","c","kind":"request"|"response"|"error"}, then the raw payload.
Request payloads carry row-major 8-bit pixels (w*h*c bytes) followed by the
binary mask (w*h bytes); response payloads carry w*h*3 pixel bytes. The
pipeline keeps exactly one request in flight.
"""

from __future__ import annotations

import colorsys
import json
import shlex
import struct
import subprocess

import numpy as np

from .panorama import PanoFrame


class ProtocolError(RuntimeError):
    """Malformed frame on the wire."""


class TranslatorError(RuntimeError):
    """Transport failure; carries the pipeline iteration that hit it."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


def _read_exact(stream, n: int) -> bytes:
    chunks = []
    got = 0
    while got < n:
        chunk = stream.read(n - got)
        if not chunk:
            break
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def write_frame(stream, header: dict, payload: bytes = b"") -> None:
    head = json.dumps(header, separators=(",", ":")).encode("utf-8")
    stream.write(struct.pack("<I", len(head)))
    stream.write(head)
    stream.write(payload)
    stream.flush()


def read_frame(stream):
    """Read one frame. Returns (header, payload); None at clean EOF."""
    raw_len = _read_exact(stream, 4)
    if len(raw_len) == 0:
        return None
    if len(raw_len) < 4:
        raise ProtocolError("truncated header length")
    (head_len,) = struct.unpack("<I", raw_len)
    if head_len == 0 or head_len > 1 << 20:
        raise ProtocolError(f"implausible header length {head_len}")
    head_raw = _read_exact(stream, head_len)
    if len(head_raw) < head_len:
        raise ProtocolError("truncated header")
    try:
        header = json.loads(head_raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"invalid header JSON: {exc}") from exc
    if not isinstance(header, dict) or "kind" not in header:
        raise ProtocolError("header missing 'kind'")

    kind = header["kind"]
    if kind == "error":
        return header, b""
    try:
        w, h, c = int(header["w"]), int(header["h"]), int(header["c"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError("header missing w/h/c") from exc
    if w < 1 or h < 1 or c not in (3, 4):
        raise ProtocolError(f"bad dimensions {w}x{h}x{c}")
    if kind == "request":
        need = w * h * c + w * h
    elif kind == "response":
        need = w * h * 3
    else:
        raise ProtocolError(f"unknown frame kind {kind!r}")
    payload = _read_exact(stream, need)
    if len(payload) < need:
        raise ProtocolError(
            f"payload truncated: header advertised {need} bytes, got {len(payload)}"
        )
    return header, payload


def frame_to_request_pixels(frame: PanoFrame, channels: int = 3) -> np.ndarray:
    """Quantize a PanoFrame to the 8-bit wire image.

    channels=3 is the merged grayscale+texture panorama; channels=4 stacks the
    pure grayscale shading as plane 0 ahead of the merged RGB planes.
    """
    rgb8 = np.clip(np.rint(frame.rgb * 255.0), 0, 255).astype(np.uint8)
    if channels == 3:
        return rgb8
    if channels == 4:
        gray8 = np.clip(np.rint(frame.shade * 255.0), 0, 255).astype(np.uint8)
        return np.concatenate([gray8[:, :, None], rgb8], axis=2)
    raise ValueError("channels must be 3 or 4")


def build_request(frame: PanoFrame, channels: int = 3) -> tuple[dict, bytes]:
    pixels = frame_to_request_pixels(frame, channels)
    header = {"w": frame.width, "h": frame.height, "c": channels, "kind": "request"}
    return header, pixels.tobytes() + frame.mask.astype(np.uint8).tobytes()


def parse_request(header: dict, payload: bytes) -> tuple[np.ndarray, np.ndarray]:
    w, h, c = header["w"], header["h"], header["c"]
    pixels = np.frombuffer(payload[: w * h * c], dtype=np.uint8).reshape(h, w, c)
    mask = np.frombuffer(payload[w * h * c :], dtype=np.uint8).reshape(h, w)
    return pixels, mask


class Translator:
    """Turns a partially textured panorama into a fully textured RGB image."""

    channels = 3

    def __init__(self, channels: int = 3):
        if channels not in (3, 4):
            raise ValueError("channels must be 3 or 4")
        self.channels = channels

    def request_pixels(self, frame: PanoFrame) -> np.ndarray:
        return frame_to_request_pixels(frame, self.channels)

    def translate(self, frame: PanoFrame) -> np.ndarray:
        return self._run(self.request_pixels(frame), frame.mask)

    def translate_pixels(self, pixels: np.ndarray, mask: np.ndarray) -> np.ndarray:
        return self._run(pixels, mask)

    def _run(self, pixels: np.ndarray, mask: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class IdentityTranslator(Translator):
    """Echoes the request's RGB planes byte-for-byte."""

    def _run(self, pixels, mask):
        return pixels[:, :, -3:].copy()


class TintStubTranslator(Translator):
    """Colorizes untextured pixels at a fixed hue; textured pixels pass through.

    Untextured panorama pixels are achromatic, so the stub injects chroma by
    reinterpreting their gray value as HSV value at (hue_deg, saturation).
    """

    def __init__(self, channels: int = 3, hue_deg: float = 30.0, saturation: float = 0.55):
        super().__init__(channels)
        self.hue_deg = hue_deg
        self.saturation = saturation
        r, g, b = colorsys.hsv_to_rgb(hue_deg / 360.0 % 1.0, saturation, 1.0)
        self._tint = np.array([r, g, b])

    def _run(self, pixels, mask):
        rgb = pixels[:, :, -3:].astype(np.float64)
        gray = rgb.max(axis=2, keepdims=True)
        tinted = np.clip(np.rint(gray * self._tint), 0, 255).astype(np.uint8)
        out = pixels[:, :, -3:].copy()
        untextured = mask == 0
        out[untextured] = tinted[untextured]
        return out


class CycleTranslator(Translator):
    """Returns one uniform color per request, cycling through a palette."""

    def __init__(self, colors, channels: int = 3):
        super().__init__(channels)
        self.colors = [np.asarray(c, dtype=np.uint8) for c in colors]
        if not self.colors:
            raise ValueError("need at least one color")
        self._calls = 0

    def _run(self, pixels, mask):
        color = self.colors[self._calls % len(self.colors)]
        self._calls += 1
        out = np.empty((pixels.shape[0], pixels.shape[1], 3), dtype=np.uint8)
        out[:] = color
        return out


class ExecTranslator(Translator):
    """Runs an external translator process speaking the wire protocol."""

    def __init__(self, command: str, channels: int = 3):
        super().__init__(channels)
        self.command = command
        self._proc: subprocess.Popen | None = None

    def _ensure_proc(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                shlex.split(self.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
        return self._proc

    def _run(self, pixels, mask):
        h, w, c = pixels.shape
        header = {"w": w, "h": h, "c": c, "kind": "request"}
        payload = pixels.tobytes() + mask.astype(np.uint8).tobytes()
        proc = self._ensure_proc()
        try:
            write_frame(proc.stdin, header, payload)
            result = read_frame(proc.stdout)
        except (BrokenPipeError, OSError, ProtocolError) as exc:
            raise TranslatorError(f"translator process failed: {exc}") from exc
        if result is None:
            raise TranslatorError("translator process closed its output")
        rheader, rpayload = result
        if rheader.get("kind") == "error":
            raise TranslatorError(f"translator error: {rheader.get('msg', '')}")
        if rheader.get("kind") != "response":
            raise TranslatorError(f"unexpected frame kind {rheader.get('kind')!r}")
        if rheader.get("w") != w or rheader.get("h") != h:
            raise TranslatorError("response dimensions differ from request")
        return np.frombuffer(rpayload, dtype=np.uint8).reshape(h, w, 3).copy()

    def close(self) -> None:
        if self._proc is not None:
            if self._proc.stdin:
                try:
                    self._proc.stdin.close()
                except OSError:
                    pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
            self._proc = None


def serve_protocol(stream_in, stream_out, handler) -> None:
    """Serve requests until EOF; one response per request, in order.

    handler(pixels uint8 (H,W,C), mask uint8 (H,W)) -> uint8 (H,W,3).
    Malformed input emits an error frame and raises ProtocolError.
    """
    while True:
        try:
            item = read_frame(stream_in)
        except ProtocolError as exc:
            write_frame(stream_out, {"kind": "error", "msg": str(exc)})
            raise
        if item is None:
            return
        header, payload = item
        if header["kind"] != "request":
            msg = f"expected request frame, got {header['kind']!r}"
            write_frame(stream_out, {"kind": "error", "msg": msg})
            raise ProtocolError(msg)
        pixels, mask = parse_request(header, payload)
        out = np.ascontiguousarray(handler(pixels, mask), dtype=np.uint8)
        if out.shape != (header["h"], header["w"], 3):
            msg = f"handler returned shape {out.shape}"
            write_frame(stream_out, {"kind": "error", "msg": msg})
            raise ProtocolError(msg)
        write_frame(
            stream_out,
            {"w": header["w"], "h": header["h"], "c": 3, "kind": "response"},
            out.tobytes(),
        )


def make_translator(spec: str, channels: int = 3) -> Translator:
    """Resolve a --translator flag value to a Translator instance.

    Accepted forms: 'identity', 'stub', 'exec:<command>', and
    'cycle:RRGGBB[,RRGGBB...]'.
    """
    if spec == "identity":
        return IdentityTranslator(channels)
    if spec == "stub":
        return TintStubTranslator(channels)
    if spec.startswith("exec:"):
        return ExecTranslator(spec[len("exec:") :], channels)
    if spec.startswith("cycle:"):
        colors = []
        for tok in spec[len("cycle:") :].split(","):
            tok = tok.strip().lstrip("#")
            if len(tok) != 6:
                raise ValueError(f"bad hex color {tok!r}")
            colors.append([int(tok[i : i + 2], 16) for i in (0, 2, 4)])
        return CycleTranslator(colors, channels)
    raise ValueError(f"unknown translator spec {spec!r}")
