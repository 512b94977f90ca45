"""Stdio serving of a trained generator over the texture-baker wire protocol.

Frame layout (shared contract with the baker): 4-byte little-endian header
length, UTF-8 JSON header {"w","h","c","kind"}, then raw payload bytes.
Requests carry w*h*c pixel bytes plus a w*h mask; responses carry w*h*3.
"""

from __future__ import annotations

import json
import struct

import numpy as np
import torch

from .data import to_signed, to_unsigned
from .model import ResnetGenerator


class ProtocolError(RuntimeError):
    pass


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
    raw = _read_exact(stream, 4)
    if len(raw) == 0:
        return None
    if len(raw) < 4:
        raise ProtocolError("truncated header length")
    (head_len,) = struct.unpack("<I", raw)
    if head_len == 0 or head_len > 1 << 20:
        raise ProtocolError(f"implausible header length {head_len}")
    head_raw = _read_exact(stream, head_len)
    if len(head_raw) < head_len:
        raise ProtocolError("truncated header")
    try:
        header = json.loads(head_raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"invalid header JSON: {exc}") from exc
    kind = header.get("kind")
    if kind == "error":
        return header, b""
    try:
        w, h, c = int(header["w"]), int(header["h"]), int(header["c"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError("header missing w/h/c") from exc
    if kind == "request":
        need = w * h * c + w * h
    elif kind == "response":
        need = w * h * 3
    else:
        raise ProtocolError(f"unknown frame kind {kind!r}")
    payload = _read_exact(stream, need)
    if len(payload) < need:
        raise ProtocolError(f"payload truncated ({len(payload)}/{need} bytes)")
    return header, payload


@torch.no_grad()
def translate_array(generator: ResnetGenerator, pixels: np.ndarray) -> np.ndarray:
    """uint8 (H,W,C) in, uint8 (H,W,3) out."""
    x = torch.from_numpy(pixels.astype(np.float32) / 255.0).permute(2, 0, 1)[None]
    out = generator(to_signed(x))
    out = to_unsigned(out).clamp(0.0, 1.0)[0].permute(1, 2, 0)
    return (out * 255.0).round().to(torch.uint8).numpy()


def serve(generator: ResnetGenerator, stream_in, stream_out) -> None:
    """Answer requests until EOF. Inference is deterministic: eval mode,
    single thread, fixed seed."""
    torch.set_num_threads(1)
    torch.manual_seed(0)
    generator.eval()
    while True:
        try:
            item = read_frame(stream_in)
        except ProtocolError as exc:
            write_frame(stream_out, {"kind": "error", "msg": str(exc)})
            raise
        if item is None:
            return
        header, payload = item
        w, h, c = header["w"], header["h"], header["c"]
        if header["kind"] != "request":
            msg = f"expected request, got {header['kind']!r}"
            write_frame(stream_out, {"kind": "error", "msg": msg})
            raise ProtocolError(msg)
        if c != generator.in_channels:
            msg = f"checkpoint expects {generator.in_channels} channels, request carries {c}"
            write_frame(stream_out, {"kind": "error", "msg": msg})
            raise ProtocolError(msg)
        if w % 4 or h % 4:
            msg = f"dims {w}x{h} not divisible by 4"
            write_frame(stream_out, {"kind": "error", "msg": msg})
            raise ProtocolError(msg)
        pixels = np.frombuffer(payload[: w * h * c], dtype=np.uint8).reshape(h, w, c)
        out = translate_array(generator, pixels)
        write_frame(
            stream_out,
            {"w": w, "h": h, "c": 3, "kind": "response"},
            out.tobytes(),
        )
