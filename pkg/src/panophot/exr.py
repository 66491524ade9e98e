"""Minimal OpenEXR scanline codec.

Implements the subset of the format this package needs: single-part
scanline files, RGB channels in HALF or FLOAT, NONE/ZIPS/ZIP compression,
and arbitrary string attributes (used to embed panorama metadata in the
header). Layout follows the OpenEXR file format documentation
(https://openexr.com/en/latest/OpenEXRFileLayout.html).
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

MAGIC = 20000630  # 0x01312f76
COMPRESSION_NONE = 0
COMPRESSION_ZIPS = 2
COMPRESSION_ZIP = 3
_BLOCK_LINES = {COMPRESSION_NONE: 1, COMPRESSION_ZIPS: 1, COMPRESSION_ZIP: 16}
_PIXEL_TYPES = {1: np.dtype("<f2"), 2: np.dtype("<f4")}  # HALF, FLOAT


def _deltas_encode(data: bytes) -> bytes:
    b = np.frombuffer(data, dtype=np.uint8)
    n = b.size
    half = (n + 1) // 2
    reordered = np.empty(n, dtype=np.uint8)
    reordered[:half] = b[0::2]
    reordered[half:] = b[1::2]
    out = reordered.astype(np.int16)
    out[1:] = (out[1:] - reordered[:-1].astype(np.int16) + 384) % 256
    return out.astype(np.uint8).tobytes()


def _deltas_decode(data: bytes) -> bytes:
    b = np.frombuffer(data, dtype=np.uint8).astype(np.int64)
    b[1:] -= 128
    decoded = (np.cumsum(b) % 256).astype(np.uint8)
    n = decoded.size
    half = (n + 1) // 2
    out = np.empty(n, dtype=np.uint8)
    out[0::2] = decoded[:half]
    out[1::2] = decoded[half:]
    return out.tobytes()


def _pack(raw: bytes, compression: int) -> bytes:
    if compression == COMPRESSION_NONE:
        return raw
    packed = zlib.compress(_deltas_encode(raw))
    return packed if len(packed) < len(raw) else raw


def _unpack(blob: bytes, expected: int, compression: int) -> bytes:
    if compression == COMPRESSION_NONE or len(blob) == expected:
        return blob
    return _deltas_decode(zlib.decompress(blob))


def _attr(name: str, type_name: str, payload: bytes) -> bytes:
    return (name.encode() + b"\0" + type_name.encode() + b"\0"
            + struct.pack("<i", len(payload)) + payload)


def _chlist(names, pixel_type: int) -> bytes:
    out = b""
    for n in names:
        out += n.encode() + b"\0" + struct.pack("<iBBBBii", pixel_type, 0, 0, 0, 0, 1, 1)
    return out + b"\0"


def write_exr(path, pixels: np.ndarray, attributes: dict | None = None,
              compression: int = COMPRESSION_ZIP, half: bool = False) -> None:
    """Write (H, W, 3) RGB pixels as a scanline EXR.

    ``attributes`` are extra string attributes for the header. FLOAT
    channels by default; ``half`` stores HALF (16-bit) instead.
    """
    px = np.asarray(pixels, dtype=np.float64)
    if px.ndim != 3 or px.shape[2] != 3:
        raise ValueError("write_exr expects (H, W, 3) pixels")
    h, w = px.shape[:2]
    dtype = np.dtype("<f2") if half else np.dtype("<f4")
    ptype = 1 if half else 2
    # channels stored alphabetically: B, G, R
    channels = px[..., ::-1].astype(dtype)

    header = b""
    header += _attr("channels", "chlist", _chlist(["B", "G", "R"], ptype))
    header += _attr("compression", "compression", struct.pack("<B", compression))
    box = struct.pack("<iiii", 0, 0, w - 1, h - 1)
    header += _attr("dataWindow", "box2i", box)
    header += _attr("displayWindow", "box2i", box)
    header += _attr("lineOrder", "lineOrder", struct.pack("<B", 0))
    header += _attr("pixelAspectRatio", "float", struct.pack("<f", 1.0))
    header += _attr("screenWindowCenter", "v2f", struct.pack("<ff", 0.0, 0.0))
    header += _attr("screenWindowWidth", "float", struct.pack("<f", 1.0))
    for key, value in (attributes or {}).items():
        header += _attr(str(key), "string", str(value).encode("utf-8"))
    header += b"\0"

    lines_per_block = _BLOCK_LINES[compression]
    n_blocks = (h + lines_per_block - 1) // lines_per_block
    blocks = []
    for bi in range(n_blocks):
        y0 = bi * lines_per_block
        y1 = min(y0 + lines_per_block, h)
        raw = channels[y0:y1].transpose(0, 2, 1).tobytes()  # per line: B row, G row, R row
        blocks.append(_pack(raw, compression))

    preamble = struct.pack("<ii", MAGIC, 2) + header
    table_size = 8 * n_blocks
    offset = len(preamble) + table_size
    offsets = []
    for bi, blob in enumerate(blocks):
        offsets.append(offset)
        offset += 8 + len(blob)  # int32 y + int32 size + payload

    with open(path, "wb") as fh:
        fh.write(preamble)
        fh.write(struct.pack(f"<{n_blocks}Q", *offsets))
        for bi, blob in enumerate(blocks):
            fh.write(struct.pack("<ii", bi * lines_per_block, len(blob)))
            fh.write(blob)


def _read_cstr(buf: bytes, pos: int):
    end = buf.index(b"\0", pos)
    return buf[pos:end].decode("utf-8"), end + 1


def read_exr(path):
    """Read a scanline EXR with R, G, B channels.

    Returns (pixels float64 (H, W, 3), string attributes dict). Supports
    NONE/ZIPS/ZIP compression, HALF and FLOAT channels, increasing line
    order, which covers files this package writes plus common renders.
    """
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, version = struct.unpack_from("<ii", buf, 0)
    if magic != MAGIC:
        raise ValueError("not an EXR file")
    if version & 0x200 or version & 0x1000:
        raise ValueError("tiled/multi-part EXR files are not supported")

    pos = 8
    attrs = {}
    strings = {}
    while buf[pos] != 0:
        name, pos = _read_cstr(buf, pos)
        type_name, pos = _read_cstr(buf, pos)
        (size,) = struct.unpack_from("<i", buf, pos)
        pos += 4
        payload = buf[pos:pos + size]
        pos += size
        attrs[name] = (type_name, payload)
        if type_name == "string":
            strings[name] = payload.decode("utf-8", errors="replace")
    pos += 1  # header terminator

    if "channels" not in attrs or "dataWindow" not in attrs:
        raise ValueError("EXR header misses required attributes")
    compression = attrs["compression"][1][0]
    if compression not in _BLOCK_LINES:
        raise ValueError(f"unsupported EXR compression {compression}")
    if "lineOrder" in attrs and attrs["lineOrder"][1][0] != 0:
        raise ValueError("only increasing line order is supported")
    x0, y0, x1, y1 = struct.unpack("<iiii", attrs["dataWindow"][1])
    w, h = x1 - x0 + 1, y1 - y0 + 1

    chan_buf = attrs["channels"][1]
    cpos = 0
    channels = []  # (name, dtype) in file order
    while chan_buf[cpos] != 0:
        cname, cpos = _read_cstr(chan_buf, cpos)
        ptype, _, _, _, _, xs, ys = struct.unpack_from("<iBBBBii", chan_buf, cpos)
        cpos += 16
        if ptype not in _PIXEL_TYPES:
            raise ValueError(f"unsupported pixel type {ptype} for channel {cname}")
        if xs != 1 or ys != 1:
            raise ValueError("subsampled channels are not supported")
        channels.append((cname, _PIXEL_TYPES[ptype]))
    names = [c[0] for c in channels]
    for want in ("R", "G", "B"):
        if want not in names:
            raise ValueError(f"EXR misses channel {want}")

    lines_per_block = _BLOCK_LINES[compression]
    n_blocks = (h + lines_per_block - 1) // lines_per_block
    offsets = struct.unpack_from(f"<{n_blocks}Q", buf, pos)

    data = {n: np.empty((h, w), dtype=np.float64) for n, _ in channels}
    line_bytes = sum(dt.itemsize for _, dt in channels) * w
    for off in offsets:
        y, size = struct.unpack_from("<ii", buf, off)
        blob = buf[off + 8: off + 8 + size]
        rows = min(lines_per_block, y1 - y + 1)
        raw = _unpack(blob, rows * line_bytes, compression)
        rpos = 0
        for r in range(rows):
            for cname, dt in channels:
                nbytes = w * dt.itemsize
                vals = np.frombuffer(raw, dtype=dt, count=w, offset=rpos)
                data[cname][y - y0 + r] = vals.astype(np.float64)
                rpos += nbytes

    pixels = np.stack([data["R"], data["G"], data["B"]], axis=-1)
    return pixels, strings
