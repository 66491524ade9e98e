"""Panorama file I/O with metadata.

Formats: Radiance .hdr (RGBE, via OpenCV), .exr (own scanline codec,
metadata embedded as a header attribute), 8-bit .png for LDR outputs
(Pillow) and .npz (lossless float64, also used when piping through
stdin/stdout as "-"). For .hdr and .png the metadata travels in a sidecar
JSON file at ``<path>.json``.

Every file written here carries a metadata block with the tool version,
projection tag, calibration state and units, plus whatever the caller adds
(seeds, profile hashes, ...).
"""

from __future__ import annotations

import io
import json
import sys
from pathlib import Path

import cv2
import numpy as np
from PIL import Image

from . import __version__, exr
from .maps import Projection, RadianceMap

FORMAT_VERSION = 1


def _metadata(rmap: RadianceMap, extra: dict | None) -> dict:
    meta = {
        "format_version": FORMAT_VERSION,
        "tool": f"panophot {__version__}",
        "projection": rmap.projection.to_dict(),
        "calibrated": rmap.calibrated,
        "exposure_scale": rmap.exposure_scale,
        "units": "cd/m^2" if rmap.calibrated else "relative",
    }
    if extra:
        meta.update(extra)
    return meta


def _npz_bytes(rmap: RadianceMap, meta: dict) -> bytes:
    buf = io.BytesIO()
    np.savez(buf, pixels=rmap.pixels, meta=json.dumps(meta, sort_keys=True))
    return buf.getvalue()


def _map_from_npz(data) -> tuple:
    meta = json.loads(str(data["meta"]))
    pixels = np.asarray(data["pixels"], dtype=np.float64)
    return pixels, meta


def save_map(path, rmap: RadianceMap, extra: dict | None = None) -> None:
    """Write a map to .hdr/.exr/.png/.npz, or to stdout when path is '-'."""
    meta = _metadata(rmap, extra)
    if str(path) == "-":
        sys.stdout.buffer.write(_npz_bytes(rmap, meta))
        sys.stdout.buffer.flush()
        return

    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".npz":
        path.write_bytes(_npz_bytes(rmap, meta))
    elif suffix == ".exr":
        exr.write_exr(path, rmap.pixels,
                      attributes={"panophot": json.dumps(meta, sort_keys=True)})
    elif suffix == ".hdr":
        bgr = rmap.pixels[..., ::-1].astype(np.float32)
        if not cv2.imwrite(str(path), bgr):
            raise IOError(f"could not write {path}")
        _write_sidecar(path, meta)
    elif suffix == ".png":
        px = rmap.pixels
        if px.min() < -1e-9 or px.max() > 1.0 + 1e-9:
            raise ValueError("PNG output expects values in [0, 1]; degrade first")
        arr = np.round(np.clip(px, 0.0, 1.0) * 255.0).astype(np.uint8)
        Image.fromarray(arr, mode="RGB").save(path)
        _write_sidecar(path, meta)
    else:
        raise ValueError(f"unsupported panorama format {suffix!r}")


def save_image(path, image: np.ndarray, meta: dict | None = None) -> None:
    """Write a bare [0, 1] image (LDR stage output) as 8-bit PNG + sidecar."""
    path = Path(path)
    arr = np.round(np.clip(np.asarray(image, float), 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(path)
    if meta is not None:
        _write_sidecar(path, meta)


def _write_sidecar(path: Path, meta: dict) -> None:
    Path(str(path) + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True))


def _read_sidecar(path: Path) -> dict | None:
    side = Path(str(path) + ".json")
    if side.exists():
        return json.loads(side.read_text())
    return None


def load_pixels(path):
    """Read raw (H, W, 3) float64 pixels and metadata from any supported file."""
    if str(path) == "-":
        data = np.load(io.BytesIO(sys.stdin.buffer.read()), allow_pickle=False)
        return _map_from_npz(data)
    path = Path(path)
    suffix = path.suffix.lower()
    meta = None
    if suffix == ".npz":
        pixels, meta = _map_from_npz(np.load(path, allow_pickle=False))
    elif suffix == ".exr":
        pixels, strings = exr.read_exr(path)
        if "panophot" in strings:
            meta = json.loads(strings["panophot"])
    elif suffix == ".hdr":
        bgr = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
        if bgr is None:
            raise IOError(f"could not read {path}")
        pixels = bgr[..., ::-1].astype(np.float64)
        meta = _read_sidecar(path)
    elif suffix == ".png":
        arr = np.asarray(Image.open(path).convert("RGB"))
        pixels = arr.astype(np.float64) / 255.0
        meta = _read_sidecar(path)
    else:
        raise ValueError(f"unsupported panorama format {suffix!r}")
    return pixels, meta


def load_map(path, projection: Projection | None = None,
             calibrated: bool | None = None):
    """Load a panorama plus its metadata. Returns (RadianceMap, meta dict).

    Stored metadata wins; explicit arguments fill the gaps for foreign
    files. Without either, a 2:1 image is assumed to be a full equirect
    panorama and anything else is an error.
    """
    pixels, meta = load_pixels(path)
    meta = meta or {}
    if "projection" in meta:
        proj = Projection.from_dict(meta["projection"])
    elif projection is not None:
        proj = projection
    elif pixels.shape[1] == 2 * pixels.shape[0]:
        proj = Projection("equirect_full")
    else:
        raise ValueError("no projection metadata; pass one explicitly")

    is_cal = meta["calibrated"] if "calibrated" in meta else bool(calibrated)
    rmap = RadianceMap(np.clip(pixels, 0.0, None), proj, calibrated=is_cal,
                       exposure_scale=float(meta.get("exposure_scale", 1.0)))
    return rmap, meta
