"""Exposure bracket merging and vignette correction.

Frames are linear (RAW-like) images normalized to [0, 1]. Merging divides
each frame by its relative exposure (time * ISO / aperture^2) and averages
with a tent weight that discards nearly-black and nearly-saturated values,
the classic multi-exposure reconstruction (Debevec & Malik, SIGGRAPH 1997).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .maps import (InsufficientDataError, InvalidModelError, Projection,
                   RadianceMap, UNPROJECTED)

UNDEREXPOSED_LEVEL = 0.005
SATURATED_LEVEL = 0.995


def relative_exposure(exposure_time: float, aperture: float, iso: float) -> float:
    """Photographic exposure proxy e = t * ISO / N^2; linear in scene radiance."""
    if exposure_time <= 0 or aperture <= 0 or iso <= 0:
        raise ValueError("exposure time, aperture and ISO must all be positive")
    return exposure_time * iso / (aperture * aperture)


@dataclass
class Frame:
    """One linear exposure with its metadata."""

    pixels: np.ndarray
    exposure_time: float
    aperture: float
    iso: float

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError("frame pixels must be (H, W, 3)")
        self.pixels = px

    @property
    def exposure(self) -> float:
        return relative_exposure(self.exposure_time, self.aperture, self.iso)


@dataclass
class ExposureBracket:
    """Ordered set of frames of one scene under one capture configuration."""

    frames: list
    config_id: str
    vignette: tuple | None = None
    projection: Projection = field(default_factory=lambda: Projection(UNPROJECTED))

    def __post_init__(self):
        if not self.frames:
            raise InsufficientDataError("bracket needs at least one frame")
        if not self.config_id:
            raise ValueError("config_id must be non-empty")
        shape = self.frames[0].pixels.shape
        if any(f.pixels.shape != shape for f in self.frames):
            raise ValueError("all frames must share the same dimensions")
        exposures = [f.exposure for f in self.frames]
        if any(b <= a for a, b in zip(exposures, exposures[1:])):
            raise ValueError("frames must be ordered by strictly increasing exposure")


def radial_poly(coeffs, r):
    """Evaluate 1 + c1*r + c2*r^2 + ... (value 1 at the principal point)."""
    out = np.ones_like(np.asarray(r, dtype=np.float64))
    rk = np.ones_like(out)
    for c in coeffs:
        rk = rk * r
        out = out + c * rk
    return out


def correct_vignette(image: np.ndarray, coeffs, principal_point=None) -> np.ndarray:
    """Divide out a radial vignette polynomial.

    ``r`` is the distance from the principal point (image center by default)
    normalized so r = 1 at the farthest corner. The polynomial must stay
    positive over the whole image.
    """
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape[:2]
    if principal_point is None:
        px, py = w / 2.0, h / 2.0
    else:
        px, py = principal_point
    xs = np.arange(w) + 0.5 - px
    ys = np.arange(h) + 0.5 - py
    r = np.hypot(xs[None, :], ys[:, None])
    corners = np.hypot([0.0 - px, w - px, 0.0 - px, w - px],
                       [0.0 - py, 0.0 - py, h - py, h - py])
    r = r / corners.max()
    falloff = radial_poly(coeffs, r)
    if falloff.min() <= 0:
        raise InvalidModelError("vignette polynomial is not positive over the image")
    return img / falloff[..., None]


def _tent_weight(values: np.ndarray) -> np.ndarray:
    w = np.minimum(values - UNDEREXPOSED_LEVEL, SATURATED_LEVEL - values)
    return np.clip(w, 0.0, None)


def merge_bracket(bracket: ExposureBracket):
    """Merge a bracket into a relative-scale radiance map.

    Each frame contributes value/exposure with a tent weight over the raw
    value (zero outside [0.005, 0.995]). Pixels saturated in every frame
    take the shortest exposure's estimate and are flagged; pixels dark in
    every frame take the longest exposure's estimate.

    Returns (RadianceMap, saturation mask). The map is uncalibrated; its
    scale is value-per-exposure-unit, deterministic across runs.
    """
    stack = np.stack([f.pixels for f in bracket.frames])  # (F, H, W, 3)
    if bracket.vignette is not None:
        stack = np.stack([correct_vignette(fr, bracket.vignette) for fr in stack])
    exposures = np.array([f.exposure for f in bracket.frames])
    raw = np.stack([f.pixels for f in bracket.frames])

    weights = _tent_weight(raw)
    estimates = stack / exposures[:, None, None, None]
    wsum = weights.sum(axis=0)
    num = (weights * estimates).sum(axis=0)
    out = np.divide(num, wsum, out=np.zeros_like(num), where=wsum > 0)

    all_saturated = np.all(raw >= SATURATED_LEVEL, axis=0)
    all_dark = np.all(raw <= UNDEREXPOSED_LEVEL, axis=0) & (wsum <= 0)
    no_weight = wsum <= 0
    # fallback estimates where no frame carries weight
    out = np.where(no_weight & all_saturated, estimates[0], out)
    out = np.where(no_weight & all_dark & ~all_saturated, estimates[-1], out)
    leftovers = no_weight & ~all_saturated & ~all_dark
    if np.any(leftovers):  # values straddling the cutoffs in every frame
        out = np.where(leftovers, estimates[-1], out)

    saturation_mask = all_saturated.any(axis=-1)
    rmap = RadianceMap(np.clip(out, 0.0, None), bracket.projection, calibrated=False)
    return rmap, saturation_mask
