"""Seedable LDR degradation pipeline for HDR prediction experiments.

A calibrated (or relative) HDR map is re-exposed so a luminance percentile
hits a fixed anchor, clipped to [0, 1], then optionally hue-shifted, gamma
encoded, quantized and perturbed with Gaussian noise. Every stage is
deterministic given (spec, seed); noise is clipped back to [0, 1] after it
is added.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .maps import RadianceMap
from .colors import luminance_image


@dataclass(frozen=True)
class DegradationSpec:
    """Parameters of the degradation chain. ``None`` disables a stage."""

    reexpose_percentile: float = 90.0
    reexpose_anchor: float = 0.8
    gamma: float | None = 2.2
    quantize_bits: int | None = 8
    noise_variance_range: tuple | None = (0.0, 0.03)
    hue_shift_variance: float | None = 0.03
    apply_hue: bool = False
    rng_seed: int | None = None

    def __post_init__(self):
        if not (0.0 < self.reexpose_percentile < 100.0):
            raise ValueError("percentile must be in (0, 100)")
        if not (0.0 < self.reexpose_anchor <= 1.0):
            raise ValueError("anchor must be in (0, 1]")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.quantize_bits is not None and not (1 <= self.quantize_bits <= 16):
            raise ValueError("quantize_bits must be in [1, 16]")
        if self.noise_variance_range is not None:
            lo, hi = self.noise_variance_range
            if not (0.0 <= lo <= hi):
                raise ValueError("noise variance range must satisfy 0 <= lo <= hi")
            object.__setattr__(self, "noise_variance_range", (float(lo), float(hi)))
        if self.hue_shift_variance is not None and self.hue_shift_variance < 0:
            raise ValueError("hue variance must be non-negative")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "DegradationSpec":
        d = json.loads(text)
        if d.get("noise_variance_range") is not None:
            d["noise_variance_range"] = tuple(d["noise_variance_range"])
        return DegradationSpec(**d)


def reexpose_clip(rmap, percentile: float = 90.0, anchor: float = 0.8):
    """Scale so the luminance percentile equals ``anchor``, then clip to [0, 1].

    The percentile is taken on the photometric luminance channel so color
    balance is preserved. Returns (ldr, scale); ``scale`` is the factor that
    was applied before clipping, i.e. the ground-truth exposure.
    """
    pixels = rmap.pixels if isinstance(rmap, RadianceMap) else np.asarray(rmap, float)
    lum = luminance_image(pixels)
    level = float(np.percentile(lum, percentile))
    if level <= 0:
        raise ValueError("map has no positive luminance at the anchor percentile")
    scale = anchor / level
    return np.clip(pixels * scale, 0.0, 1.0), scale


def gamma_encode(image: np.ndarray, gamma: float = 2.2) -> np.ndarray:
    """Display encoding x -> x^(1/gamma) on [0, 1] values."""
    return np.asarray(image, dtype=np.float64) ** (1.0 / gamma)


def gamma_decode(image: np.ndarray, gamma: float = 2.2) -> np.ndarray:
    """Exact inverse of gamma_encode."""
    return np.asarray(image, dtype=np.float64) ** gamma


def quantize(image: np.ndarray, bits: int = 8) -> np.ndarray:
    """Round [0, 1] values onto the 2^bits - 1 uniform levels."""
    levels = float(2 ** bits - 1)
    return np.round(np.asarray(image, dtype=np.float64) * levels) / levels


def add_noise(image: np.ndarray, spec: DegradationSpec, seed=None):
    """Additive Gaussian noise with one variance drawn uniformly per image.

    Returns (noisy image clipped to [0, 1], drawn variance). Bit-reproducible
    for a given seed.
    """
    if spec.noise_variance_range is None:
        return np.asarray(image, dtype=np.float64), 0.0
    lo, hi = spec.noise_variance_range
    rng = np.random.default_rng(_resolve_seed(spec, seed))
    variance = float(rng.uniform(lo, hi))
    noisy = image + rng.normal(0.0, np.sqrt(variance), size=np.shape(image))
    return np.clip(noisy, 0.0, 1.0), variance


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Vectorized RGB -> HSV with hue in turns [0, 1)."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    delta = maxc - minc
    sat = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)
    dd = np.where(delta > 0, delta, 1.0)
    hue = np.where(maxc == r, (g - b) / dd,
                   np.where(maxc == g, 2.0 + (b - r) / dd, 4.0 + (r - g) / dd))
    hue = np.where(delta > 0, (hue / 6.0) % 1.0, 0.0)
    return np.stack([hue, sat, maxc], axis=-1)


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    """Inverse of rgb_to_hsv."""
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    h6 = (h % 1.0) * 6.0
    k = np.floor(h6)
    f = h6 - k
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    k = k.astype(np.int64) % 6
    r = np.choose(k, [v, q, p, p, t, v])
    g = np.choose(k, [t, v, v, q, p, p])
    b = np.choose(k, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def shift_hue(image: np.ndarray, offset_turns: float) -> np.ndarray:
    """Rotate every pixel's hue by a fixed offset (in turns, wrap-around).

    Saturation and value are untouched, so gray pixels are fixed points and
    the per-pixel max channel is preserved exactly.
    """
    hsv = rgb_to_hsv(image)
    hsv[..., 0] = (hsv[..., 0] + offset_turns) % 1.0
    return hsv_to_rgb(hsv)


def hue_shift(image: np.ndarray, spec: DegradationSpec, seed=None):
    """Random global hue rotation, offset ~ N(0, hue_shift_variance) in turns.

    Returns (shifted image, drawn offset).
    """
    if spec.hue_shift_variance is None or spec.hue_shift_variance == 0.0:
        return np.asarray(image, dtype=np.float64), 0.0
    rng = np.random.default_rng(_resolve_seed(spec, seed))
    offset = float(rng.normal(0.0, np.sqrt(spec.hue_shift_variance)))
    return shift_hue(image, offset), offset


def _resolve_seed(spec: DegradationSpec, seed):
    if seed is not None:
        return seed
    return spec.rng_seed if spec.rng_seed is not None else 0


@dataclass
class DegradationResult:
    """LDR image plus everything needed to undo/score the degradation."""

    image: np.ndarray
    scale: float
    noise_variance: float | None
    hue_offset: float | None
    seed: int

    def metadata(self) -> dict:
        return {"scale": self.scale, "noise_variance": self.noise_variance,
                "hue_offset": self.hue_offset, "seed": self.seed}


def degrade_all(rmap, spec: DegradationSpec | None = None, seed=None) -> DegradationResult:
    """Full chain: reexpose+clip -> (hue) -> gamma -> quantize -> noise.

    The hue stage runs only when ``spec.apply_hue`` is set (used for color
    temperature experiments). Per-stage seeds are derived from the one seed,
    so the whole chain is reproducible.
    """
    spec = spec or DegradationSpec()
    seed = int(_resolve_seed(spec, seed))
    hue_seed, noise_seed = np.random.SeedSequence(seed).spawn(2)

    img, scale = reexpose_clip(rmap, spec.reexpose_percentile, spec.reexpose_anchor)
    hue_offset = None
    if spec.apply_hue:
        img, hue_offset = hue_shift(img, spec, hue_seed)
    if spec.gamma is not None:
        img = gamma_encode(img, spec.gamma)
    if spec.quantize_bits is not None:
        img = quantize(img, spec.quantize_bits)
    variance = None
    if spec.noise_variance_range is not None:
        img, variance = add_noise(img, spec, noise_seed)
    return DegradationResult(image=img, scale=scale, noise_variance=variance,
                             hue_offset=hue_offset, seed=seed)
