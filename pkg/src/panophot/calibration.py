"""Per-channel absolute calibration from chroma-meter readings.

A chroma meter reports scene illuminance Ev (lux) and CIE xy chromaticity;
converting that xyY triple to RGB gives per-channel lux targets. Regressing
targets against the per-channel illuminance integrated from uncalibrated
HDR captures (through the origin: zero light maps to zero lux) yields one
multiplicative coefficient per channel and capture configuration.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import colors
from .maps import InsufficientDataError, RadianceMap

log = logging.getLogger(__name__)

PROFILE_VERSION = 1


@dataclass(frozen=True)
class ChromaReading:
    """One chroma-meter sample: illuminance in lux plus xy chromaticity."""

    ev_lux: float
    x: float
    y: float

    def __post_init__(self):
        if self.ev_lux < 0:
            raise ValueError("Ev must be non-negative")
        colors.Chromaticity(self.x, self.y)  # validates the coordinates

    @property
    def chromaticity(self) -> colors.Chromaticity:
        return colors.Chromaticity(self.x, self.y)


@dataclass(frozen=True)
class CalibrationSample:
    """Uncalibrated per-channel illuminance paired with a meter reading."""

    config_id: str
    e_rgb: tuple
    reading: ChromaReading

    def __post_init__(self):
        e = tuple(float(v) for v in self.e_rgb)
        if len(e) != 3 or any(v < 0 for v in e):
            raise ValueError("e_rgb must be three non-negative values")
        object.__setattr__(self, "e_rgb", e)


@dataclass
class ConfigCalibration:
    """Fitted coefficients for one capture configuration."""

    k: tuple
    r_squared: tuple
    n_samples: int

    def __post_init__(self):
        if any(v <= 0 for v in self.k):
            raise ValueError("calibration coefficients must be positive")
        if any(not (0.0 <= r <= 1.0) for r in self.r_squared):
            raise ValueError("R^2 must lie in [0, 1]")
        if self.n_samples < 2:
            raise ValueError("a fit needs at least 2 samples")


@dataclass
class CalibrationProfile:
    """Per-configuration coefficients with fit diagnostics."""

    configs: dict
    created: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    version: int = PROFILE_VERSION

    def to_json(self) -> str:
        doc = {
            "version": self.version,
            "created": self.created,
            "configs": {
                cid: {"k": list(c.k), "r2": list(c.r_squared), "n": c.n_samples}
                for cid, c in self.configs.items()
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "CalibrationProfile":
        doc = json.loads(text)
        if doc.get("version") != PROFILE_VERSION:
            raise ValueError(f"unsupported profile version {doc.get('version')!r}")
        configs = {
            cid: ConfigCalibration(k=tuple(c["k"]), r_squared=tuple(c["r2"]),
                                   n_samples=int(c["n"]))
            for cid, c in doc["configs"].items()
        }
        return CalibrationProfile(configs=configs, created=doc.get("created", ""))


def reading_to_channel_targets(reading: ChromaReading) -> np.ndarray:
    """Per-channel lux targets from a meter reading (xyY converted to RGB)."""
    return colors.xyy_to_rgb(reading.chromaticity, reading.ev_lux)


def _fit_channel(e_u: np.ndarray, target: np.ndarray):
    # least squares through the origin, R^2 about the target mean
    denom = float(e_u @ e_u)
    if denom <= 0:
        raise InsufficientDataError("all-zero uncalibrated illuminances")
    k = float(e_u @ target) / denom
    residual = target - k * e_u
    ss_res = float(residual @ residual)
    ss_tot = float(((target - target.mean()) ** 2).sum())
    if ss_tot <= 0:
        r2 = 1.0 if ss_res <= 1e-12 * max(1.0, float(target @ target)) else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return k, float(np.clip(r2, 0.0, 1.0))


def fit_profile(samples) -> CalibrationProfile:
    """Fit per-channel coefficients for every configuration in ``samples``.

    Samples whose reading converts to a negative channel target (out of
    gamut) are excluded from the fit and reported through the module logger.
    Raises InsufficientDataError when a configuration keeps fewer than two
    usable samples.
    """
    samples = list(samples)
    if not samples:
        raise InsufficientDataError("no calibration samples")

    by_config: dict = {}
    rejected = 0
    for idx, s in enumerate(samples):
        target = reading_to_channel_targets(s.reading)
        if np.any(target < 0):
            rejected += 1
            log.warning("sample %d (config %s): out-of-gamut reading rejected "
                        "(targets %s)", idx, s.config_id, np.round(target, 3))
            continue
        by_config.setdefault(s.config_id, []).append((np.array(s.e_rgb), target))
    if rejected:
        log.warning("%d of %d samples rejected for out-of-gamut readings",
                    rejected, len(samples))

    configs = {}
    for cid, pairs in sorted(by_config.items()):
        if len(pairs) < 2:
            raise InsufficientDataError(
                f"configuration {cid!r} has {len(pairs)} usable samples; need >= 2")
        e_u = np.stack([p[0] for p in pairs])       # (N, 3)
        targets = np.stack([p[1] for p in pairs])   # (N, 3)
        ks, r2s = [], []
        for c in range(3):
            k, r2 = _fit_channel(e_u[:, c], targets[:, c])
            ks.append(k)
            r2s.append(r2)
        configs[cid] = ConfigCalibration(k=tuple(ks), r_squared=tuple(r2s),
                                         n_samples=len(pairs))
    if not configs:
        raise InsufficientDataError("no configuration had usable samples")
    return CalibrationProfile(configs=configs)


def apply_profile(rmap: RadianceMap, profile: CalibrationProfile,
                  config_id: str) -> RadianceMap:
    """Scale an uncalibrated map by its configuration's coefficients."""
    if rmap.calibrated:
        raise ValueError("map is already calibrated")
    if config_id not in profile.configs:
        raise KeyError(f"profile has no configuration {config_id!r}")
    k = np.array(profile.configs[config_id].k)
    return RadianceMap(rmap.pixels * k, rmap.projection, calibrated=True,
                       exposure_scale=rmap.exposure_scale)
