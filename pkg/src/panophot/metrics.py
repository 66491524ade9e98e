"""Solid-angle-weighted evaluation metrics and dataset statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import colors
from .maps import InsufficientDataError, RadianceMap, SolidAngleMap
from .photometry import _mean_chromaticity, luminance_map, mean_spherical_illuminance, scene_temperature
from .projection import solid_angles

QUANTILES = (1, 10, 20, 30, 40, 50, 60, 70, 80, 90, 95, 99)


def _weights_array(weights, shape):
    if weights is None:
        return np.ones(shape, dtype=np.float64)
    om = weights.omega if isinstance(weights, SolidAngleMap) else np.asarray(weights, float)
    if om.shape != shape:
        raise ValueError(f"weights shape {om.shape} does not match data {shape}")
    return om


def weighted_rmse(pred: np.ndarray, gt: np.ndarray, weights=None) -> float:
    """sqrt(sum w (p - g)^2 / sum w); plain RMSE under uniform weights."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {gt.shape}")
    w = _weights_array(weights, pred.shape[:2])
    while w.ndim < pred.ndim:
        w = w[..., None]
    w = np.broadcast_to(w, pred.shape)
    return float(np.sqrt((w * (pred - gt) ** 2).sum() / w.sum()))


def si_rmse(pred: np.ndarray, gt: np.ndarray, weights=None) -> float:
    """Scale-invariant RMSE: weighted RMSE after the single optimal rescale.

    The multiplier alpha* = sum(w p g) / sum(w p^2) is the closed-form
    minimizer, so si_rmse(alpha * pred, gt) is constant in alpha > 0 and
    never exceeds weighted_rmse(pred, gt).
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {gt.shape}")
    w = _weights_array(weights, pred.shape[:2])
    while w.ndim < pred.ndim:
        w = w[..., None]
    w = np.broadcast_to(w, pred.shape)
    denom = float((w * pred * pred).sum())
    if denom <= 0:
        raise ValueError("prediction has no energy; optimal scale undefined")
    alpha = float((w * pred * gt).sum()) / denom
    return weighted_rmse(alpha * pred, gt, weights)


def relative_error_map(pred: np.ndarray, gt: np.ndarray, weights=None):
    """Per-pixel |p - g| / g with a solid-angle-weighted mean.

    Pixels with g = 0 (or invalid NaN entries) are excluded from the mean
    and returned as NaN in the map. Returns (map, mean, n_excluded).
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {gt.shape}")
    w = _weights_array(weights, gt.shape)
    ok = np.isfinite(gt) & np.isfinite(pred) & (gt != 0)
    err = np.full(gt.shape, np.nan)
    err[ok] = np.abs(pred[ok] - gt[ok]) / gt[ok]
    wsum = float(w[ok].sum())
    if wsum <= 0:
        raise InsufficientDataError("no valid pixels to compare")
    mean = float((w[ok] * err[ok]).sum() / wsum)
    return err, mean, int((~ok).sum())


def scalar_r_squared(preds, gts) -> float:
    """Coefficient of determination of scalar predictions about mean(gts)."""
    p = np.asarray(preds, dtype=np.float64)
    g = np.asarray(gts, dtype=np.float64)
    if p.shape != g.shape or p.ndim != 1:
        raise ValueError("preds and gts must be 1-D and the same length")
    if p.size < 2:
        raise InsufficientDataError("need at least 2 pairs")
    ss_tot = float(((g - g.mean()) ** 2).sum())
    if ss_tot <= 0:
        raise ValueError("ground truth has zero variance")
    ss_res = float(((g - p) ** 2).sum())
    return 1.0 - ss_res / ss_tot


@dataclass
class MetricReport:
    """Bundle of the standard comparison metrics (unset entries are None)."""

    rmse: float | None = None
    si_rmse: float | None = None
    mean_relative_error: float | None = None
    r_squared: float | None = None

    def to_dict(self) -> dict:
        return {"rmse": self.rmse, "si_rmse": self.si_rmse,
                "mean_relative_error": self.mean_relative_error,
                "r_squared": self.r_squared}


def compare_maps(pred: np.ndarray, gt: np.ndarray, weights=None) -> MetricReport:
    """Weighted RMSE + siRMSE + mean relative error for two scalar maps."""
    _, mre, _ = relative_error_map(pred, gt, weights)
    return MetricReport(rmse=weighted_rmse(pred, gt, weights),
                        si_rmse=si_rmse(pred, gt, weights),
                        mean_relative_error=mre)


@dataclass
class SourceStats:
    """Photometric summary of one light-source mask."""

    mask_id: str
    mean_luminance: float
    mean_temperature: float | None
    solid_angle_sr: float
    temperature_valid: bool

    def to_dict(self) -> dict:
        return {"mask_id": self.mask_id, "mean_luminance_cd_m2": self.mean_luminance,
                "mean_temperature_k": self.mean_temperature,
                "solid_angle_sr": self.solid_angle_sr,
                "temperature_valid": self.temperature_valid}


def light_source_stats(rmap: RadianceMap, masks, weights: SolidAngleMap | None = None):
    """Per-mask mean luminance, energy-weighted CCT and total solid angle.

    ``masks`` maps an id to a boolean (H, W) array. Sources whose mean
    chromaticity falls outside CCT validity get temperature None.
    """
    weights = weights or solid_angles(rmap.projection, rmap.shape)
    om = weights.omega
    lum = luminance_map(rmap)
    xyz = colors.xyz_image(rmap.pixels)
    out = []
    for mask_id, mask in masks.items():
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != rmap.shape:
            raise ValueError(f"mask {mask_id!r} shape {mask.shape} does not match map")
        if not mask.any():
            raise InsufficientDataError(f"mask {mask_id!r} is empty")
        w = om[mask]
        mean_lum = float((lum[mask] * w).sum() / w.sum())
        try:
            chroma = _mean_chromaticity(xyz[mask], w)
            cct = colors.cct_from_xy(chroma)
            valid = True
        except ValueError:
            cct, valid = None, False
        out.append(SourceStats(mask_id=str(mask_id), mean_luminance=mean_lum,
                               mean_temperature=cct, solid_angle_sr=float(w.sum()),
                               temperature_valid=valid))
    return out


@dataclass
class DatasetStats:
    """Streaming fold of per-map MSI and scene temperature."""

    msi: list = field(default_factory=list)
    temperature: list = field(default_factory=list)
    names: list = field(default_factory=list)
    n_temperature_invalid: int = 0

    def add(self, rmap: RadianceMap, name: str = ""):
        if not rmap.calibrated:
            raise ValueError(f"map {name!r} is uncalibrated; statistics need "
                             "calibrated maps")
        w = solid_angles(rmap.projection, rmap.shape)
        self.msi.append(mean_spherical_illuminance(rmap, w))
        try:
            self.temperature.append(scene_temperature(rmap, w))
        except ValueError:
            self.temperature.append(float("nan"))
            self.n_temperature_invalid += 1
        self.names.append(name)

    def merge(self, other: "DatasetStats"):
        self.msi.extend(other.msi)
        self.temperature.extend(other.temperature)
        self.names.extend(other.names)
        self.n_temperature_invalid += other.n_temperature_invalid

    def quantiles(self, values) -> dict:
        vals = np.asarray(values, dtype=np.float64)
        vals = vals[np.isfinite(vals)]
        if vals.size == 0:
            raise InsufficientDataError("no finite values")
        return {str(q): float(np.percentile(vals, q)) for q in QUANTILES}

    def histogram(self, values, bins=50, value_range=None):
        vals = np.asarray(values, dtype=np.float64)
        vals = vals[np.isfinite(vals)]
        if value_range is None and vals.size and vals.min() == vals.max():
            value_range = (vals.min() - 0.5, vals.max() + 0.5)
        counts, edges = np.histogram(vals, bins=bins, range=value_range)
        return edges, counts

    def report(self) -> dict:
        msi = np.asarray(self.msi)
        temp = np.asarray(self.temperature)
        finite_t = temp[np.isfinite(temp)]
        rep = {
            "n_maps": len(self.msi),
            "per_map": [{"name": n, "msi_lux": m, "temperature_k": None if np.isnan(t) else t}
                        for n, m, t in zip(self.names, msi, temp)],
            "msi_quantiles_lux": self.quantiles(msi) if len(self.msi) else {},
            "median_msi_lux": float(np.median(msi)) if len(self.msi) else None,
            "n_temperature_invalid": self.n_temperature_invalid,
        }
        if finite_t.size:
            rep["temperature_quantiles_k"] = self.quantiles(temp)
            rep["median_temperature_k"] = float(np.median(finite_t))
        return rep


def dataset_statistics(maps, names=None) -> DatasetStats:
    """Fold an iterable of calibrated maps into dataset statistics."""
    stats = DatasetStats()
    for idx, rmap in enumerate(maps):
        name = names[idx] if names else str(idx)
        stats.add(rmap, name)
    return stats
