"""Analytic panorama generators with closed-form photometric ground truth.

Each generator returns (RadianceMap, truth dict); the truths are exact
integrals, not discretizations, so they double as oracles for the
illuminance/MSI/CCT pipelines. All generators are deterministic.
"""

from __future__ import annotations

import numpy as np

from . import cmf, colors
from .maps import FULL_SPHERE, OutOfDomainError, RadianceMap
from .projection import _pixel_dirs


def _as_rgb(value) -> np.ndarray:
    v = np.asarray(value, dtype=np.float64)
    if v.ndim == 0:
        v = np.full(3, float(v))
    if v.shape != (3,):
        raise ValueError("radiance must be a scalar or a 3-vector")
    if np.any(v < 0):
        raise ValueError("radiance must be non-negative")
    return v


def uniform_sphere(radiance, size=(64, 128)):
    """Constant radiance over the full sphere.

    Truth: MSI = pi * Y(radiance); planar illuminance from any hemisphere
    of it = pi * radiance per channel.
    """
    rgb = _as_rgb(radiance)
    h, w = int(size[0]), int(size[1])
    px = np.broadcast_to(rgb, (h, w, 3)).copy()
    rmap = RadianceMap(px, FULL_SPHERE, calibrated=True)
    truth = {
        "msi_lux": float(np.pi * colors.LUMA_WEIGHTS @ rgb),
        "planar_e": (np.pi * rgb).tolist(),
    }
    return rmap, truth


def disk_source(radiance, axis, angular_radius_deg, background=0.0, size=(256, 512),
                supersample=32):
    """Spherical-cap source of the given angular radius about ``axis``.

    The map is anti-aliased: pixels crossing the cap boundary get the
    fractional coverage of their footprint (supersampled), so discrete
    integrals agree with the closed forms well below the percent level.

    Truth: cap solid angle Omega = 2 pi (1 - cos rho) and
    MSI = (Y(L) - Y(Lb)) * Omega / 4 + pi * Y(Lb).
    """
    if not (0.0 < angular_radius_deg < 90.0):
        raise ValueError("angular radius must be in (0, 90) degrees")
    rho = np.deg2rad(angular_radius_deg)
    fg = _as_rgb(radiance)
    bg = _as_rgb(background)
    ax = np.asarray(axis, dtype=np.float64)
    ax = ax / np.linalg.norm(ax)
    h, w = int(size[0]), int(size[1])
    cos_rho = np.cos(rho)

    ii, jj = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    centers, _ = _pixel_dirs(FULL_SPHERE, (h, w), ii, jj)
    coverage = (centers @ ax >= cos_rho).astype(np.float64)

    # probe pixel corners/edges to find boundary pixels, then supersample them
    off = np.array([-0.5, 0.0, 0.5])
    probe = np.zeros((h, w, 9))
    k = 0
    for oi in off:
        for oj in off:
            d, _ = _pixel_dirs(FULL_SPHERE, (h, w), ii + oi, jj + oj)
            probe[:, :, k] = d @ ax
            k += 1
    mixed = (probe.max(axis=2) >= cos_rho) & (probe.min(axis=2) < cos_rho)
    bi, bj = np.nonzero(mixed)
    if bi.size:
        coverage[bi, bj] = _cap_coverage(bi, bj, (h, w), ax, cos_rho, supersample)

    px = bg[None, None, :] + coverage[..., None] * (fg - bg)[None, None, :]
    px = np.clip(px, 0.0, None)
    rmap = RadianceMap(px, FULL_SPHERE, calibrated=True)
    omega = 2.0 * np.pi * (1.0 - cos_rho)
    y_fg = float(colors.LUMA_WEIGHTS @ fg)
    y_bg = float(colors.LUMA_WEIGHTS @ bg)
    truth = {
        "omega_sr": omega,
        "msi_lux": (y_fg - y_bg) * omega / 4.0 + np.pi * y_bg,
    }
    return rmap, truth


def _cap_coverage(bi, bj, shape, axis, cos_rho, n_phi):
    """Solid-angle coverage of the cap over boundary pixels.

    For a fixed azimuth phi the cap condition cos(t)*P + sin(t)*Q >= cos(rho)
    (P, Q from the axis) is an interval in polar angle, so coverage is exact
    in theta and only the azimuth is supersampled.
    """
    h, w = shape
    theta_lo = np.pi * bi / h
    theta_hi = np.pi * (bi + 1) / h
    band = np.cos(theta_lo) - np.cos(theta_hi)

    sub = (np.arange(n_phi) + 0.5) / n_phi
    phi = 2.0 * np.pi * (bj[:, None] + sub[None, :]) / w - np.pi  # (n, s)
    p = axis[1]
    q = axis[0] * np.sin(phi) + axis[2] * np.cos(phi)
    r = np.hypot(p, q)
    ratio = np.divide(cos_rho, r, out=np.full_like(r, np.inf), where=r > 0)
    psi = np.arccos(np.clip(ratio, -1.0, 1.0))
    delta = np.arctan2(q, p)

    lo = theta_lo[:, None]
    hi = theta_hi[:, None]
    inside = np.zeros_like(phi)
    for k in (-1.0, 0.0, 1.0):  # cos is periodic; the row band may wrap
        a = np.maximum(lo, delta - psi + 2.0 * np.pi * k)
        b = np.minimum(hi, delta + psi + 2.0 * np.pi * k)
        ok = (b > a) & (ratio <= 1.0)
        inside += np.where(ok, np.cos(a) - np.cos(b), 0.0)
    return inside.mean(axis=1) / band


def blackbody_panorama(temperature_k: float, magnitude: float = 1.0, size=(64, 128)):
    """Panorama whose every pixel has the chromaticity of a blackbody.

    The chromaticity comes from integrating the Planck spectrum against the
    embedded CIE 2-degree observer; the per-pixel luminance is ``magnitude``.
    """
    if not (2000.0 <= temperature_k <= 10000.0):
        raise OutOfDomainError("blackbody temperature must be in [2000, 10000] K")
    if magnitude < 0:
        raise ValueError("magnitude must be non-negative")
    x, y = cmf.planckian_xy(float(temperature_k))
    rgb = colors.xyy_to_rgb(colors.Chromaticity(x, y), magnitude)
    if np.any(rgb < 0):  # Planckian colors in this range sit inside Rec.709
        rgb = np.clip(rgb, 0.0, None)
    h, w = int(size[0]), int(size[1])
    px = np.broadcast_to(rgb, (h, w, 3)).copy()
    rmap = RadianceMap(px, FULL_SPHERE, calibrated=True)
    truth = {
        "cct_k": float(temperature_k),
        "chromaticity": [float(x), float(y)],
        "msi_lux": float(np.pi * magnitude),
    }
    return rmap, truth
