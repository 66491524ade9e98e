"""Photometric quantities of radiance maps.

Illuminance follows the CIE definition E = integral of L cos(theta) d(omega)
over the front hemisphere; for an orthographic fisheye image that integral
collapses to pi times the mean pixel value because pixel area there is
proportional to cos(theta) d(omega). Mean spherical (scalar) illuminance is
E0 = (1/4) integral of L d(omega) over the full sphere, which gives pi * L
for a uniform field.
"""

from __future__ import annotations

import numpy as np

from . import colors
from .maps import (EQUIRECT_FULL, EQUIRECT_HEMISPHERE, ORTHOGRAPHIC,
                   CoverageError, DegenerateChromaticityError,
                   InsufficientDataError, RadianceMap, SolidAngleMap)
from .projection import axis_cosine_weights, solid_angles


def luminance_map(rmap: RadianceMap) -> np.ndarray:
    """Per-pixel photometric luminance; cd/m^2 when the map is calibrated."""
    return colors.luminance_image(rmap.pixels)


def cct_map(rmap: RadianceMap):
    """Per-pixel correlated color temperature.

    Returns (kelvin, valid): zero-energy pixels and chromaticities outside
    the McCamy validity region are NaN in ``kelvin`` with valid=False.
    CCT only depends on chromaticity, so the result is independent of any
    positive global scale on the map.
    """
    xyz = colors.xyz_image(rmap.pixels)
    s = xyz.sum(axis=-1)
    energy = s > 0
    ss = np.where(energy, s, 1.0)
    x = xyz[..., 0] / ss
    y = xyz[..., 1] / ss
    valid = energy & colors.cct_validity(x, y)
    kelvin = np.where(valid, colors.mccamy_cct(x, y), np.nan)
    return kelvin, valid


def _mean_chromaticity(xyz_flat: np.ndarray, weights_flat: np.ndarray) -> colors.Chromaticity:
    total = (xyz_flat * weights_flat[:, None]).sum(axis=0)
    s = total.sum()
    if s <= 0:
        raise DegenerateChromaticityError("zero-energy map has no chromaticity")
    return colors.Chromaticity(total[0] / s, total[1] / s)


def scene_temperature(rmap: RadianceMap, weights: SolidAngleMap | None = None) -> float:
    """CCT of the solid-angle-weighted mean chromaticity of the whole map.

    Aggregates XYZ first (the way an integrating meter sees the scene) and
    converts the mean chromaticity to CCT, rather than averaging per-pixel
    temperatures.
    """
    weights = weights or solid_angles(rmap.projection, rmap.shape)
    if weights.omega.shape != rmap.shape:
        raise ValueError("weights shape does not match the map")
    xyz = colors.xyz_image(rmap.pixels).reshape(-1, 3)
    chroma = _mean_chromaticity(xyz, weights.omega.reshape(-1))
    return colors.cct_from_xy(chroma)


def orthographic_disk_mask(shape) -> np.ndarray:
    """Pixels whose center lies in the inscribed circle of an orthographic map."""
    h, w = shape
    radius = min(h, w) / 2.0
    u = (np.arange(w) + 0.5 - w / 2.0) / radius
    v = (h / 2.0 - (np.arange(h) + 0.5)) / radius
    return (u[None, :] ** 2 + v[:, None] ** 2) <= 1.0


def orthographic_illuminance(rmap: RadianceMap) -> np.ndarray:
    """Per-channel illuminance of an orthographic fisheye map: pi/N * sum(L).

    N counts the pixels inside the circular valid region. Lux per channel
    when the map is calibrated, relative units otherwise.
    """
    if rmap.projection.kind != ORTHOGRAPHIC:
        raise CoverageError("orthographic_illuminance needs an orthographic map")
    mask = orthographic_disk_mask(rmap.shape)
    n = int(mask.sum())
    if n == 0:
        raise InsufficientDataError("no pixels inside the circular image region")
    return np.pi / n * rmap.pixels[mask].sum(axis=0)


def planar_illuminance(rmap: RadianceMap, weights: SolidAngleMap | None = None) -> np.ndarray:
    """Per-channel illuminance on the plane normal to the hemisphere axis:
    sum of L * cos(theta) * omega with theta measured from the axis.

    The cosine factor is integrated exactly over each pixel's footprint, so
    a uniform field yields exactly pi * L.
    """
    if rmap.projection.kind != EQUIRECT_HEMISPHERE:
        raise CoverageError("planar_illuminance needs a hemisphere equirect map")
    if weights is not None and weights.omega.shape != rmap.shape:
        raise ValueError("weights shape does not match the map")
    cw = axis_cosine_weights(rmap.projection, rmap.shape)
    return np.einsum("hwc,hw->c", rmap.pixels, cw)


def mean_spherical_illuminance(rmap: RadianceMap,
                               weights: SolidAngleMap | None = None) -> float:
    """Mean spherical (scalar) illuminance of a full panorama, in lux when
    calibrated: (1/4) * sum of luminance * omega over the sphere.
    """
    if rmap.projection.kind != EQUIRECT_FULL:
        raise CoverageError("mean_spherical_illuminance needs a full equirect map")
    weights = weights or solid_angles(rmap.projection, rmap.shape)
    if weights.omega.shape != rmap.shape:
        raise ValueError("weights shape does not match the map")
    y = colors.luminance_image(rmap.pixels)
    return float(0.25 * (y * weights.omega).sum())
