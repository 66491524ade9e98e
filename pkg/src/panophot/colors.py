"""Linear RGB <-> CIE XYZ conversions and correlated color temperature.

RGB is linear with Rec.709/sRGB primaries and a D65 white point. The
conversion matrix is derived from the primary chromaticities at import
time and normalized so (1, 1, 1) maps exactly to the white point at
Y = 1 (http://www.brucelindbloom.com/index.html?Eqn_RGB_XYZ_Matrix.html).
For calibrated maps the channel units are cd/m^2, so the Y row of the
matrix combines channels directly into photometric luminance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cmf
from .maps import DegenerateChromaticityError, OutOfDomainError

# Rec.709 primaries and D65 white (CIE 1931 xy)
PRIMARIES_XY = np.array([[0.64, 0.33], [0.30, 0.60], [0.15, 0.06]])
WHITE_XY = (0.3127, 0.3290)


@dataclass(frozen=True)
class Chromaticity:
    """CIE 1931 xy chromaticity coordinates."""

    x: float
    y: float

    def __post_init__(self):
        if not (0.0 < self.x < 1.0 and 0.0 < self.y < 1.0 and self.x + self.y < 1.0):
            raise ValueError(f"chromaticity ({self.x}, {self.y}) outside the xy triangle")


@dataclass(frozen=True)
class TriStimulus:
    """CIE XYZ triple; lux when carrying illuminance, cd/m^2 for luminance."""

    X: float
    Y: float
    Z: float

    def __post_init__(self):
        if not all(np.isfinite([self.X, self.Y, self.Z])):
            raise ValueError("tristimulus values must be finite")
        if self.Y < 0:
            raise ValueError("Y must be non-negative")

    def as_array(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.Z])

    def chromaticity(self) -> Chromaticity:
        s = self.X + self.Y + self.Z
        if s == 0:
            raise DegenerateChromaticityError("zero-energy stimulus has no chromaticity")
        return Chromaticity(self.X / s, self.Y / s)


def _derive_matrix() -> np.ndarray:
    # columns are primary XYZ vectors, scaled so M @ (1,1,1) = white XYZ (Y=1)
    xy = PRIMARIES_XY
    prim = np.stack([xy[:, 0], xy[:, 1], 1.0 - xy[:, 0] - xy[:, 1]], axis=0) / xy[:, 1]
    wx, wy = WHITE_XY
    white = np.array([wx / wy, 1.0, (1.0 - wx - wy) / wy])
    scale = np.linalg.solve(prim, white)
    return prim * scale


RGB_TO_XYZ = _derive_matrix()
XYZ_TO_RGB = np.linalg.inv(RGB_TO_XYZ)
LUMA_WEIGHTS = RGB_TO_XYZ[1].copy()  # photometric luminance row


def rgb_to_xyz(rgb) -> TriStimulus:
    """Linear RGB 3-vector to CIE XYZ."""
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.shape != (3,):
        raise ValueError("rgb_to_xyz expects a 3-vector; use xyz_image for images")
    if not np.all(np.isfinite(rgb)):
        raise ValueError("rgb values must be finite")
    X, Y, Z = RGB_TO_XYZ @ rgb
    return TriStimulus(float(X), float(Y), float(Z))


def xyz_to_rgb(xyz) -> np.ndarray:
    """CIE XYZ (TriStimulus or 3-vector) to linear RGB; may leave gamut."""
    if isinstance(xyz, TriStimulus):
        xyz = xyz.as_array()
    return XYZ_TO_RGB @ np.asarray(xyz, dtype=np.float64)


def xyy_to_xyz(chroma: Chromaticity, Y: float) -> TriStimulus:
    if chroma.y == 0:
        raise DegenerateChromaticityError("y = 0 chromaticity is degenerate")
    X = chroma.x * Y / chroma.y
    Z = (1.0 - chroma.x - chroma.y) * Y / chroma.y
    return TriStimulus(X, float(Y), Z)


def xyy_to_rgb(chroma: Chromaticity, Y: float) -> np.ndarray:
    """xyY color to linear RGB. Out-of-gamut components stay negative."""
    if Y < 0:
        raise ValueError("Y must be non-negative")
    return xyz_to_rgb(xyy_to_xyz(chroma, Y))


def xyz_image(pixels: np.ndarray) -> np.ndarray:
    """Vectorized RGB->XYZ over an (..., 3) array."""
    return np.asarray(pixels, dtype=np.float64) @ RGB_TO_XYZ.T


def luminance_image(pixels: np.ndarray) -> np.ndarray:
    """Per-pixel photometric luminance (Y) of an (..., 3) linear RGB array."""
    return np.asarray(pixels, dtype=np.float64) @ LUMA_WEIGHTS


# --- correlated color temperature ------------------------------------------

# McCamy (1992), "Correlated color temperature as an explicit function of
# chromaticity coordinates", Color Res. Appl. 17(2).
MCCAMY_X0 = 0.3320
MCCAMY_Y0 = 0.1858
CCT_MIN_K = 2000.0
CCT_MAX_K = 10000.0
MAX_LOCUS_DISTANCE_UV = 0.05


def mccamy_cct(x, y):
    """Raw McCamy cubic; no validity checks. Works on scalars or arrays."""
    n = (np.asarray(x) - MCCAMY_X0) / (MCCAMY_Y0 - np.asarray(y))
    return 449.0 * n**3 + 3525.0 * n**2 + 6823.3 * n + 5520.33


def cct_from_xy(chroma: Chromaticity) -> float:
    """Correlated color temperature in kelvin via McCamy's approximation.

    Valid for chromaticities within 0.05 of the Planckian locus in CIE 1960
    uv whose nearest locus temperature lies in [2000, 10000] K; anything
    else raises OutOfDomainError rather than extrapolating silently.
    """
    dist, t_near = cmf.locus_distance(chroma.x, chroma.y)
    if dist >= MAX_LOCUS_DISTANCE_UV:
        raise OutOfDomainError(
            f"chromaticity ({chroma.x:.4f}, {chroma.y:.4f}) is {dist:.3f} from the "
            f"Planckian locus in uv (limit {MAX_LOCUS_DISTANCE_UV})")
    if not (CCT_MIN_K <= t_near <= CCT_MAX_K):
        raise OutOfDomainError(
            f"nearest locus temperature {t_near:.0f} K outside "
            f"[{CCT_MIN_K:.0f}, {CCT_MAX_K:.0f}] K")
    return float(mccamy_cct(chroma.x, chroma.y))


def cct_validity(x, y):
    """Vectorized validity mask of the CCT approximation for xy arrays."""
    dist, t_near = cmf.locus_distance(x, y)
    return (dist < MAX_LOCUS_DISTANCE_UV) & (t_near >= CCT_MIN_K) & (t_near <= CCT_MAX_K)
