"""Core data types shared by every panophot module.

A RadianceMap is a linear, non-negative 3-channel float image together with
the projection that maps its pixels onto directions. When ``calibrated`` is
True the channels are in absolute photometric units (cd/m^2 per channel,
combining to photometric luminance through the green-weighted sum).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class CoverageError(ValueError):
    """A requested view needs directions outside the source's coverage."""


class InsufficientDataError(ValueError):
    """Not enough samples/pixels/frames to perform the operation."""


class OutOfDomainError(ValueError):
    """Input outside the validity region of an approximation."""


class DegenerateChromaticityError(ValueError):
    """Chromaticity with zero energy (y = 0 or X+Y+Z = 0)."""


class InvalidModelError(ValueError):
    """A parametric model (e.g. vignette polynomial) is non-physical."""


# Projection kinds
EQUIRECT_FULL = "equirect_full"
EQUIRECT_HEMISPHERE = "equirect_hemisphere"
PERSPECTIVE = "perspective"
ORTHOGRAPHIC = "orthographic"
FISHEYE_UNIFIED = "fisheye_unified"
# merged sensor data whose geometric mapping is not established yet;
# photometric integrals and reprojection refuse such maps
UNPROJECTED = "unprojected"

_KINDS = (EQUIRECT_FULL, EQUIRECT_HEMISPHERE, PERSPECTIVE, ORTHOGRAPHIC,
          FISHEYE_UNIFIED, UNPROJECTED)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Unified-sphere (Mei) omnidirectional camera parameters.

    ``xi`` is the sphere offset, ``focal`` the focal length in pixels,
    ``(cx, cy)`` the principal point in pixel coordinates and ``distortion``
    up to four coefficients (k1, k2, p1, p2). A pure radial polynomial
    model (r = poly(theta)) is expressed with ``model="radial_poly"`` and
    the polynomial coefficients in ``distortion``.
    """

    focal: float
    cx: float
    cy: float
    width: int
    height: int
    xi: float = 0.0
    distortion: tuple = ()
    model: str = "unified_sphere"

    def __post_init__(self):
        if self.focal <= 0:
            raise ValueError("focal length must be positive")
        if not (0 <= self.cx <= self.width and 0 <= self.cy <= self.height):
            raise ValueError("principal point must lie inside the image")
        if self.model not in ("unified_sphere", "radial_poly"):
            raise ValueError(f"unknown camera model {self.model!r}")


@dataclass(frozen=True)
class Projection:
    """Tag describing how a pixel grid maps onto directions.

    Conventions (right-handed, y up):
      * equirect_full: width = 2*height, azimuth spans [-pi, pi) left to
        right with the forward axis (0, 0, 1) at the image center, polar
        angle spans [0, pi] top to bottom (+y zenith at the top row).
      * equirect_hemisphere: width = 2*height, same polar rows but azimuth
        restricted to [-pi/2, pi/2]; the hemisphere axis (0, 0, 1) sits at
        the image center.
      * perspective: pinhole, ``fov_deg`` is the horizontal field of view;
        the vertical FOV follows from the aspect ratio.
      * orthographic: fisheye hemisphere with image radius proportional to
        sin(theta); the valid region is the inscribed circle.
      * fisheye_unified: unified-sphere camera described by ``intrinsics``.
    """

    kind: str
    fov_deg: float | None = None
    intrinsics: CameraIntrinsics | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown projection kind {self.kind!r}")
        if self.kind == PERSPECTIVE:
            if self.fov_deg is None or not (0.0 < self.fov_deg < 180.0):
                raise ValueError("perspective projection needs fov_deg in (0, 180)")
        if self.kind == FISHEYE_UNIFIED and self.intrinsics is None:
            raise ValueError("fisheye_unified projection needs intrinsics")

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.fov_deg is not None:
            d["fov_deg"] = self.fov_deg
        if self.intrinsics is not None:
            c = self.intrinsics
            d["intrinsics"] = {
                "model": c.model, "focal": c.focal, "cx": c.cx, "cy": c.cy,
                "width": c.width, "height": c.height, "xi": c.xi,
                "distortion": list(c.distortion),
            }
        return d

    @staticmethod
    def from_dict(d: dict) -> "Projection":
        intr = None
        if d.get("intrinsics"):
            c = dict(d["intrinsics"])
            c["distortion"] = tuple(c.get("distortion", ()))
            intr = CameraIntrinsics(**c)
        return Projection(kind=d["kind"], fov_deg=d.get("fov_deg"), intrinsics=intr)


FULL_SPHERE = Projection(EQUIRECT_FULL)
HEMISPHERE = Projection(EQUIRECT_HEMISPHERE)
ORTHO = Projection(ORTHOGRAPHIC)


def perspective(fov_deg: float) -> Projection:
    return Projection(PERSPECTIVE, fov_deg=fov_deg)


def fisheye(intrinsics: CameraIntrinsics) -> Projection:
    return Projection(FISHEYE_UNIFIED, intrinsics=intrinsics)


@dataclass
class RadianceMap:
    """Linear radiance image with projection tag and calibration state.

    ``pixels`` is (height, width, 3) float64, all values finite and >= 0.
    Treat instances as immutable: no panophot operation mutates its inputs,
    so maps are safe to share across workers.
    """

    pixels: np.ndarray
    projection: Projection
    calibrated: bool = False
    exposure_scale: float = 1.0

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"pixels must be (H, W, 3), got {px.shape}")
        if not np.all(np.isfinite(px)):
            raise ValueError("pixels must be finite")
        if np.any(px < 0):
            raise ValueError("pixels must be non-negative")
        h, w = px.shape[:2]
        if self.projection.kind in (EQUIRECT_FULL, EQUIRECT_HEMISPHERE) and w != 2 * h:
            raise ValueError(
                f"{self.projection.kind} requires width = 2 * height, got {w}x{h}")
        if self.exposure_scale <= 0 or not np.isfinite(self.exposure_scale):
            raise ValueError("exposure_scale must be positive and finite")
        self.pixels = px

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple:
        return self.pixels.shape[:2]

    def scaled(self, factor) -> "RadianceMap":
        """New map with pixels multiplied by a per-channel or scalar factor."""
        return RadianceMap(self.pixels * np.asarray(factor, dtype=np.float64),
                           self.projection, calibrated=self.calibrated,
                           exposure_scale=self.exposure_scale)


@dataclass
class SolidAngleMap:
    """Per-pixel solid angles (steradians) for a projection/size pair."""

    omega: np.ndarray
    projection: Projection

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=np.float64)
        if om.ndim != 2:
            raise ValueError("omega must be a 2-D array")
        if np.any(om < 0) or not np.all(np.isfinite(om)):
            raise ValueError("solid angles must be finite and >= 0")
        self.omega = om

    @property
    def total(self) -> float:
        return float(self.omega.sum())


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero vector")
    return v / n


@dataclass(frozen=True)
class ViewFrame:
    """Orientation of an extracted view: orthonormal forward/up pair."""

    forward: tuple = (0.0, 0.0, 1.0)
    up: tuple = (0.0, 1.0, 0.0)

    def __post_init__(self):
        f = _unit(self.forward)
        u = _unit(self.up)
        if abs(float(f @ u)) > 1e-8:
            raise ValueError("forward and up must be perpendicular")
        object.__setattr__(self, "forward", tuple(f))
        object.__setattr__(self, "up", tuple(u))

    def rotation(self) -> np.ndarray:
        """3x3 matrix whose columns are (right, up, forward)."""
        f = np.array(self.forward)
        u = np.array(self.up)
        r = np.cross(u, f)
        return np.stack([r, u, f], axis=1)

    @staticmethod
    def from_angles(yaw_deg: float = 0.0, pitch_deg: float = 0.0) -> "ViewFrame":
        """Frame looking at azimuth ``yaw`` and elevation ``pitch`` (degrees)."""
        yaw = np.deg2rad(yaw_deg)
        pitch = np.deg2rad(pitch_deg)
        f = np.array([np.cos(pitch) * np.sin(yaw),
                      np.sin(pitch),
                      np.cos(pitch) * np.cos(yaw)])
        # up = rotate +y by the same pitch around the horizontal right axis
        u = np.array([-np.sin(pitch) * np.sin(yaw),
                      np.cos(pitch),
                      -np.sin(pitch) * np.cos(yaw)])
        return ViewFrame(tuple(f), tuple(u))
