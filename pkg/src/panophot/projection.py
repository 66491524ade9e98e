"""Pixel grid <-> direction mappings, solid angles, reprojection, downscaling.

World frame is right-handed with +y the zenith and +z the forward axis.
Equirectangular rows sweep the polar angle from the zenith (top row) to the
nadir, columns sweep azimuth left to right. Pixel (i, j) refers to the pixel
center; fractional coordinates interpolate between centers.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .maps import (EQUIRECT_FULL, EQUIRECT_HEMISPHERE, FISHEYE_UNIFIED,
                   ORTHOGRAPHIC, PERSPECTIVE, CoverageError, Projection,
                   RadianceMap, SolidAngleMap, ViewFrame)

_HALF_PIXEL_TOL = 0.51  # allowed slack, in pixels, when testing coverage


def _spherical_to_dir(theta, phi):
    # polar angle from +y zenith, azimuth from +z toward +x
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    st = np.sin(theta)
    return np.stack([st * np.sin(phi), np.cos(theta), st * np.cos(phi)], axis=-1)


def _equirect_angles(kind, shape, i, j):
    h, w = shape
    theta = np.pi * (np.asarray(i, dtype=np.float64) + 0.5) / h
    if kind == EQUIRECT_FULL:
        phi = 2.0 * np.pi * (np.asarray(j, dtype=np.float64) + 0.5) / w - np.pi
    else:
        phi = np.pi * (np.asarray(j, dtype=np.float64) + 0.5) / w - np.pi / 2.0
    return theta, phi


def _perspective_tans(proj, shape):
    h, w = shape
    half = np.deg2rad(proj.fov_deg) / 2.0
    f_pix = (w / 2.0) / np.tan(half)
    return f_pix, np.tan(half), (h / 2.0) / f_pix


def _distort(mx, my, dist):
    k1, k2, p1, p2 = (tuple(dist) + (0.0, 0.0, 0.0, 0.0))[:4]
    r2 = mx * mx + my * my
    radial = 1.0 + k1 * r2 + k2 * r2 * r2
    xd = mx * radial + 2.0 * p1 * mx * my + p2 * (r2 + 2.0 * mx * mx)
    yd = my * radial + p1 * (r2 + 2.0 * my * my) + 2.0 * p2 * mx * my
    return xd, yd


def _undistort(xd, yd, dist, iterations=12):
    # fixed-point inversion of the radial/tangential model
    mx, my = xd.copy(), yd.copy()
    k1, k2, p1, p2 = (tuple(dist) + (0.0, 0.0, 0.0, 0.0))[:4]
    for _ in range(iterations):
        r2 = mx * mx + my * my
        radial = 1.0 + k1 * r2 + k2 * r2 * r2
        dx = 2.0 * p1 * mx * my + p2 * (r2 + 2.0 * mx * mx)
        dy = p1 * (r2 + 2.0 * my * my) + 2.0 * p2 * mx * my
        mx = (xd - dx) / radial
        my = (yd - dy) / radial
    return mx, my


def _pixel_dirs(proj: Projection, shape, i, j):
    """Directions of pixel coordinates plus a validity mask (no raising)."""
    h, w = shape
    i = np.asarray(i, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    kind = proj.kind

    if kind in (EQUIRECT_FULL, EQUIRECT_HEMISPHERE):
        theta, phi = _equirect_angles(kind, shape, i, j)
        return _spherical_to_dir(theta, phi), np.ones(np.broadcast(i, j).shape, bool)

    if kind == PERSPECTIVE:
        f_pix, _, _ = _perspective_tans(proj, shape)
        x = (j + 0.5 - w / 2.0) / f_pix
        y = (h / 2.0 - (i + 0.5)) / f_pix
        d = np.stack([x, y, np.ones_like(x)], axis=-1)
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        return d, np.ones(np.broadcast(i, j).shape, bool)

    if kind == ORTHOGRAPHIC:
        radius = min(h, w) / 2.0
        u = (j + 0.5 - w / 2.0) / radius
        v = (h / 2.0 - (i + 0.5)) / radius
        r2 = u * u + v * v
        valid = r2 <= 1.0
        z = np.sqrt(np.clip(1.0 - r2, 0.0, None))
        d = np.stack([u, v, z], axis=-1)
        bad = ~valid
        if np.any(bad):
            d = d.copy()
            d[bad] = (0.0, 0.0, 1.0)
        return d, valid

    if kind == FISHEYE_UNIFIED:
        c = proj.intrinsics
        if c.model == "radial_poly":
            return _radial_poly_dirs(c, i, j)
        xd = (j + 0.5 - c.cx) / c.focal
        yd = (i + 0.5 - c.cy) / c.focal
        mx, my = _undistort(np.asarray(xd), np.asarray(yd), c.distortion)
        r2 = mx * mx + my * my
        disc = 1.0 + (1.0 - c.xi * c.xi) * r2
        valid = disc >= 0.0
        b = (c.xi + np.sqrt(np.clip(disc, 0.0, None))) / (1.0 + r2)
        # camera frame: x right, y down, z forward; flip y for the y-up frame
        d = np.stack([b * mx, -(b * my), b - c.xi], axis=-1)
        n = np.linalg.norm(d, axis=-1, keepdims=True)
        valid &= n[..., 0] > 1e-12
        d = d / np.where(n > 1e-12, n, 1.0)
        inside = (i >= -0.5) & (i <= h - 0.5) & (j >= -0.5) & (j <= w - 0.5)
        return d, valid & inside

    raise ValueError(f"unsupported projection {kind!r}")


def _radial_poly_dirs(c, i, j):
    # r(theta) = sum_k coeffs[k] * theta^(k+1), r in normalized image units
    xd = (j + 0.5 - c.cx) / c.focal
    yd = (i + 0.5 - c.cy) / c.focal
    r = np.hypot(xd, yd)
    theta = _invert_radial_poly(c.distortion, r)
    valid = np.isfinite(theta)
    theta = np.where(valid, theta, 0.0)
    phi = np.arctan2(yd, xd)
    st = np.sin(theta)
    d = np.stack([st * np.cos(phi), -(st * np.sin(phi)), np.cos(theta)], axis=-1)
    return d, valid


def _radial_poly_eval(coeffs, theta):
    out = np.zeros_like(theta)
    for k, ck in enumerate(coeffs):
        out = out + ck * theta ** (k + 1)
    return out


def _invert_radial_poly(coeffs, r, iterations=60):
    # bisection; assumes r(theta) monotone on [0, pi]
    lo = np.zeros_like(r)
    hi = np.full_like(r, np.pi)
    bad = r > _radial_poly_eval(coeffs, hi)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        too_small = _radial_poly_eval(coeffs, mid) < r
        lo = np.where(too_small, mid, lo)
        hi = np.where(too_small, hi, mid)
    theta = 0.5 * (lo + hi)
    return np.where(bad, np.nan, theta)


def pixel_to_direction(proj: Projection, shape, i, j) -> np.ndarray:
    """Unit direction(s) of pixel center(s); raises on invalid pixels."""
    d, valid = _pixel_dirs(proj, shape, i, j)
    if not np.all(valid):
        raise CoverageError(f"pixel outside the valid region of {proj.kind}")
    return d


def direction_to_pixel(proj: Projection, shape, d):
    """Fractional pixel coordinates (i, j) of direction(s), plus validity.

    Directions the projection does not cover come back with valid=False;
    callers decide whether that is an error (see reproject).
    """
    h, w = shape
    d = np.asarray(d, dtype=np.float64)
    dx, dy, dz = d[..., 0], d[..., 1], d[..., 2]
    kind = proj.kind

    if kind in (EQUIRECT_FULL, EQUIRECT_HEMISPHERE):
        theta = np.arccos(np.clip(dy, -1.0, 1.0))
        phi = np.arctan2(dx, dz)
        i = theta / np.pi * h - 0.5
        if kind == EQUIRECT_FULL:
            j = (phi + np.pi) / (2.0 * np.pi) * w - 0.5
            valid = np.ones(phi.shape, bool)
        else:
            j = (phi + np.pi / 2.0) / np.pi * w - 0.5
            valid = np.abs(phi) <= np.pi / 2.0 + _HALF_PIXEL_TOL * np.pi / w
        return np.stack([i, j], axis=-1), valid

    if kind == PERSPECTIVE:
        f_pix, tan_h, tan_v = _perspective_tans(proj, shape)
        front = dz > 1e-12
        zs = np.where(front, dz, 1.0)
        x = dx / zs
        y = dy / zs
        j = x * f_pix + w / 2.0 - 0.5
        i = h / 2.0 - y * f_pix - 0.5
        tol = _HALF_PIXEL_TOL
        valid = (front & (i >= -tol) & (i <= h - 1 + tol)
                 & (j >= -tol) & (j <= w - 1 + tol))
        return np.stack([i, j], axis=-1), valid

    if kind == ORTHOGRAPHIC:
        radius = min(h, w) / 2.0
        valid = dz >= -1e-9
        j = dx * radius + w / 2.0 - 0.5
        i = h / 2.0 - dy * radius - 0.5
        return np.stack([i, j], axis=-1), valid

    if kind == FISHEYE_UNIFIED:
        c = proj.intrinsics
        if c.model == "radial_poly":
            theta = np.arccos(np.clip(dz, -1.0, 1.0))
            r = _radial_poly_eval(c.distortion, theta)
            phi = np.arctan2(-dy, dx)
            xd = r * np.cos(phi)
            yd = r * np.sin(phi)
        else:
            den = dz + c.xi  # unit directions: ||d|| = 1
            ok = den > 1e-9
            dens = np.where(ok, den, 1.0)
            mx = dx / dens
            my = -dy / dens
            xd, yd = _distort(mx, my, c.distortion)
        j = xd * c.focal + c.cx - 0.5
        i = yd * c.focal + c.cy - 0.5
        tol = _HALF_PIXEL_TOL
        valid = (i >= -tol) & (i <= h - 1 + tol) & (j >= -tol) & (j <= w - 1 + tol)
        if c.model != "radial_poly":
            valid &= ok
        return np.stack([i, j], axis=-1), valid

    raise ValueError(f"unsupported projection {kind!r}")


# --- solid angles ------------------------------------------------------------


def _rect_solid_angle(x, y):
    # solid angle of the tangent-plane rectangle [0,x]x[0,y] at focal 1:
    # Omega = asin(x y / sqrt((1+x^2)(1+y^2))), odd in each argument
    return np.arcsin(x * y / np.sqrt((1.0 + x * x) * (1.0 + y * y)))


@lru_cache(maxsize=32)
def _omega_cached(proj: Projection, shape) -> np.ndarray:
    h, w = shape
    kind = proj.kind

    if kind in (EQUIRECT_FULL, EQUIRECT_HEMISPHERE):
        dphi = (2.0 * np.pi if kind == EQUIRECT_FULL else np.pi) / w
        edges = np.cos(np.pi * np.arange(h + 1) / h)
        band = edges[:-1] - edges[1:]  # cos(theta_top) - cos(theta_bottom)
        return np.repeat((dphi * band)[:, None], w, axis=1)

    if kind == PERSPECTIVE:
        f_pix, _, _ = _perspective_tans(proj, shape)
        xe = (np.arange(w + 1) - w / 2.0) / f_pix
        ye = (h / 2.0 - np.arange(h + 1)) / f_pix
        g = _rect_solid_angle(xe[None, :], ye[:, None])
        return g[:-1, 1:] - g[:-1, :-1] - g[1:, 1:] + g[1:, :-1]

    # no closed form: numeric quad subdivision
    sub = 8
    ii = (np.arange(h * sub) + 0.5) / sub - 0.5
    jj = (np.arange(w * sub) + 0.5) / sub - 0.5
    if kind == ORTHOGRAPHIC:
        radius = min(h, w) / 2.0
        u = (jj + 0.5 - w / 2.0) / radius
        v = (h / 2.0 - (ii + 0.5)) / radius
        r2 = u[None, :] ** 2 + v[:, None] ** 2
        inside = r2 < 1.0 - 1e-9
        cell = 1.0 / (radius * radius * sub * sub)  # uv area per subcell
        contrib = np.where(inside, cell / np.sqrt(np.clip(1.0 - r2, 1e-12, None)), 0.0)
        return contrib.reshape(h, sub, w, sub).sum(axis=(1, 3))

    # fisheye: planar-quad area of corner directions per subcell
    ie = np.arange(h * sub + 1) / sub - 0.5
    je = np.arange(w * sub + 1) / sub - 0.5
    dc, valid = _pixel_dirs(proj, shape, ie[:, None], je[None, :])
    a = dc[1:, 1:] - dc[:-1, :-1]
    b = dc[1:, :-1] - dc[:-1, 1:]
    area = 0.5 * np.linalg.norm(np.cross(a, b), axis=-1)
    ok = valid[:-1, :-1] & valid[1:, 1:] & valid[:-1, 1:] & valid[1:, :-1]
    area = np.where(ok, area, 0.0)
    return area.reshape(h, sub, w, sub).sum(axis=(1, 3))


def solid_angles(proj: Projection, shape) -> SolidAngleMap:
    """Per-pixel solid angles; closed form for equirect and perspective."""
    return SolidAngleMap(_omega_cached(proj, (int(shape[0]), int(shape[1]))), proj)


@lru_cache(maxsize=8)
def _axis_cosine_cached(proj: Projection, shape) -> np.ndarray:
    """Exact per-pixel integral of cos(angle to the +z axis) d(omega)."""
    h, w = shape
    if proj.kind != EQUIRECT_HEMISPHERE:
        # generic midpoint fallback: cos at pixel center times omega
        om = _omega_cached(proj, shape)
        ii, jj = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
        d, _ = _pixel_dirs(proj, shape, ii, jj)
        return np.clip(d[..., 2], 0.0, None) * om
    # cos(angle to axis) = sin(theta) cos(phi); both factors integrate exactly
    phi_e = np.pi * np.arange(w + 1) / w - np.pi / 2.0
    col = np.sin(phi_e[1:]) - np.sin(phi_e[:-1])
    th_e = np.pi * np.arange(h + 1) / h
    anti = 0.5 * (th_e - 0.5 * np.sin(2.0 * th_e))  # integral of sin^2
    row = anti[1:] - anti[:-1]
    return row[:, None] * col[None, :]


def axis_cosine_weights(proj: Projection, shape) -> np.ndarray:
    return _axis_cosine_cached(proj, (int(shape[0]), int(shape[1])))


# --- reprojection ------------------------------------------------------------


def _grid_directions(proj: Projection, shape):
    h, w = shape
    ii, jj = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    return _pixel_dirs(proj, shape, ii, jj)


def _sample_bilinear(pixels: np.ndarray, src_kind: str, ij: np.ndarray) -> np.ndarray:
    h, w = pixels.shape[:2]
    i = np.clip(ij[..., 0], -0.5 + 1e-9, h - 0.5 - 1e-9)
    j = ij[..., 1]
    wrap = src_kind == EQUIRECT_FULL
    if not wrap:
        j = np.clip(j, -0.5 + 1e-9, w - 0.5 - 1e-9)

    i0 = np.floor(i).astype(np.int64)
    j0 = np.floor(j).astype(np.int64)
    ti = (i - i0)[..., None]
    tj = (j - j0)[..., None]
    i1 = np.clip(i0 + 1, 0, h - 1)
    i0 = np.clip(i0, 0, h - 1)
    if wrap:
        j1 = (j0 + 1) % w
        j0 = j0 % w
    else:
        j1 = np.clip(j0 + 1, 0, w - 1)
        j0 = np.clip(j0, 0, w - 1)

    # incremental lerp: constant fields come through bit-for-bit
    p00, p01 = pixels[i0, j0], pixels[i0, j1]
    p10, p11 = pixels[i1, j0], pixels[i1, j1]
    top = p00 + tj * (p01 - p00)
    bot = p10 + tj * (p11 - p10)
    return top + ti * (bot - top)


def coverage_mask(src_proj: Projection, src_shape, dst_proj: Projection,
                  dst_size, frame: ViewFrame | None = None) -> np.ndarray:
    """Destination pixels whose direction the source image covers."""
    frame = frame or ViewFrame()
    local, dst_valid = _grid_directions(dst_proj, dst_size)
    world = local @ frame.rotation().T
    _, src_ok = direction_to_pixel(src_proj, src_shape, world)
    return dst_valid & src_ok


def reproject(src: RadianceMap, dst_projection: Projection, dst_size,
              frame: ViewFrame | None = None, allow_partial: bool = False) -> RadianceMap:
    """Resample a map into another projection by bilinear lookup.

    ``frame`` orients the destination view in the source's world frame.
    Unless ``allow_partial``, a destination needing directions outside the
    source coverage raises CoverageError; with it, uncovered pixels are 0.
    """
    frame = frame or ViewFrame()
    h, w = int(dst_size[0]), int(dst_size[1])
    local, dst_valid = _grid_directions(dst_projection, (h, w))
    world = local @ frame.rotation().T
    ij, src_ok = direction_to_pixel(src.projection, src.shape, world)
    uncovered = dst_valid & ~src_ok
    if np.any(uncovered) and not allow_partial:
        raise CoverageError(
            f"{int(uncovered.sum())} destination pixels fall outside the "
            f"{src.projection.kind} source coverage")
    out = _sample_bilinear(src.pixels, src.projection.kind, ij)
    out[~(dst_valid & src_ok)] = 0.0
    return RadianceMap(out, dst_projection, calibrated=src.calibrated,
                       exposure_scale=src.exposure_scale)


# --- energy-preserving downscale ---------------------------------------------


def _overlap_matrix(src_edges: np.ndarray, dst_edges: np.ndarray) -> np.ndarray:
    lo = np.maximum(dst_edges[:-1, None], src_edges[None, :-1])
    hi = np.minimum(dst_edges[1:, None], src_edges[None, 1:])
    return np.clip(hi - lo, 0.0, None)


def downscale_energy_preserving(src: RadianceMap, dst_size) -> RadianceMap:
    """Downscale an equirect map so each output pixel is the solid-angle
    weighted mean of the input it covers; total flux (sum of Y * omega) and
    hence MSI are conserved exactly up to rounding.
    """
    if src.projection.kind not in (EQUIRECT_FULL, EQUIRECT_HEMISPHERE):
        raise CoverageError("energy-preserving downscale needs an equirect map")
    hd, wd = int(dst_size[0]), int(dst_size[1])
    hs, ws = src.shape
    if hd > hs or wd > ws:
        raise ValueError(f"destination {hd}x{wd} exceeds source {hs}x{ws}")

    # separable exact overlaps: rows in cos(theta), columns in azimuth
    row_src = -np.cos(np.pi * np.arange(hs + 1) / hs)
    row_dst = -np.cos(np.pi * np.arange(hd + 1) / hd)
    col_src = np.arange(ws + 1, dtype=np.float64) / ws
    col_dst = np.arange(wd + 1, dtype=np.float64) / wd
    a = _overlap_matrix(row_src, row_dst)
    b = _overlap_matrix(col_src, col_dst)

    num = np.einsum("dr,rcx,ec->dex", a, src.pixels, b, optimize=True)
    den = np.outer(a.sum(axis=1), b.sum(axis=1))
    out = num / den[..., None]
    return RadianceMap(out, src.projection, calibrated=src.calibrated,
                       exposure_scale=src.exposure_scale)
