import numpy as np
import pytest

from panophot import (CameraIntrinsics, CoverageError, FULL_SPHERE, HEMISPHERE,
                      ORTHO, Projection, RadianceMap, ViewFrame, fisheye,
                      perspective)
from panophot.maps import EQUIRECT_FULL
from panophot.photometry import luminance_map, mean_spherical_illuminance
from panophot.projection import (axis_cosine_weights, coverage_mask,
                                 direction_to_pixel, downscale_energy_preserving,
                                 pixel_to_direction, reproject, solid_angles)
from conftest import spherical_gaussians

FISHEYE = fisheye(CameraIntrinsics(focal=260.0, cx=320.0, cy=240.0, width=640,
                                   height=480, xi=0.9,
                                   distortion=(-0.05, 0.01, 1e-4, -2e-4)))


def psnr(a, b, peak=None):
    peak = peak if peak is not None else np.abs(b).max()
    mse = np.mean((a - b) ** 2)
    return 10.0 * np.log10(peak * peak / mse)


# --- pixel <-> direction ------------------------------------------------------

def test_equirect_center_pixel_is_forward():
    h, w = 64, 128
    d = pixel_to_direction(FULL_SPHERE, (h, w), h // 2, w // 2)
    half_pixel = np.pi / h  # generous: one row/col step in angle
    assert np.arccos(np.clip(d @ np.array([0.0, 0.0, 1.0]), -1, 1)) <= half_pixel


def test_equirect_top_row_is_zenith():
    h, w = 64, 128
    d = pixel_to_direction(FULL_SPHERE, (h, w), 0, np.arange(w))
    angles = np.arccos(np.clip(d @ np.array([0.0, 1.0, 0.0]), -1, 1))
    assert angles.max() <= 0.5 * np.pi / h + 1e-12


@pytest.mark.parametrize("proj,shape", [
    (FULL_SPHERE, (64, 128)),
    (HEMISPHERE, (64, 128)),
    (perspective(90.0), (120, 160)),
    (perspective(60.0), (128, 128)),
    (ORTHO, (128, 128)),
    (FISHEYE, (480, 640)),
])
def test_round_trip_under_half_pixel(proj, shape, rng):
    h, w = shape
    i = rng.uniform(0, h - 1, 10000)
    j = rng.uniform(0, w - 1, 10000)
    if proj.kind == "orthographic":  # keep off the rim where pixels leave the disk
        keep = ((i + 0.5 - h / 2) ** 2 + (j + 0.5 - w / 2) ** 2) < (min(h, w) / 2 - 1) ** 2
        i, j = i[keep], j[keep]
    if proj.kind == "fisheye_unified":  # stay in the well-conditioned inner field
        keep = ((i - proj.intrinsics.cy) ** 2 + (j - proj.intrinsics.cx) ** 2) < 200.0 ** 2
        i, j = i[keep], j[keep]
    d = pixel_to_direction(proj, shape, i, j)
    ij, ok = direction_to_pixel(proj, shape, d)
    assert ok.all()
    di = np.abs(ij[:, 0] - i)
    dj = np.abs(ij[:, 1] - j)
    if proj.kind == EQUIRECT_FULL:
        dj = np.minimum(dj, w - dj)  # azimuth seam
    assert max(di.max(), dj.max()) < 0.51


def test_pixel_outside_valid_region_raises():
    with pytest.raises(CoverageError):
        pixel_to_direction(ORTHO, (128, 128), 0, 0)  # corner, outside the disk


# --- solid angles -------------------------------------------------------------

@pytest.mark.parametrize("shape", [(32, 64), (64, 128), (256, 512)])
def test_full_sphere_sums_to_4pi(shape):
    total = solid_angles(FULL_SPHERE, shape).total
    assert abs(total - 4 * np.pi) / (4 * np.pi) < 1e-6


@pytest.mark.parametrize("shape", [(32, 64), (64, 128), (256, 512)])
def test_hemisphere_sums_to_2pi(shape):
    total = solid_angles(HEMISPHERE, shape).total
    assert abs(total - 2 * np.pi) / (2 * np.pi) < 1e-6


def test_perspective_matches_pyramid_formula():
    total = solid_angles(perspective(60.0), (128, 128)).total
    expect = 4 * np.arcsin(np.sin(np.deg2rad(30.0)) ** 2)
    assert abs(total - expect) / expect < 1e-4


def test_solid_angles_positive_inside_valid_region():
    om = solid_angles(FISHEYE, (480, 640)).omega
    assert om.min() >= 0 and om.max() > 0
    ortho = solid_angles(ORTHO, (64, 64)).omega
    assert ortho[32, 32] > 0


# --- reprojection -------------------------------------------------------------

def test_reproject_constant_field_is_constant():
    src = RadianceMap(np.full((64, 128, 3), 2.5), FULL_SPHERE, calibrated=True)
    out = reproject(src, perspective(90.0), (80, 80))
    assert np.all(out.pixels == 2.5)
    assert out.calibrated


def test_reproject_round_trip_psnr(rng):
    field = spherical_gaussians(rng)
    h, w = 128, 256
    ii, jj = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    dirs = pixel_to_direction(FULL_SPHERE, (h, w), ii, jj)
    src = RadianceMap(np.repeat(field(dirs)[..., None], 3, axis=-1), FULL_SPHERE)

    persp = reproject(src, perspective(90.0), (256, 256))
    back = reproject(persp, FULL_SPHERE, (h, w), allow_partial=True)
    covered = coverage_mask(persp.projection, persp.shape, FULL_SPHERE, (h, w))
    # stay clear of the view edge where bilinear clamping bites
    inner = dirs[..., 2] > np.cos(np.deg2rad(42.0))
    sel = covered & inner
    assert sel.sum() > 1000
    assert psnr(back.pixels[sel], src.pixels[sel]) > 40.0


def test_perspective_extraction_nested_fov(rng):
    field = spherical_gaussians(rng)
    h, w = 128, 256
    ii, jj = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    dirs = pixel_to_direction(FULL_SPHERE, (h, w), ii, jj)
    src = RadianceMap(np.repeat(field(dirs)[..., None], 3, axis=-1), FULL_SPHERE)

    wide = reproject(src, perspective(120.0), (384, 384))
    narrow_via_wide = reproject(wide, perspective(60.0), (128, 128))
    narrow_direct = reproject(src, perspective(60.0), (128, 128))
    assert psnr(narrow_via_wide.pixels, narrow_direct.pixels) > 40.0


def test_reproject_coverage_error():
    hemi = RadianceMap(np.ones((32, 64, 3)), HEMISPHERE)
    with pytest.raises(CoverageError):
        reproject(hemi, FULL_SPHERE, (32, 64))
    out = reproject(hemi, FULL_SPHERE, (32, 64), allow_partial=True)
    assert out.pixels.max() == 1.0 and out.pixels.min() == 0.0


def test_reproject_view_frame_points_at_target(rng):
    field = spherical_gaussians(rng)
    h, w = 128, 256
    ii, jj = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    dirs = pixel_to_direction(FULL_SPHERE, (h, w), ii, jj)
    src = RadianceMap(np.repeat(field(dirs)[..., None], 3, axis=-1), FULL_SPHERE)
    frame = ViewFrame.from_angles(yaw_deg=90.0, pitch_deg=30.0)
    view = reproject(src, perspective(40.0), (64, 64), frame=frame)
    center = view.pixels[32, 32, 0]
    assert center == pytest.approx(field(np.array(frame.forward)), rel=0.02)


def test_hemisphere_extraction_of_front_half(rng):
    field = spherical_gaussians(rng)
    h, w = 128, 256
    ii, jj = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    dirs = pixel_to_direction(FULL_SPHERE, (h, w), ii, jj)
    src = RadianceMap(np.repeat(field(dirs)[..., None], 3, axis=-1), FULL_SPHERE)
    hemi = reproject(src, HEMISPHERE, (h, w))
    hdirs = pixel_to_direction(HEMISPHERE, (h, w), ii, jj)
    assert psnr(hemi.pixels[..., 0], field(hdirs)) > 40.0


# --- energy-preserving downscale ----------------------------------------------

def test_downscale_constant_exact():
    src = RadianceMap(np.full((256, 512, 3), 1.7), FULL_SPHERE)
    out = downscale_energy_preserving(src, (64, 128))
    # exact up to float rounding of the weighted mean (a few ulps)
    assert np.allclose(out.pixels, 1.7, rtol=1e-14, atol=0.0)


def test_downscale_preserves_flux_and_msi(rng):
    px = rng.uniform(0, 50, size=(512, 1024, 3))
    src = RadianceMap(px, FULL_SPHERE, calibrated=True)
    out = downscale_energy_preserving(src, (64, 128))

    flux_src = (luminance_map(src) * solid_angles(FULL_SPHERE, src.shape).omega).sum()
    flux_dst = (luminance_map(out) * solid_angles(FULL_SPHERE, out.shape).omega).sum()
    assert abs(flux_dst - flux_src) / flux_src < 1e-6

    msi_src = mean_spherical_illuminance(src)
    msi_dst = mean_spherical_illuminance(out)
    assert abs(msi_dst - msi_src) / msi_src < 1e-3


def test_downscale_non_integer_ratio_preserves_flux(rng):
    px = rng.uniform(0, 5, size=(194, 388, 3))  # 194/64 is not an integer
    src = RadianceMap(px, FULL_SPHERE)
    out = downscale_energy_preserving(src, (64, 128))
    flux_src = (luminance_map(src) * solid_angles(FULL_SPHERE, src.shape).omega).sum()
    flux_dst = (luminance_map(out) * solid_angles(FULL_SPHERE, out.shape).omega).sum()
    assert abs(flux_dst - flux_src) / flux_src < 1e-6


def test_downscale_hot_pixel_flux(rng):
    px = np.zeros((256, 512, 3))
    px[97, 311] = (1000.0, 500.0, 20.0)
    src = RadianceMap(px, FULL_SPHERE)
    out = downscale_energy_preserving(src, (64, 128))
    flux_src = (luminance_map(src) * solid_angles(FULL_SPHERE, src.shape).omega).sum()
    flux_dst = (luminance_map(out) * solid_angles(FULL_SPHERE, out.shape).omega).sum()
    assert abs(flux_dst - flux_src) / flux_src < 1e-6


def test_downscale_rejects_upscale():
    src = RadianceMap(np.ones((64, 128, 3)), FULL_SPHERE)
    with pytest.raises(ValueError):
        downscale_energy_preserving(src, (128, 256))


# --- hemisphere cosine weights -------------------------------------------------

def test_axis_cosine_weights_sum_to_pi():
    cw = axis_cosine_weights(HEMISPHERE, (64, 128))
    assert abs(cw.sum() - np.pi) / np.pi < 1e-12
