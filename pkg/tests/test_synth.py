import numpy as np
import pytest

from panophot import OutOfDomainError, cct_from_xy, Chromaticity
from panophot.cmf import planckian_xy
from panophot.photometry import cct_map, mean_spherical_illuminance, scene_temperature
from panophot.projection import solid_angles
from panophot.synth import blackbody_panorama, disk_source, uniform_sphere


def test_uniform_truths():
    rmap, truth = uniform_sphere((2.0, 1.0, 0.5), (32, 64))
    assert truth["planar_e"] == pytest.approx([2 * np.pi, np.pi, np.pi / 2])
    rmap1, truth1 = uniform_sphere(1.0, (32, 64))
    assert truth1["msi_lux"] == pytest.approx(np.pi, rel=1e-12)
    rmap0, truth0 = uniform_sphere(0.0, (32, 64))
    assert truth0["msi_lux"] == 0.0 and truth0["planar_e"] == [0.0, 0.0, 0.0]


def test_disk_cap_solid_angle():
    _, truth = disk_source(1.0, (0, 1, 0), 60.0, 0.0, (64, 128))
    assert truth["omega_sr"] == pytest.approx(np.pi, rel=1e-12)  # 2pi(1-cos60)
    assert truth["msi_lux"] == pytest.approx(np.pi / 4.0, rel=1e-9)


def test_disk_limit_to_full_sphere():
    # growing cap approaches the uniform-sphere MSI
    _, t80 = disk_source(1.0, (0, 0, 1), 89.0, 0.0, (64, 128))
    assert t80["msi_lux"] < np.pi
    assert t80["msi_lux"] == pytest.approx(
        2 * np.pi * (1 - np.cos(np.deg2rad(89.0))) / 4, rel=1e-12)


def test_disk_msi_rotation_invariant(rng):
    msis = []
    for axis in [(0, 1, 0), (1, 0, 0), (0, 0, -1), tuple(rng.normal(size=3))]:
        rmap, truth = disk_source(1.0, axis, 30.0, 0.0, (128, 256))
        msis.append(mean_spherical_illuminance(rmap))
        assert msis[-1] == pytest.approx(truth["msi_lux"], rel=5e-3)
    assert np.ptp(msis) / np.mean(msis) < 5e-3


def test_disk_radius_validation():
    with pytest.raises(ValueError):
        disk_source(1.0, (0, 1, 0), 90.0, 0.0)
    with pytest.raises(ValueError):
        disk_source(1.0, (0, 1, 0), 0.0, 0.0)


def test_disk_deterministic():
    a, _ = disk_source(1.0, (0.2, 0.9, 0.1), 25.0, 0.05, (64, 128))
    b, _ = disk_source(1.0, (0.2, 0.9, 0.1), 25.0, 0.05, (64, 128))
    assert np.array_equal(a.pixels, b.pixels)


def test_blackbody_cct_recovered():
    rmap, truth = blackbody_panorama(6500.0, 1.0, (16, 32))
    kelvin, valid = cct_map(rmap)
    assert valid.all()
    assert np.allclose(kelvin, 6500.0, atol=60.0)


def test_blackbody_magnitude_does_not_move_cct():
    a, _ = blackbody_panorama(3500.0, 1.0, (8, 16))
    b, _ = blackbody_panorama(3500.0, 1000.0, (8, 16))
    ka, _ = cct_map(a)
    kb, _ = cct_map(b)
    assert np.allclose(ka, kb, rtol=1e-9)


def test_blackbody_two_region_scene_temperature_between():
    lo, hi = 3000.0, 6500.0
    a, _ = blackbody_panorama(lo, 1.0, (32, 64))
    b, _ = blackbody_panorama(hi, 1.0, (32, 64))
    px = np.concatenate([a.pixels[:16], b.pixels[16:]], axis=0)
    from panophot import RadianceMap, FULL_SPHERE

    t = scene_temperature(RadianceMap(px, FULL_SPHERE, calibrated=True))
    assert lo < t < hi


def test_blackbody_range_enforced():
    with pytest.raises(OutOfDomainError):
        blackbody_panorama(1500.0)
    with pytest.raises(OutOfDomainError):
        blackbody_panorama(12000.0)


def test_blackbody_pixels_in_gamut():
    for t in (2000.0, 3000.0, 6500.0, 10000.0):
        rmap, _ = blackbody_panorama(t, 1.0, (4, 8))
        assert rmap.pixels.min() >= 0.0


def test_blackbody_luminance_is_magnitude():
    from panophot.photometry import luminance_map

    rmap, _ = blackbody_panorama(4200.0, 7.5, (8, 16))
    assert np.allclose(luminance_map(rmap), 7.5, rtol=1e-9)
