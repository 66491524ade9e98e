import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from panophot import FULL_SPHERE, HEMISPHERE, RadianceMap, pano_io
from panophot.photometry import mean_spherical_illuminance, planar_illuminance
from panophot.service import app
from panophot.synth import uniform_sphere


@pytest.fixture
def client():
    return TestClient(app)


def save(tmp_path, name, rmap):
    path = tmp_path / name
    pano_io.save_map(path, rmap)
    return str(path)


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["name"] == "panophot"


def test_fit_endpoint(client):
    samples = [{"config_id": "f14", "e_rgb": [e, e, e], "ev_lux": 2 * e,
                "x": 0.3127, "y": 0.3290} for e in (1.0, 2.0, 3.0)]
    r = client.post("/calibration/fit", json={"samples": samples})
    assert r.status_code == 200
    doc = r.json()
    assert np.allclose(doc["configs"]["f14"]["k"], 2.0, rtol=1e-4)
    assert doc["configs"]["f14"]["n"] == 3


def test_fit_insufficient_returns_422(client):
    samples = [{"config_id": "f14", "e_rgb": [1, 1, 1], "ev_lux": 2.0,
                "x": 0.3127, "y": 0.3290}]
    r = client.post("/calibration/fit", json={"samples": samples})
    assert r.status_code == 422


def test_msi_endpoint_matches_library(client, tmp_path):
    rmap, _ = uniform_sphere(2.0, (32, 64))
    path = save(tmp_path, "u.npz", rmap)
    r = client.post("/photometry/msi", json={"pano": path})
    assert r.status_code == 200
    assert r.json()["msi"] == mean_spherical_illuminance(rmap)
    assert r.json()["units"] == "lux"


def test_illuminance_endpoint(client, tmp_path):
    rng = np.random.default_rng(0)
    hemi = RadianceMap(rng.uniform(0, 2, (32, 64, 3)), HEMISPHERE, calibrated=True)
    path = save(tmp_path, "h.npz", hemi)
    r = client.post("/photometry/illuminance", json={"pano": path})
    assert r.status_code == 200
    assert r.json()["e_rgb"] == pytest.approx(list(planar_illuminance(hemi)))


def test_illuminance_wrong_projection_409(client, tmp_path):
    rmap, _ = uniform_sphere(1.0, (16, 32))
    path = save(tmp_path, "full.npz", rmap)
    r = client.post("/photometry/illuminance", json={"pano": path})
    assert r.status_code == 409


def test_missing_file_404(client):
    r = client.post("/photometry/msi", json={"pano": "/nonexistent/p.npz"})
    assert r.status_code == 404


def test_apply_endpoint(client, tmp_path):
    samples = [{"config_id": "f4", "e_rgb": [e, e, e], "ev_lux": 5 * e,
                "x": 0.3127, "y": 0.3290} for e in (1.0, 2.0)]
    profile = client.post("/calibration/fit", json={"samples": samples}).json()
    rng = np.random.default_rng(1)
    rmap = RadianceMap(rng.uniform(0, 1, (16, 32, 3)), FULL_SPHERE)
    pano = save(tmp_path, "p.npz", rmap)
    out = str(tmp_path / "cal.npz")
    r = client.post("/calibration/apply", json={
        "pano": pano, "config_id": "f4", "profile": profile, "out": out})
    assert r.status_code == 200
    cal, meta = pano_io.load_map(out)
    assert cal.calibrated
    assert np.allclose(cal.pixels, rmap.pixels * 5.0, rtol=1e-4)


def test_reproject_endpoint(client, tmp_path):
    rmap, _ = uniform_sphere(3.0, (32, 64))
    pano = save(tmp_path, "u.npz", rmap)
    out = str(tmp_path / "v.npz")
    r = client.post("/projection/reproject", json={
        "pano": pano, "kind": "perspective", "fov_deg": 60.0,
        "width": 40, "height": 30, "out": out})
    assert r.status_code == 200
    view, _ = pano_io.load_map(out)
    assert view.projection.kind == "perspective"
    assert np.all(view.pixels == 3.0)


def test_reproject_coverage_409(client, tmp_path):
    rng = np.random.default_rng(2)
    hemi = RadianceMap(rng.uniform(0, 1, (16, 32, 3)), HEMISPHERE)
    pano = save(tmp_path, "h.npz", hemi)
    r = client.post("/projection/reproject", json={
        "pano": pano, "kind": "equirect_full", "width": 32, "height": 16,
        "out": str(tmp_path / "o.npz")})
    assert r.status_code == 409


def test_degrade_endpoint_deterministic(client, tmp_path):
    rng = np.random.default_rng(3)
    rmap = RadianceMap(rng.uniform(0, 20, (32, 64, 3)), FULL_SPHERE)
    pano = save(tmp_path, "p.npz", rmap)
    metas = []
    for name in ("a.npz", "b.npz"):
        r = client.post("/degrade", json={"pano": pano, "seed": 5,
                                          "out": str(tmp_path / name)})
        assert r.status_code == 200
        metas.append(r.json())
    assert metas[0] == metas[1]
    a = np.load(tmp_path / "a.npz")["image"]
    b = np.load(tmp_path / "b.npz")["image"]
    assert np.array_equal(a, b)


def test_metrics_endpoint(client, tmp_path):
    rng = np.random.default_rng(4)
    gt = RadianceMap(rng.uniform(0.5, 4, (16, 32, 3)), FULL_SPHERE, calibrated=True)
    pred = RadianceMap(gt.pixels * 2.0, FULL_SPHERE, calibrated=True)
    r = client.post("/metrics/compare", json={
        "pred": save(tmp_path, "p.npz", pred), "gt": save(tmp_path, "g.npz", gt)})
    assert r.status_code == 200
    assert r.json()["si_rmse"] < 1e-10
    assert r.json()["rmse"] > 0


def test_stats_endpoint(client, tmp_path):
    paths = []
    for i, v in enumerate((1.0, 2.0, 3.0)):
        rmap, _ = uniform_sphere(v, (16, 32))
        paths.append(save(tmp_path, f"m{i}.npz", rmap))
    r = client.post("/stats", json={"panos": paths})
    assert r.status_code == 200
    assert r.json()["n_maps"] == 3
    assert r.json()["median_msi_lux"] == pytest.approx(2 * np.pi, rel=1e-9)


def test_synth_endpoint(client, tmp_path):
    out = str(tmp_path / "disk.npz")
    r = client.post("/synth", json={"kind": "disk", "out": out,
                                    "angular_radius_deg": 60.0,
                                    "height": 64, "width": 128})
    assert r.status_code == 200
    assert r.json()["truth"]["omega_sr"] == pytest.approx(np.pi, rel=1e-9)
    rmap, _ = pano_io.load_map(out)
    assert rmap.shape == (64, 128)


def test_merge_endpoint(client, tmp_path):
    rng = np.random.default_rng(5)
    field = rng.uniform(20.0, 120.0, (16, 32, 3))
    frames = []
    for idx, t in enumerate((1 / 800, 1 / 200)):
        raw = np.clip(field * (t * 100.0 / 14.0**2), 0.0, 1.0)
        p = tmp_path / f"f{idx}.npz"
        np.savez(p, pixels=raw,
                 meta=json.dumps({"projection": {"kind": "unprojected"}}))
        frames.append({"path": str(p), "exposure_time": t,
                       "aperture": 14.0, "iso": 100.0})
    r = client.post("/merge", json={"frames": frames, "config_id": "f14",
                                    "out": str(tmp_path / "m.npz")})
    assert r.status_code == 200
    merged, _ = pano_io.load_map(tmp_path / "m.npz")
    assert np.abs(merged.pixels / field - 1.0).max() < 1e-3


def test_openapi_schema_has_models(client):
    doc = client.get("/openapi.json").json()
    names = set(doc["components"]["schemas"])
    assert {"FitRequest", "MsiResponse", "DegradeRequest"} <= names
