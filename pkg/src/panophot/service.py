"""FastAPI service wrapping the core library.

Long-running deployments (capture stations, training clusters) hit these
endpoints instead of shelling out to the CLI; both front ends call the
same library functions. Start with `panophot serve` or point uvicorn at
``panophot.service:app``.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from . import __version__, pano_io, schemas
from .calibration import (CalibrationProfile, CalibrationSample, ChromaReading,
                          ConfigCalibration, apply_profile, fit_profile)
from .degrade import DegradationSpec, degrade_all
from .hdr import ExposureBracket, Frame, merge_bracket
from .maps import (CoverageError, InsufficientDataError, Projection, ViewFrame)
from .metrics import compare_maps, dataset_statistics
from .photometry import (cct_map, luminance_map, mean_spherical_illuminance,
                         orthographic_illuminance, planar_illuminance,
                         scene_temperature)
from .projection import downscale_energy_preserving, reproject, solid_angles
from .synth import blackbody_panorama, disk_source, uniform_sphere
from .colors import LUMA_WEIGHTS

app = FastAPI(
    title="panophot",
    description="Photometric HDR panorama processing: calibration, "
                "illuminance, color temperature, degradations, metrics.",
    version=__version__,
)


@app.exception_handler(InsufficientDataError)
async def _insufficient(request, exc):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.exception_handler(CoverageError)
async def _coverage(request, exc):
    return JSONResponse(status_code=409, content={"detail": str(exc)})


@app.exception_handler(ValueError)
async def _bad_value(request, exc):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


def _load(path: str):
    try:
        return pano_io.load_map(path)[0]
    except FileNotFoundError as exc:
        raise HTTPException(status_code=404, detail=str(exc))


@app.get("/health", response_model=schemas.HealthResponse)
def health():
    return schemas.HealthResponse(name="panophot", version=__version__)


@app.post("/calibration/fit", response_model=schemas.FitResponse)
def calibration_fit(req: schemas.FitRequest):
    samples = [CalibrationSample(config_id=s.config_id, e_rgb=s.e_rgb,
                                 reading=ChromaReading(ev_lux=s.ev_lux, x=s.x, y=s.y))
               for s in req.samples]
    profile = fit_profile(samples)
    return schemas.FitResponse(
        version=profile.version, created=profile.created,
        configs={cid: schemas.ConfigFit(k=c.k, r2=c.r_squared, n=c.n_samples)
                 for cid, c in profile.configs.items()})


def _profile_from_request(req: schemas.ApplyRequest) -> CalibrationProfile:
    if req.profile is not None:
        return CalibrationProfile(
            configs={cid: ConfigCalibration(k=tuple(c.k), r_squared=tuple(c.r2),
                                            n_samples=c.n)
                     for cid, c in req.profile.configs.items()},
            created=req.profile.created)
    if req.profile_path is not None:
        try:
            return CalibrationProfile.from_json(open(req.profile_path).read())
        except FileNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
    raise HTTPException(status_code=400, detail="provide profile or profile_path")


@app.post("/calibration/apply", response_model=schemas.ApplyResponse)
def calibration_apply(req: schemas.ApplyRequest):
    rmap = _load(req.pano)
    profile = _profile_from_request(req)
    try:
        calibrated = apply_profile(rmap, profile, req.config_id)
    except KeyError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    digest = hashlib.sha256(profile.to_json().encode()).hexdigest()
    pano_io.save_map(req.out, calibrated,
                     extra={"profile_sha256": digest, "config_id": req.config_id})
    return schemas.ApplyResponse(out=req.out, k=profile.configs[req.config_id].k)


@app.post("/photometry/illuminance", response_model=schemas.IlluminanceResponse)
def photometry_illuminance(req: schemas.PanoRequest):
    rmap = _load(req.pano)
    if rmap.projection.kind == "orthographic":
        e_rgb = orthographic_illuminance(rmap)
    elif rmap.projection.kind == "equirect_hemisphere":
        e_rgb = planar_illuminance(rmap)
    else:
        raise HTTPException(
            status_code=409,
            detail=f"illuminance needs a hemisphere or orthographic map, "
                   f"got {rmap.projection.kind}")
    return schemas.IlluminanceResponse(e_rgb=tuple(e_rgb),
                                       e_lux=float(LUMA_WEIGHTS @ e_rgb),
                                       units="lux" if rmap.calibrated else "relative")


@app.post("/photometry/msi", response_model=schemas.MsiResponse)
def photometry_msi(req: schemas.PanoRequest):
    rmap = _load(req.pano)
    weights = solid_angles(rmap.projection, rmap.shape)
    value = mean_spherical_illuminance(rmap, weights)
    try:
        temperature = scene_temperature(rmap, weights)
    except ValueError:
        temperature = None
    return schemas.MsiResponse(msi=value, scene_temperature_k=temperature,
                               units="lux" if rmap.calibrated else "relative")


@app.post("/photometry/cct-map", response_model=schemas.CctMapResponse)
def photometry_cct_map(req: schemas.CctMapRequest):
    rmap = _load(req.pano)
    kelvin, valid = cct_map(rmap)
    meta = {"tool": f"panophot {__version__}", "units": "kelvin",
            "projection": rmap.projection.to_dict()}
    np.savez(req.out, kelvin=kelvin, valid=valid, meta=json.dumps(meta, sort_keys=True))
    return schemas.CctMapResponse(
        out=req.out, valid_fraction=float(valid.mean()),
        median_k=float(np.median(kelvin[valid])) if valid.any() else None)


def _map_response(out_path: str, rmap) -> schemas.MapResponse:
    return schemas.MapResponse(out=out_path, width=rmap.width, height=rmap.height,
                               projection=rmap.projection.to_dict())


@app.post("/projection/reproject", response_model=schemas.MapResponse)
def projection_reproject(req: schemas.ReprojectRequest):
    rmap = _load(req.pano)
    dst = Projection(req.kind, fov_deg=req.fov_deg)
    frame = ViewFrame.from_angles(yaw_deg=req.yaw_deg, pitch_deg=req.pitch_deg)
    out = reproject(rmap, dst, (req.height, req.width), frame=frame,
                    allow_partial=req.allow_partial)
    pano_io.save_map(req.out, out)
    return _map_response(req.out, out)


@app.post("/projection/downscale", response_model=schemas.MapResponse)
def projection_downscale(req: schemas.DownscaleRequest):
    rmap = _load(req.pano)
    out = downscale_energy_preserving(rmap, (req.height, req.width))
    pano_io.save_map(req.out, out)
    return _map_response(req.out, out)


@app.post("/degrade", response_model=schemas.DegradeResponse)
def degrade_endpoint(req: schemas.DegradeRequest):
    rmap = _load(req.pano)
    spec = DegradationSpec(rng_seed=req.seed, **req.spec.model_dump())
    result = degrade_all(rmap, spec, req.seed)
    meta = {"tool": f"panophot {__version__}", "spec": json.loads(spec.to_json()),
            **result.metadata()}
    if req.out.endswith(".npz"):
        np.savez(req.out, image=result.image, meta=json.dumps(meta, sort_keys=True))
    else:
        pano_io.save_image(req.out, result.image, meta)
    return schemas.DegradeResponse(out=req.out, **result.metadata())


@app.post("/metrics/compare", response_model=schemas.MetricsResponse)
def metrics_compare(req: schemas.MetricsRequest):
    pred = _load(req.pred)
    gt = _load(req.gt)
    if pred.projection != gt.projection or pred.shape != gt.shape:
        raise HTTPException(status_code=400,
                            detail="prediction and ground truth must share projection and size")
    weights = solid_angles(gt.projection, gt.shape)
    report = compare_maps(luminance_map(pred), luminance_map(gt), weights)
    return schemas.MetricsResponse(**report.to_dict())


@app.post("/stats", response_model=schemas.StatsResponse)
def stats_endpoint(req: schemas.StatsRequest):
    if not req.panos:
        raise HTTPException(status_code=422, detail="no panoramas given")
    folded = dataset_statistics((_load(p) for p in req.panos), names=req.panos)
    report = folded.report()
    return schemas.StatsResponse(
        n_maps=report["n_maps"], median_msi_lux=report["median_msi_lux"],
        median_temperature_k=report.get("median_temperature_k"),
        msi_quantiles_lux=report["msi_quantiles_lux"],
        temperature_quantiles_k=report.get("temperature_quantiles_k"))


@app.post("/synth", response_model=schemas.SynthResponse)
def synth_endpoint(req: schemas.SynthRequest):
    size = (req.height, req.width)
    if req.kind == "uniform":
        rmap, truth = uniform_sphere(req.radiance, size)
    elif req.kind == "disk":
        rmap, truth = disk_source(req.radiance, req.axis, req.angular_radius_deg,
                                  req.background, size)
    elif req.kind == "blackbody":
        rmap, truth = blackbody_panorama(req.temperature_k, req.magnitude, size)
    else:
        raise HTTPException(status_code=400, detail=f"unknown synth kind {req.kind!r}")
    pano_io.save_map(req.out, rmap, extra={"truth": truth})
    return schemas.SynthResponse(out=req.out, truth=truth)


@app.post("/merge", response_model=schemas.MergeResponse)
def merge_endpoint(req: schemas.MergeRequest):
    frames = []
    for f in req.frames:
        try:
            pixels, _ = pano_io.load_pixels(f.path)
        except FileNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        frames.append(Frame(pixels=pixels, exposure_time=f.exposure_time,
                            aperture=f.aperture, iso=f.iso))
    bracket = ExposureBracket(frames=frames, config_id=req.config_id,
                              vignette=tuple(req.vignette) if req.vignette else None)
    rmap, sat_mask = merge_bracket(bracket)
    pano_io.save_map(req.out, rmap, extra={"config_id": req.config_id,
                                           "saturated_fraction": float(sat_mask.mean())})
    return schemas.MergeResponse(out=req.out, saturated_fraction=float(sat_mask.mean()))
