"""Command-line front end: thin, loss-free adapters over the library.

Every command is a pure composition of library calls; results match direct
library use bit for bit. Exit codes: 0 ok, 1 internal error, 2 bad input,
3 insufficient data, 4 coverage/projection error. Map arguments accept
"-" for lossless float64 piping through stdin/stdout.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import sys
import traceback
from pathlib import Path

import click
import numpy as np

from . import __version__, pano_io
from .calibration import (CalibrationProfile, CalibrationSample, ChromaReading,
                          apply_profile, fit_profile)
from .degrade import DegradationSpec, degrade_all
from .hdr import ExposureBracket, Frame, merge_bracket
from .maps import (CoverageError, InsufficientDataError, Projection, RadianceMap,
                   ViewFrame)
from .metrics import compare_maps, dataset_statistics, light_source_stats
from .photometry import (cct_map, luminance_map, mean_spherical_illuminance,
                         orthographic_illuminance, planar_illuminance,
                         scene_temperature)
from .projection import downscale_energy_preserving, reproject, solid_angles
from .synth import blackbody_panorama, disk_source, uniform_sphere

_PROJECTION_NAMES = {
    "equirect-full": "equirect_full",
    "equirect-hemisphere": "equirect_hemisphere",
    "perspective": "perspective",
    "orthographic": "orthographic",
}


def _parse_projection(name: str | None, fov: float | None) -> Projection | None:
    if name is None:
        return None
    kind = _PROJECTION_NAMES.get(name)
    if kind is None:
        raise click.UsageError(f"unknown projection {name!r}")
    if kind == "perspective":
        if fov is None:
            raise click.UsageError("perspective projection needs --fov")
        return Projection(kind, fov_deg=fov)
    return Projection(kind)


def _parse_rgb(text: str) -> tuple:
    parts = [float(p) for p in text.split(",")]
    if len(parts) == 1:
        parts = parts * 3
    if len(parts) != 3:
        raise click.UsageError("expected one value or r,g,b")
    return tuple(parts)


def _parse_range(text: str) -> tuple:
    lo, _, hi = text.partition(":")
    return float(lo), float(hi)


def _emit(payload: dict, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(payload, sort_keys=True))
    else:
        for key, value in payload.items():
            click.echo(f"{key}: {value}")


@click.group()
@click.version_option(__version__, prog_name="panophot")
def cli():
    """Photometric processing of HDR panoramas."""


@cli.command()
@click.option("--samples", "samples_path", required=True, type=click.Path(exists=True),
              help="CSV with columns config_id, Er, Eg, Eb, Ev_lux, x, y.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def calibrate(samples_path, out_path, as_json):
    """Fit per-channel calibration coefficients from chroma-meter samples."""
    samples = _read_samples_csv(samples_path)
    profile = fit_profile(samples)
    Path(out_path).write_text(profile.to_json())
    if as_json:
        payload = {cid: {"k": list(c.k), "r2": list(c.r_squared), "n": c.n_samples}
                   for cid, c in profile.configs.items()}
        _emit({"profile": out_path, "configs": payload}, True)
    else:
        for cid, c in profile.configs.items():
            click.echo(f"{cid}: k = ({c.k[0]:.6g}, {c.k[1]:.6g}, {c.k[2]:.6g})  "
                       f"R^2 = ({c.r_squared[0]:.4f}, {c.r_squared[1]:.4f}, "
                       f"{c.r_squared[2]:.4f})  n = {c.n_samples}")


def _read_samples_csv(path):
    required = ["config_id", "Er", "Eg", "Eb", "Ev_lux", "x", "y"]
    samples = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise InsufficientDataError("empty samples file")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise ValueError(f"samples CSV misses columns {missing}")
        for row_no, row in enumerate(reader, start=2):
            try:
                samples.append(CalibrationSample(
                    config_id=row["config_id"],
                    e_rgb=(float(row["Er"]), float(row["Eg"]), float(row["Eb"])),
                    reading=ChromaReading(ev_lux=float(row["Ev_lux"]),
                                          x=float(row["x"]), y=float(row["y"])),
                ))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"samples CSV row {row_no}: {exc}") from exc
    if not samples:
        raise InsufficientDataError("samples CSV contains no data rows")
    return samples


@cli.command(name="apply")
@click.option("--pano", "pano_path", default="-", type=str)
@click.option("--profile", "profile_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_id", required=True)
@click.option("--out", "out_path", default="-", type=str)
def apply_cmd(pano_path, profile_path, config_id, out_path):
    """Calibrate a panorama with its configuration's coefficients."""
    rmap, _ = pano_io.load_map(pano_path)
    profile_text = Path(profile_path).read_text()
    profile = CalibrationProfile.from_json(profile_text)
    calibrated = apply_profile(rmap, profile, config_id)
    digest = hashlib.sha256(profile_text.encode()).hexdigest()
    pano_io.save_map(out_path, calibrated,
                     extra={"profile_sha256": digest, "config_id": config_id})


@cli.command()
@click.option("--pano", "pano_path", default="-", type=str)
@click.option("--projection", "projection_name", default=None,
              type=click.Choice(sorted(_PROJECTION_NAMES)), help="Override for foreign files.")
@click.option("--fov", type=float, default=None)
@click.option("--json", "as_json", is_flag=True)
def illuminance(pano_path, projection_name, fov, as_json):
    """Planar illuminance of a hemisphere or orthographic map (per channel)."""
    rmap, _ = pano_io.load_map(pano_path, projection=_parse_projection(projection_name, fov))
    if rmap.projection.kind == "orthographic":
        e_rgb = orthographic_illuminance(rmap)
    elif rmap.projection.kind == "equirect_hemisphere":
        e_rgb = planar_illuminance(rmap)
    else:
        raise CoverageError(
            f"illuminance needs a hemisphere or orthographic map, got "
            f"{rmap.projection.kind}; use `project` first")
    from .colors import LUMA_WEIGHTS
    _emit({"e_rgb": list(e_rgb), "e_lux": float(LUMA_WEIGHTS @ e_rgb),
           "units": "lux" if rmap.calibrated else "relative"}, as_json)


@cli.command()
@click.option("--pano", "pano_path", default="-", type=str)
@click.option("--json", "as_json", is_flag=True)
def msi(pano_path, as_json):
    """Mean spherical illuminance and scene temperature of a full panorama."""
    rmap, _ = pano_io.load_map(pano_path)
    weights = solid_angles(rmap.projection, rmap.shape)
    value = mean_spherical_illuminance(rmap, weights)
    try:
        temperature = scene_temperature(rmap, weights)
    except ValueError:
        temperature = None
    _emit({"msi": value, "scene_temperature_k": temperature,
           "units": "lux" if rmap.calibrated else "relative"}, as_json)


@cli.command(name="cct-map")
@click.option("--pano", "pano_path", default="-", type=str)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def cct_map_cmd(pano_path, out_path, as_json):
    """Per-pixel correlated color temperature map (.npz: kelvin, valid)."""
    rmap, _ = pano_io.load_map(pano_path)
    kelvin, valid = cct_map(rmap)
    meta = {"tool": f"panophot {__version__}", "units": "kelvin",
            "projection": rmap.projection.to_dict()}
    np.savez(out_path, kelvin=kelvin, valid=valid, meta=json.dumps(meta, sort_keys=True))
    summary = {"out": str(out_path), "valid_fraction": float(valid.mean())}
    if valid.any():
        summary["median_k"] = float(np.median(kelvin[valid]))
    _emit(summary, as_json)


@cli.command()
@click.option("--pano", "pano_path", default="-", type=str)
@click.option("--to", "target", required=True, type=click.Choice(sorted(_PROJECTION_NAMES)))
@click.option("--fov", type=float, default=None)
@click.option("--width", type=int, required=True)
@click.option("--height", type=int, required=True)
@click.option("--yaw", type=float, default=0.0, help="View azimuth, degrees.")
@click.option("--pitch", type=float, default=0.0, help="View elevation, degrees.")
@click.option("--allow-partial", is_flag=True,
              help="Fill uncovered pixels with 0 instead of failing.")
@click.option("--out", "out_path", default="-", type=str)
def project(pano_path, target, fov, width, height, yaw, pitch, allow_partial, out_path):
    """Reproject a panorama into another projection / field of view."""
    rmap, _ = pano_io.load_map(pano_path)
    dst = _parse_projection(target, fov)
    frame = ViewFrame.from_angles(yaw_deg=yaw, pitch_deg=pitch)
    out = reproject(rmap, dst, (height, width), frame=frame, allow_partial=allow_partial)
    pano_io.save_map(out_path, out)


@cli.command()
@click.option("--pano", "pano_path", default="-", type=str)
@click.option("--width", type=int, required=True)
@click.option("--height", type=int, required=True)
@click.option("--out", "out_path", default="-", type=str)
def downscale(pano_path, width, height, out_path):
    """Energy-preserving downscale of an equirect map (flux and MSI conserved)."""
    rmap, _ = pano_io.load_map(pano_path)
    out = downscale_energy_preserving(rmap, (height, width))
    pano_io.save_map(out_path, out)


@cli.command()
@click.option("--pano", "pano_path", default="-", type=str)
@click.option("--out", "out_path", required=True, type=str,
              help=".png for 8-bit LDR output, .npz for lossless.")
@click.option("--seed", type=int, default=0)
@click.option("--percentile", type=float, default=90.0)
@click.option("--anchor", type=float, default=0.8)
@click.option("--gamma", type=float, default=2.2, help="0 disables tonemapping.")
@click.option("--bits", type=int, default=8, help="0 disables quantization.")
@click.option("--noise-range", default="0:0.03", help="lo:hi variance range; 0:0 disables.")
@click.option("--hue-var", type=float, default=0.03)
@click.option("--hue/--no-hue", "with_hue", default=False,
              help="Shift hue after reexposure (temperature task input).")
@click.option("--metadata", "meta_path", default=None, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def degrade(pano_path, out_path, seed, percentile, anchor, gamma, bits, noise_range,
            hue_var, with_hue, meta_path, as_json):
    """Simulate LDR inputs: reexpose+clip, hue, gamma, quantize, noise."""
    rmap, _ = pano_io.load_map(pano_path)
    lo, hi = _parse_range(noise_range)
    spec = DegradationSpec(
        reexpose_percentile=percentile, reexpose_anchor=anchor,
        gamma=gamma if gamma > 0 else None,
        quantize_bits=bits if bits > 0 else None,
        noise_variance_range=None if hi == 0 else (lo, hi),
        hue_shift_variance=hue_var, apply_hue=with_hue, rng_seed=seed)
    result = degrade_all(rmap, spec, seed)
    meta = {"tool": f"panophot {__version__}", "spec": json.loads(spec.to_json()),
            **result.metadata()}
    if out_path == "-":
        buf = io.BytesIO()
        np.savez(buf, image=result.image, meta=json.dumps(meta, sort_keys=True))
        sys.stdout.buffer.write(buf.getvalue())
    elif out_path.endswith(".npz"):
        np.savez(out_path, image=result.image, meta=json.dumps(meta, sort_keys=True))
    else:
        pano_io.save_image(out_path, result.image, meta)
    if meta_path:
        Path(meta_path).write_text(json.dumps(meta, indent=2, sort_keys=True))
    if as_json:
        _emit(result.metadata(), True)


@cli.command()
@click.option("--pred", "pred_path", required=True, type=str)
@click.option("--gt", "gt_path", required=True, type=str)
@click.option("--json", "as_json", is_flag=True)
def metrics(pred_path, gt_path, as_json):
    """Solid-angle-weighted RMSE / siRMSE / relative error on luminance."""
    pred, _ = pano_io.load_map(pred_path)
    gt, _ = pano_io.load_map(gt_path)
    if pred.projection != gt.projection or pred.shape != gt.shape:
        raise ValueError("prediction and ground truth must share projection and size")
    weights = solid_angles(gt.projection, gt.shape)
    report = compare_maps(luminance_map(pred), luminance_map(gt), weights)
    _emit(report.to_dict(), as_json)


@cli.command()
@click.argument("panos", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path(), help="JSON report.")
@click.option("--csv", "csv_path", default=None, type=click.Path(), help="Per-map CSV.")
@click.option("--hist-prefix", default=None, type=click.Path(),
              help="Write <prefix>_msi.csv and <prefix>_temperature.csv histograms.")
@click.option("--json", "as_json", is_flag=True)
def stats(panos, out_path, csv_path, hist_prefix, as_json):
    """Dataset statistics: per-map MSI and scene temperature, quantiles."""
    paths = []
    for p in panos:
        path = Path(p)
        if path.is_dir():
            paths.extend(sorted(q for q in path.iterdir()
                                if q.suffix.lower() in (".hdr", ".exr", ".npz")))
        else:
            paths.append(path)
    if not paths:
        raise InsufficientDataError("no panoramas found")
    folded = dataset_statistics((pano_io.load_map(p)[0] for p in paths),
                                names=[str(p) for p in paths])
    report = folded.report()
    if out_path:
        Path(out_path).write_text(json.dumps(report, indent=2, sort_keys=True))
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["name", "msi_lux", "temperature_k"])
            for rec in report["per_map"]:
                writer.writerow([rec["name"], rec["msi_lux"], rec["temperature_k"]])
    if hist_prefix:
        for key, values in (("msi", folded.msi), ("temperature", folded.temperature)):
            edges, counts = folded.histogram(values)
            with open(f"{hist_prefix}_{key}.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["bin_lo", "bin_hi", "count"])
                for lo, hi, c in zip(edges[:-1], edges[1:], counts):
                    writer.writerow([lo, hi, int(c)])
    summary = {"n_maps": report["n_maps"],
               "median_msi_lux": report["median_msi_lux"],
               "median_temperature_k": report.get("median_temperature_k")}
    _emit(report if as_json else summary, as_json)


@cli.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True),
              help="JSON: {config_id, vignette?, frames: [{path, exposure_time, aperture, iso}]}")
@click.option("--out", "out_path", default="-", type=str)
@click.option("--json", "as_json", is_flag=True)
def merge(manifest_path, out_path, as_json):
    """Merge an exposure bracket into a relative-scale HDR map."""
    doc = json.loads(Path(manifest_path).read_text())
    frames = []
    for entry in doc["frames"]:
        pixels, _ = pano_io.load_pixels(entry["path"])
        frames.append(Frame(pixels=pixels, exposure_time=float(entry["exposure_time"]),
                            aperture=float(entry["aperture"]), iso=float(entry["iso"])))
    projection = (Projection.from_dict(doc["projection"]) if "projection" in doc
                  else Projection("equirect_full"))
    bracket = ExposureBracket(frames=frames, config_id=doc["config_id"],
                              vignette=tuple(doc["vignette"]) if doc.get("vignette") else None,
                              projection=projection)
    rmap, sat_mask = merge_bracket(bracket)
    pano_io.save_map(out_path, rmap, extra={"config_id": doc["config_id"],
                                            "saturated_fraction": float(sat_mask.mean())})
    if as_json:
        _emit({"out": out_path, "saturated_fraction": float(sat_mask.mean())}, True)


@cli.group()
def synth():
    """Analytic panoramas with closed-form photometric ground truth."""


def _write_synth(rmap, truth, out_path, truth_path, as_json):
    pano_io.save_map(out_path, rmap, extra={"truth": truth})
    if truth_path:
        Path(truth_path).write_text(json.dumps(truth, indent=2, sort_keys=True))
    if as_json and out_path != "-":
        _emit(truth, True)


@synth.command()
@click.option("--L", "radiance", default="1.0", help="Scalar or r,g,b radiance.")
@click.option("--height", type=int, default=64)
@click.option("--width", type=int, default=128)
@click.option("--out", "out_path", default="-", type=str)
@click.option("--truth", "truth_path", default=None, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def uniform(radiance, height, width, out_path, truth_path, as_json):
    """Constant radiance over the sphere (MSI = pi * Y)."""
    rmap, truth = uniform_sphere(_parse_rgb(radiance), (height, width))
    _write_synth(rmap, truth, out_path, truth_path, as_json)


@synth.command()
@click.option("--L", "radiance", default="1.0")
@click.option("--axis", default="0,1,0")
@click.option("--radius", "radius_deg", type=float, default=30.0, help="Angular radius, degrees.")
@click.option("--background", default="0.0")
@click.option("--height", type=int, default=256)
@click.option("--width", type=int, default=512)
@click.option("--out", "out_path", default="-", type=str)
@click.option("--truth", "truth_path", default=None, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def disk(radiance, axis, radius_deg, background, height, width, out_path, truth_path, as_json):
    """Spherical-cap source over a uniform background."""
    rmap, truth = disk_source(_parse_rgb(radiance), _parse_rgb(axis), radius_deg,
                              _parse_rgb(background), (height, width))
    _write_synth(rmap, truth, out_path, truth_path, as_json)


@synth.command()
@click.option("--temperature", "temperature_k", type=float, required=True)
@click.option("--magnitude", type=float, default=1.0)
@click.option("--height", type=int, default=64)
@click.option("--width", type=int, default=128)
@click.option("--out", "out_path", default="-", type=str)
@click.option("--truth", "truth_path", default=None, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def blackbody(temperature_k, magnitude, height, width, out_path, truth_path, as_json):
    """Uniform panorama at a blackbody chromaticity."""
    rmap, truth = blackbody_panorama(temperature_k, magnitude, (height, width))
    _write_synth(rmap, truth, out_path, truth_path, as_json)


@cli.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the HTTP service wrapping the same library operations."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


def main(argv=None):
    try:
        cli(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 1
    except InsufficientDataError as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    except CoverageError as exc:
        click.echo(f"error: {exc}", err=True)
        return 4
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
