"""Pydantic request/response models for the HTTP service.

Panoramas travel as file paths on a filesystem shared with the service
(the files are far too large for inline JSON); scalar results and small
records travel inline.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    name: str
    version: str


class SampleIn(BaseModel):
    config_id: str
    e_rgb: tuple[float, float, float]
    ev_lux: float = Field(ge=0)
    x: float
    y: float


class FitRequest(BaseModel):
    samples: list[SampleIn]


class ConfigFit(BaseModel):
    k: tuple[float, float, float]
    r2: tuple[float, float, float]
    n: int


class FitResponse(BaseModel):
    version: int
    created: str
    configs: dict[str, ConfigFit]


class ApplyRequest(BaseModel):
    pano: str
    config_id: str
    profile: FitResponse | None = None
    profile_path: str | None = None
    out: str


class ApplyResponse(BaseModel):
    out: str
    k: tuple[float, float, float]


class PanoRequest(BaseModel):
    pano: str


class IlluminanceResponse(BaseModel):
    e_rgb: tuple[float, float, float]
    e_lux: float
    units: str


class MsiResponse(BaseModel):
    msi: float
    scene_temperature_k: float | None
    units: str


class CctMapRequest(BaseModel):
    pano: str
    out: str


class CctMapResponse(BaseModel):
    out: str
    valid_fraction: float
    median_k: float | None


class ReprojectRequest(BaseModel):
    pano: str
    kind: str
    fov_deg: float | None = None
    width: int = Field(gt=0)
    height: int = Field(gt=0)
    yaw_deg: float = 0.0
    pitch_deg: float = 0.0
    allow_partial: bool = False
    out: str


class DownscaleRequest(BaseModel):
    pano: str
    width: int = Field(gt=0)
    height: int = Field(gt=0)
    out: str


class MapResponse(BaseModel):
    out: str
    width: int
    height: int
    projection: dict


class DegradationSpecIn(BaseModel):
    reexpose_percentile: float = 90.0
    reexpose_anchor: float = 0.8
    gamma: float | None = 2.2
    quantize_bits: int | None = 8
    noise_variance_range: tuple[float, float] | None = (0.0, 0.03)
    hue_shift_variance: float | None = 0.03
    apply_hue: bool = False


class DegradeRequest(BaseModel):
    pano: str
    out: str
    seed: int = 0
    spec: DegradationSpecIn = DegradationSpecIn()


class DegradeResponse(BaseModel):
    out: str
    scale: float
    noise_variance: float | None
    hue_offset: float | None
    seed: int


class MetricsRequest(BaseModel):
    pred: str
    gt: str


class MetricsResponse(BaseModel):
    rmse: float | None
    si_rmse: float | None
    mean_relative_error: float | None
    r_squared: float | None


class StatsRequest(BaseModel):
    panos: list[str]


class StatsResponse(BaseModel):
    n_maps: int
    median_msi_lux: float | None
    median_temperature_k: float | None = None
    msi_quantiles_lux: dict[str, float]
    temperature_quantiles_k: dict[str, float] | None = None


class SynthRequest(BaseModel):
    kind: str  # uniform | disk | blackbody
    out: str
    radiance: tuple[float, float, float] = (1.0, 1.0, 1.0)
    background: tuple[float, float, float] = (0.0, 0.0, 0.0)
    axis: tuple[float, float, float] = (0.0, 1.0, 0.0)
    angular_radius_deg: float = 30.0
    temperature_k: float = 3000.0
    magnitude: float = 1.0
    width: int = 128
    height: int = 64


class SynthResponse(BaseModel):
    out: str
    truth: dict


class FrameIn(BaseModel):
    path: str
    exposure_time: float = Field(gt=0)
    aperture: float = Field(gt=0)
    iso: float = Field(gt=0)


class MergeRequest(BaseModel):
    frames: list[FrameIn]
    config_id: str
    vignette: list[float] | None = None
    out: str


class MergeResponse(BaseModel):
    out: str
    saturated_fraction: float
