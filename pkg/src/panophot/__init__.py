"""panophot: photometrically calibrated HDR panoramas and what to do with them.

Turns bracketed exposures plus chroma-meter readings into absolute-scale
radiance maps, and computes physically meaningful quantities from them:
per-pixel luminance and color temperature, planar illuminance, mean
spherical illuminance, plus the LDR degradation simulator and the
solid-angle-weighted metrics used to evaluate predictions.
"""

__version__ = "0.1.0"

from .maps import (CameraIntrinsics, CoverageError, DegenerateChromaticityError,
                   FULL_SPHERE, HEMISPHERE, InsufficientDataError,
                   InvalidModelError, ORTHO, OutOfDomainError, Projection,
                   RadianceMap, SolidAngleMap, ViewFrame, fisheye, perspective)
from .colors import (Chromaticity, TriStimulus, cct_from_xy, rgb_to_xyz,
                     xyy_to_rgb, xyz_to_rgb)
from .photometry import (cct_map, luminance_map, mean_spherical_illuminance,
                         orthographic_illuminance, planar_illuminance,
                         scene_temperature)
from .projection import (direction_to_pixel, downscale_energy_preserving,
                         pixel_to_direction, reproject, solid_angles)
from .hdr import ExposureBracket, Frame, correct_vignette, merge_bracket, relative_exposure
from .calibration import (CalibrationProfile, CalibrationSample, ChromaReading,
                          apply_profile, fit_profile, reading_to_channel_targets)
from .degrade import (DegradationResult, DegradationSpec, add_noise, degrade_all,
                      gamma_decode, gamma_encode, hue_shift, quantize, reexpose_clip)
from .metrics import (MetricReport, SourceStats, dataset_statistics,
                      light_source_stats, relative_error_map, scalar_r_squared,
                      si_rmse, weighted_rmse)
from .synth import blackbody_panorama, disk_source, uniform_sphere
