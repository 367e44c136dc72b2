"""Adaptive sparse pixel sampling for skeleton-like grayscale images.

The sampler measures a hidden image pixel by pixel, steering each batch of
measurements with hierarchically refined Gaussian mixture models so that
acquisition concentrates on bright skeleton structure instead of covering
the frame uniformly.
"""

from ._kernels import BACKEND as kernel_backend
from .imaging import (
    Image,
    Location,
    MeasurementSet,
    PgmDataError,
    PgmDepthError,
    PgmError,
    PgmFormatError,
    PgmHeaderError,
    generate_dendrite,
    load_image,
    measure,
    sampled_image,
    save_image,
    save_mask,
)
from .metrics import QualityReport, psnr, random_baseline, ssim
from .mixture import (
    GaussianComponent,
    GmmModel,
    bic,
    fit_gmm,
    mahalanobis,
    mahalanobis_many,
    predict,
    select_model,
)
from .sampler import (
    Region,
    SamplerConfig,
    SamplingTrace,
    Snapshot,
    TraceEntry,
    construct_region,
    initial_random_sample,
    layer_gmm,
    run_uslads,
    segment,
)
from .threshold import Threshold, otsu_threshold

__version__ = "0.1.0"

__all__ = [
    "GaussianComponent",
    "GmmModel",
    "Image",
    "Location",
    "MeasurementSet",
    "PgmDataError",
    "PgmDepthError",
    "PgmError",
    "PgmFormatError",
    "PgmHeaderError",
    "QualityReport",
    "Region",
    "SamplerConfig",
    "SamplingTrace",
    "Snapshot",
    "Threshold",
    "TraceEntry",
    "bic",
    "construct_region",
    "fit_gmm",
    "generate_dendrite",
    "initial_random_sample",
    "kernel_backend",
    "layer_gmm",
    "load_image",
    "mahalanobis",
    "mahalanobis_many",
    "measure",
    "otsu_threshold",
    "predict",
    "psnr",
    "random_baseline",
    "run_uslads",
    "sampled_image",
    "save_image",
    "save_mask",
    "segment",
    "select_model",
    "ssim",
]
