"""Rain streak removal by directional-gradient image decomposition.

A rainy image, once rotated so its streaks run vertical, splits into a
clean layer with balanced horizontal/vertical gradients and a rain layer
whose gradient energy lives almost entirely across the streaks.  The
solver exploits that asymmetry with a pair of alternating
splitting-method subproblems, each closed-form via the FFT.
"""

from .angle import AngleEstimate, anisotropy_score, estimate_angle
from .errors import (
    ConfigError,
    DerainError,
    ImageIOError,
    InvalidImageError,
    NoSignalError,
    NumericError,
)
from .image import (
    GradientPair,
    RotationSpec,
    as_grid,
    canonical_angle,
    grad_adjoint,
    grad_forward,
    grad_pair,
    load_image,
    rotate,
    save_image,
    to_luma,
)
from .metrics import (
    EvalReport,
    anisotropy_ratio,
    gradient_histogram,
    js_divergence,
    psnr,
    run_sweep,
    ssim,
)
from .solver import (
    AdmmState,
    DecompositionResult,
    UdgParams,
    derain,
    derain_planes,
    energy,
    shrink,
    update_R,
    update_X,
)
from .synth import RainPair, RainSpec, make_pair, screen_blend, synth_rain_layer
from .tiles import derain_tiled

__version__ = "0.1.0"

__all__ = [
    "AngleEstimate",
    "AdmmState",
    "ConfigError",
    "DecompositionResult",
    "DerainError",
    "EvalReport",
    "GradientPair",
    "ImageIOError",
    "InvalidImageError",
    "NoSignalError",
    "NumericError",
    "RainPair",
    "RainSpec",
    "RotationSpec",
    "UdgParams",
    "anisotropy_ratio",
    "anisotropy_score",
    "as_grid",
    "canonical_angle",
    "derain",
    "derain_planes",
    "derain_tiled",
    "energy",
    "estimate_angle",
    "gradient_histogram",
    "grad_adjoint",
    "grad_forward",
    "grad_pair",
    "js_divergence",
    "load_image",
    "make_pair",
    "psnr",
    "rotate",
    "run_sweep",
    "save_image",
    "screen_blend",
    "shrink",
    "ssim",
    "synth_rain_layer",
    "to_luma",
    "update_R",
    "update_X",
]
