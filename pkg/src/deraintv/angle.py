"""Dominant streak-angle estimation by directional gradient search.

Rain streaks concentrate gradient energy across their direction, so the
ratio of across- to along-streak derivative mass peaks at the trial angle
that lines up with the streaks.  The score projects one smoothed gradient
field onto each trial direction instead of re-rotating the image per
candidate: resampling noise flattens the peak enough to cost several
degrees, while the projected field keeps sub-degree bias.  A coarse grid
scan followed by golden-section refinement locates the peak.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import image
from .errors import InvalidImageError, NoSignalError

SCORE_EPS = 1e-6
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0

# Gaussian-derivative scale for the gradient field.  Plain difference
# stencils carry a sin(4*theta) direction bias of several degrees; at
# sigma 1.0 the bias measured on synthetic streaks is below 0.1 degree.
GRAD_SIGMA = 1.0


@dataclass(frozen=True)
class AngleEstimate:
    """Estimated streak angle and how decisively it beat the field.

    ``confidence`` is the best anisotropy score divided by the median
    score over the coarse candidates; values near 1 mean the image has no
    dominant direction.
    """

    angle_degrees: float
    confidence: float

    def __post_init__(self):
        if not -90.0 < self.angle_degrees <= 90.0:
            raise InvalidImageError(
                f"angle {self.angle_degrees} outside (-90, 90]"
            )
        if self.confidence < 1.0:
            raise InvalidImageError("confidence must be >= 1")


def directional_gradients(img, sigma: float = GRAD_SIGMA):
    """Smoothed (d/drow, d/dcol) field with edge-replicated boundary."""
    img = image.as_grid(img)
    g_row = ndimage.gaussian_filter(img, sigma, order=(1, 0), mode="nearest")
    g_col = ndimage.gaussian_filter(img, sigma, order=(0, 1), mode="nearest")
    return g_row, g_col


def _score_from_field(g_row, g_col, angle_degrees: float) -> float:
    theta = np.deg2rad(angle_degrees)
    along = g_row * np.cos(theta) + g_col * np.sin(theta)
    across = g_col * np.cos(theta) - g_row * np.sin(theta)
    return float(np.abs(across).sum() / (np.abs(along).sum() + SCORE_EPS))


def anisotropy_score(img, angle_degrees: float) -> float:
    """Across/along absolute-derivative ratio at one trial streak angle.

    Large when the trial angle matches the streak direction; close to 1
    on images without a dominant orientation.
    """
    g_row, g_col = directional_gradients(img)
    return _score_from_field(g_row, g_col, angle_degrees)


def estimate_angle(
    img,
    coarse_step_degrees: float = 2.0,
    refine_step_degrees: float = 0.25,
    search_range: tuple[float, float] = (-60.0, 60.0),
) -> AngleEstimate:
    """Estimate the dominant streak angle of ``img``.

    Scans ``search_range`` (open at the low end, closed at the high end)
    on a ``coarse_step_degrees`` grid, then golden-section refines around
    the best candidate down to ``refine_step_degrees``.  Deterministic for
    fixed inputs.

    Raises
    ------
    NoSignalError
        If the image is flat (every derivative below the score epsilon);
        callers typically fall back to an angle of zero.
    InvalidImageError
        If the image is smaller than 32 px on a side.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3:
        arr = image.to_luma(arr)
    arr = image.as_grid(arr, min_side=32)

    lo, hi = search_range
    if not (hi > lo and coarse_step_degrees > 0 and refine_step_degrees > 0):
        raise InvalidImageError("invalid search configuration")

    g_row, g_col = directional_gradients(arr)
    if max(np.abs(g_row).max(), np.abs(g_col).max()) < SCORE_EPS:
        raise NoSignalError("image is flat; no streak direction to estimate")

    candidates = np.arange(lo + coarse_step_degrees, hi + 1e-9, coarse_step_degrees)
    scores = np.array([_score_from_field(g_row, g_col, a) for a in candidates])
    best = int(np.argmax(scores))
    confidence = float(scores[best] / max(np.median(scores), SCORE_EPS))
    confidence = max(confidence, 1.0)

    # Golden-section refinement on the bracketing interval.
    a = candidates[best] - coarse_step_degrees
    b = candidates[best] + coarse_step_degrees
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1 = _score_from_field(g_row, g_col, x1)
    f2 = _score_from_field(g_row, g_col, x2)
    while (b - a) > refine_step_degrees:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = _score_from_field(g_row, g_col, x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = _score_from_field(g_row, g_col, x2)

    angle = image.canonical_angle(0.5 * (a + b))
    return AngleEstimate(angle_degrees=angle, confidence=confidence)


# Below this confidence the direction is reported but flagged as weak;
# a mis-rotation of a few degrees costs only ~0.1 dB, so processing
# continues with a warning instead of failing.
LOW_CONFIDENCE = 1.5


def is_low_confidence(estimate: AngleEstimate) -> bool:
    return estimate.confidence < LOW_CONFIDENCE
