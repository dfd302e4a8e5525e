"""Sliding-window processing with overlap blending for large images."""

from __future__ import annotations

import numpy as np

from . import image, solver
from .angle import AngleEstimate, estimate_angle
from .errors import InvalidImageError, NoSignalError

TILE_SIZE = 128
TILE_OVERLAP = 16
# Tiling kicks in automatically above this edge length.
TILE_THRESHOLD = 256


def tile_starts(extent: int, tile: int, overlap: int) -> list[int]:
    """Start offsets covering [0, extent) with the last tile edge-aligned."""
    if extent <= tile:
        return [0]
    step = tile - overlap
    starts = list(range(0, extent - tile, step))
    starts.append(extent - tile)
    return starts


def blend_weights(length: int, ramp: int) -> np.ndarray:
    """Separable weight profile: linear ramps at both ends, plateau inside.

    The solver's periodic transform leaves wrap-around artifacts on tile
    border rows/columns, so edge weights drop to (almost) zero and the
    overlap crossfade sources those pixels from the neighbouring tile's
    interior.  The epsilon floor keeps normalization defined at image
    borders where only one tile contributes.
    """
    i = np.arange(length, dtype=np.float64)
    w = np.minimum(i, length - 1.0 - i) / max(ramp, 1)
    return np.clip(w, 1e-6, 1.0)


def stitch(tiles: list[tuple[int, int, np.ndarray]], shape: tuple[int, int],
           overlap: int) -> np.ndarray:
    """Blend (row0, col0, tile) patches into one image."""
    acc = np.zeros(shape)
    den = np.zeros(shape)
    for r0, c0, patch in tiles:
        h, w = patch.shape
        wt = np.outer(blend_weights(h, overlap), blend_weights(w, overlap))
        acc[r0 : r0 + h, c0 : c0 + w] += wt * patch
        den[r0 : r0 + h, c0 : c0 + w] += wt
    if (den == 0).any():
        raise InvalidImageError("tiles do not cover the image")
    return acc / den


def derain_tiled(
    Y,
    params: solver.UdgParams | None = None,
    angle: float | AngleEstimate | None = None,
    tile: int = TILE_SIZE,
    overlap: int = TILE_OVERLAP,
) -> solver.DecompositionResult:
    """Tile-wise decomposition with one global angle.

    The whole image is rectified once, fixed-size windows are solved with
    no further rotation, and the blended layers are rotated back.  The
    streak angle is global because the streak field is global; per-tile
    estimates would disagree at seams.
    """
    Y = image.as_grid(Y, min_side=32)
    params = params or solver.UdgParams()
    if tile < 32 or not 0 < overlap < tile:
        raise InvalidImageError("need tile >= 32 and 0 < overlap < tile")

    angle_source = "user"
    low_conf = False
    if angle is None:
        try:
            est = estimate_angle(Y)
            angle_source = "estimated"
            low_conf = est.confidence < 1.5
        except NoSignalError:
            est = AngleEstimate(0.0, 1.0)
            angle_source = "fallback_flat"
            low_conf = True
    elif isinstance(angle, AngleEstimate):
        est = angle
    else:
        est = AngleEstimate(image.canonical_angle(float(angle)), 1.0)

    spec = image.RotationSpec(est.angle_degrees)
    Y_r = image.rotate(Y, spec)
    h, w = Y_r.shape

    clean_patches, rain_patches = [], []
    traces = []
    iters = 0
    for r0 in tile_starts(h, tile, overlap):
        for c0 in tile_starts(w, tile, overlap):
            window = Y_r[r0 : r0 + min(tile, h), c0 : c0 + min(tile, w)]
            res = solver.derain(window, params=params, angle=0.0)
            clean_patches.append((r0, c0, res.clean_rotated))
            rain_patches.append((r0, c0, res.rain_rotated))
            traces.append(res.objective_trace)
            iters = max(iters, res.iters_used)

    X_r = stitch(clean_patches, (h, w), overlap)
    R_r = stitch(rain_patches, (h, w), overlap)
    back = image.RotationSpec(-est.angle_degrees)
    max_len = max((len(t) for t in traces), default=0)
    if max_len:
        padded = np.stack(
            [np.pad(t, (0, max_len - len(t)), mode="edge") for t in traces]
        )
        trace = padded.sum(axis=0)  # summed tile energies per outer iteration
    else:
        trace = np.zeros(0)

    rain_back = image.rotate(R_r, back)
    return solver.DecompositionResult(
        clean=Y - rain_back,
        rain=rain_back,
        clean_rotated=X_r,
        rain_rotated=R_r,
        angle=est,
        angle_source=angle_source,
        objective_trace=trace,
        iters_used=iters,
        converged=True,
        low_confidence_angle=low_conf,
    )


def should_tile(shape: tuple[int, int], threshold: int = TILE_THRESHOLD) -> bool:
    return max(shape[:2]) > threshold
