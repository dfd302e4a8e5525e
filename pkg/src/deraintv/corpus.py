"""Streak-free test images used for calibration and premise checks.

The corpus mixes bundled photographs from scikit-image (natural scenes,
near-isotropic gradient statistics) with deterministic procedural
textures, so the test suite never reaches for the network.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .image import central_crop, to_luma

# Photographic samples whose gradient statistics behave like generic
# natural images.  Document scans and strongly oriented content (text,
# brick, coffee's table edges) are deliberately absent.
_SKIMAGE_NAMES = (
    "coins",
    "moon",
    "astronaut",
    "chelsea",
    "immunohistochemistry",
    "gravel",
    "grass",
    "hubble_deep_field",
)


def _load_skimage(name: str) -> np.ndarray:
    from skimage import data

    arr = np.asarray(getattr(data, name)(), dtype=np.float64) / 255.0
    if arr.ndim == 3:
        arr = to_luma(arr)
    return arr


def procedural_texture(size: int = 128, seed: int = 0, smooth: float = 3.0) -> np.ndarray:
    """Smoothed noise field, isotropic by construction."""
    rng = np.random.default_rng(seed)
    img = ndimage.gaussian_filter(rng.random((size, size)), smooth, mode="wrap")
    lo, hi = img.min(), img.max()
    return (img - lo) / (hi - lo + 1e-12)


def clean_corpus(tile: int = 128) -> dict[str, np.ndarray]:
    """Named streak-free tiles, each ``tile`` x ``tile`` in [0, 1]."""
    out: dict[str, np.ndarray] = {}
    for name in _SKIMAGE_NAMES:
        img = _load_skimage(name)
        h, w = img.shape
        if h < tile or w < tile:
            continue
        r0, c0 = (h - tile) // 2, (w - tile) // 2
        out[name] = img[r0 : r0 + tile, c0 : c0 + tile].copy()
    for seed in (7, 8):
        out[f"texture{seed}"] = procedural_texture(tile, seed=seed)
    return out


def smooth_corpus(tile: int = 128, blur: float = 2.0) -> dict[str, np.ndarray]:
    """Low-pass versions of the corpus, for interpolation-error bounds."""
    return {
        name: ndimage.gaussian_filter(img, blur, mode="nearest")
        for name, img in clean_corpus(tile).items()
    }


def corpus_tiles(tile: int = 128, count: int | None = None) -> list[np.ndarray]:
    """Corpus images as a list, optionally repeated with shifted crops."""
    base = clean_corpus(tile)
    tiles = list(base.values())
    if count is None or count <= len(tiles):
        return tiles[:count] if count else tiles
    names = _SKIMAGE_NAMES
    idx = 0
    while len(tiles) < count:
        img = _load_skimage(names[idx % len(names)])
        h, w = img.shape
        if h >= tile and w >= tile:
            rng = np.random.default_rng(1000 + idx)
            r0 = int(rng.integers(0, h - tile + 1))
            c0 = int(rng.integers(0, w - tile + 1))
            tiles.append(img[r0 : r0 + tile, c0 : c0 + tile].copy())
        else:
            tiles.append(procedural_texture(tile, seed=2000 + idx))
        idx += 1
    return tiles


def smooth_image(img: np.ndarray, blur: float = 2.0) -> np.ndarray:
    return ndimage.gaussian_filter(img, blur, mode="nearest")


__all__ = [
    "clean_corpus",
    "smooth_corpus",
    "corpus_tiles",
    "procedural_texture",
    "smooth_image",
    "central_crop",
]
