"""Synthetic rain-streak layers and rainy composites with ground truth.

Streaks are stamped as anti-aliased capsules (distance-to-segment with a
Gaussian cross profile), which keeps them smooth at arbitrary angles; hard
one-pixel lines alias badly off-axis and would corrupt angle-estimator
tests.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidImageError
from .image import as_grid

BLEND_MODES = ("screen", "additive")


@dataclass(frozen=True)
class RainSpec:
    """Parameters of one synthetic rain field.

    ``density`` is the expected number of streak seeds per 1000 pixels;
    lengths and intensities are jittered uniformly by the given fractions.
    The same seed always reproduces the same layer.
    """

    angle_degrees: float = 0.0
    density: float = 2.0
    length_px: float = 20.0
    length_jitter: float = 0.3
    width_px: float = 1.5
    intensity: float = 0.5
    intensity_jitter: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if not self.density > 0:
            raise InvalidImageError(f"density must be > 0, got {self.density}")
        if self.length_px < 2:
            raise InvalidImageError(f"length_px must be >= 2, got {self.length_px}")
        if not 0 < self.intensity <= 1:
            raise InvalidImageError(f"intensity must be in (0, 1], got {self.intensity}")
        if self.width_px < 1:
            raise InvalidImageError(f"width_px must be >= 1, got {self.width_px}")
        if not (0 <= self.length_jitter < 1 and 0 <= self.intensity_jitter < 1):
            raise InvalidImageError("jitters must be in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RainSpec":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


@dataclass(frozen=True)
class RainPair:
    """Clean image, rain layer and their composite, all in [0, 1]."""

    clean: np.ndarray
    rain_layer: np.ndarray
    rainy: np.ndarray
    spec: RainSpec
    blend: str = "screen"


def synth_rain_layer(height: int, width: int, spec: RainSpec) -> np.ndarray:
    """Generate one rain layer.

    Seed count is Poisson(density * h * w / 1000); each seed becomes a
    capsule at ``spec.angle_degrees`` with jittered length and intensity
    and a Gaussian cross profile of sigma = width/2.  Overlaps accumulate
    and the result is clamped to [0, 1].
    """
    if height < 2 or width < 2:
        raise InvalidImageError("layer must be at least 2x2")
    rng = np.random.default_rng(spec.seed)
    count = rng.poisson(spec.density * height * width / 1000.0)

    layer = np.zeros((height, width))
    theta = np.deg2rad(spec.angle_degrees)
    direction = np.array([np.cos(theta), np.sin(theta)])  # (d_row, d_col)
    sigma = spec.width_px / 2.0
    margin = 3.0 * sigma + 1.0

    for _ in range(count):
        center = rng.random(2) * (height, width)
        length = spec.length_px * (1.0 + spec.length_jitter * rng.uniform(-1, 1))
        amp = spec.intensity * (1.0 + spec.intensity_jitter * rng.uniform(-1, 1))
        half = 0.5 * length * direction
        p0, p1 = center - half, center + half

        r_lo = max(int(np.floor(min(p0[0], p1[0]) - margin)), 0)
        r_hi = min(int(np.ceil(max(p0[0], p1[0]) + margin)) + 1, height)
        c_lo = max(int(np.floor(min(p0[1], p1[1]) - margin)), 0)
        c_hi = min(int(np.ceil(max(p0[1], p1[1]) + margin)) + 1, width)
        if r_lo >= r_hi or c_lo >= c_hi:
            continue

        rows = np.arange(r_lo, r_hi)[:, None]
        cols = np.arange(c_lo, c_hi)[None, :]
        # perpendicular distance to the segment, capped at the endpoints
        vr, vc = p1 - p0
        seg_sq = vr * vr + vc * vc
        t = ((rows - p0[0]) * vr + (cols - p0[1]) * vc) / seg_sq
        t = np.clip(t, 0.0, 1.0)
        dr = rows - (p0[0] + t * vr)
        dc = cols - (p0[1] + t * vc)
        dist_sq = dr * dr + dc * dc
        layer[r_lo:r_hi, c_lo:c_hi] += amp * np.exp(-dist_sq / (2.0 * sigma * sigma))

    return np.clip(layer, 0.0, 1.0)


def screen_blend(clean, rain) -> np.ndarray:
    """out = 1 - (1 - clean) * (1 - rain), elementwise."""
    clean = as_grid(clean)
    rain = as_grid(rain)
    if clean.shape != rain.shape:
        raise InvalidImageError(
            f"shape mismatch: clean {clean.shape} vs rain {rain.shape}"
        )
    if clean.min() < 0 or clean.max() > 1 or rain.min() < 0 or rain.max() > 1:
        raise InvalidImageError("screen blend inputs must lie in [0, 1]")
    return 1.0 - (1.0 - clean) * (1.0 - rain)


def additive_blend(clean, rain) -> tuple[np.ndarray, np.ndarray]:
    """Additive composite clipped to [0, 1].

    Returns (rainy, effective_rain) where effective_rain = rainy - clean,
    so the additive decomposition holds exactly even where clipping bit.
    """
    clean = as_grid(clean)
    rain = as_grid(rain)
    if clean.shape != rain.shape:
        raise InvalidImageError(
            f"shape mismatch: clean {clean.shape} vs rain {rain.shape}"
        )
    rainy = np.clip(clean + rain, 0.0, 1.0)
    return rainy, rainy - clean


def make_pair(clean, spec: RainSpec, blend: str = "screen") -> RainPair:
    """Compose a clean image with a freshly generated rain layer."""
    clean = as_grid(clean)
    if blend not in BLEND_MODES:
        raise InvalidImageError(f"blend must be one of {BLEND_MODES}, got {blend!r}")
    layer = synth_rain_layer(clean.shape[0], clean.shape[1], spec)
    if blend == "screen":
        rainy = screen_blend(clean, layer)
        return RainPair(clean=clean, rain_layer=layer, rainy=rainy, spec=spec,
                        blend=blend)
    rainy, effective = additive_blend(clean, layer)
    return RainPair(clean=clean, rain_layer=effective, rainy=rainy, spec=spec,
                    blend=blend)
