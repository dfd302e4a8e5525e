"""Image grids, forward-difference operators, rotation and PNG I/O.

Images are plain 2-D float64 numpy arrays ("grids") with intensities
nominally in [0, 1].  Intermediate layers produced by the solver may be
signed; values are clamped to [0, 1] only when writing files.

Axis naming follows the streak geometry rather than matrix axes:

* ``along``  - the streak direction, vertical (rows) once rectified;
* ``across`` - perpendicular to the streaks, horizontal (columns).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np
from scipy import ndimage

from .errors import ImageIOError, InvalidImageError

AXES = ("along", "across")
BOUNDARIES = ("periodic", "replicate")
FILL_POLICIES = {"reflect": "reflect", "edge": "nearest", "constant": "constant"}

# Rec.601 luma weights, used whenever a single plane is needed from RGB.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def as_grid(values, min_side: int = 2) -> np.ndarray:
    """Validate and return a 2-D float64 grid.

    Parameters
    ----------
    values : array_like
        2-D scalar field.
    min_side : int
        Minimum allowed extent of both dimensions.

    Raises
    ------
    InvalidImageError
        If the array is not 2-D, contains non-finite entries, or is
        smaller than ``min_side`` in either dimension.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidImageError(f"expected a 2-D grid, got shape {arr.shape}")
    if arr.shape[0] < min_side or arr.shape[1] < min_side:
        raise InvalidImageError(
            f"grid {arr.shape} smaller than minimum side {min_side}"
        )
    if not np.isfinite(arr).all():
        raise InvalidImageError("grid contains NaN or Inf")
    return arr


def _axis_index(axis: str) -> int:
    if axis not in AXES:
        raise InvalidImageError(f"axis must be one of {AXES}, got {axis!r}")
    return 0 if axis == "along" else 1


def grad_forward(img, axis: str, boundary: str = "periodic") -> np.ndarray:
    """First-order forward difference ``out[i] = img[i+1] - img[i]``.

    With ``periodic`` boundary the last entry wraps around, which makes
    the operator circulant (required by the FFT solver); ``replicate``
    repeats the edge sample, so the last difference is zero.
    """
    img = as_grid(img)
    ax = _axis_index(axis)
    if boundary == "periodic":
        return np.roll(img, -1, axis=ax) - img
    if boundary == "replicate":
        out = np.zeros_like(img)
        sl_lo = [slice(None)] * 2
        sl_hi = [slice(None)] * 2
        sl_lo[ax] = slice(0, -1)
        sl_hi[ax] = slice(1, None)
        out[tuple(sl_lo)] = img[tuple(sl_hi)] - img[tuple(sl_lo)]
        return out
    raise InvalidImageError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")


def grad_adjoint(img, axis: str, boundary: str = "periodic") -> np.ndarray:
    """Exact adjoint of :func:`grad_forward` under the Frobenius inner
    product: the negative backward difference ``out[i] = img[i-1] - img[i]``
    with periodic wrap.  Only the periodic boundary has a circulant
    adjoint; anything else is rejected.
    """
    img = as_grid(img)
    ax = _axis_index(axis)
    if boundary != "periodic":
        raise InvalidImageError("grad_adjoint is defined for the periodic boundary")
    return np.roll(img, 1, axis=ax) - img


@dataclass(frozen=True)
class GradientPair:
    """Derivatives of one grid along and across the streak direction."""

    d_along: np.ndarray
    d_across: np.ndarray


def grad_pair(img, boundary: str = "periodic") -> GradientPair:
    return GradientPair(
        d_along=grad_forward(img, "along", boundary),
        d_across=grad_forward(img, "across", boundary),
    )


def directional_energy(img, boundary: str = "replicate") -> tuple[float, float]:
    """Total absolute derivative mass (along_sum, across_sum)."""
    img = as_grid(img)
    along = float(np.abs(grad_forward(img, "along", boundary)).sum())
    across = float(np.abs(grad_forward(img, "across", boundary)).sum())
    return along, across


def canonical_angle(angle_degrees: float) -> float:
    """Fold an angle into the canonical streak-orientation range (-90, 90]."""
    a = float(angle_degrees) % 180.0
    if a > 90.0:
        a -= 180.0
    return a


@dataclass(frozen=True)
class RotationSpec:
    """Rotation that rectifies streaks slanted at ``angle_degrees`` to vertical.

    The streak angle is measured from the vertical (column) axis: a streak
    whose direction vector is ``(d_row, d_col) = (cos a, sin a)`` has angle
    ``a``.  ``rotate(img, RotationSpec(a))`` maps that direction onto the
    vertical axis, and ``RotationSpec(-a)`` inverts the operation up to
    interpolation error.
    """

    angle_degrees: float
    interpolation: str = "bilinear"
    fill_policy: str = "reflect"

    def __post_init__(self):
        if abs(self.angle_degrees) > 90.0 + 1e-9:
            raise InvalidImageError(
                f"|angle| must be <= 90 degrees, got {self.angle_degrees}"
            )
        if self.interpolation != "bilinear":
            raise InvalidImageError("only bilinear interpolation is supported")
        if self.fill_policy not in FILL_POLICIES:
            raise InvalidImageError(
                f"fill_policy must be one of {sorted(FILL_POLICIES)}"
            )


def rotate(img, spec) -> np.ndarray:
    """Rotate about the image center with same-size output.

    ``spec`` may be a :class:`RotationSpec` or a bare angle in degrees.
    Out-of-frame samples are produced per the fill policy (reflect by
    default, so no artificial dark borders appear).  A zero angle is an
    exact identity.
    """
    if not isinstance(spec, RotationSpec):
        spec = RotationSpec(angle_degrees=float(spec))
    img = as_grid(img)
    if spec.angle_degrees == 0.0:
        return img.copy()
    # scipy rotates content counterclockwise in (row, col) coordinates;
    # mapping the direction (cos a, sin a) onto vertical needs -a.
    return ndimage.rotate(
        img,
        -spec.angle_degrees,
        reshape=False,
        order=1,
        mode=FILL_POLICIES[spec.fill_policy],
        prefilter=False,
    )


def central_crop(img, fraction: float = 0.7) -> np.ndarray:
    """Central crop retaining ``fraction`` of each dimension."""
    img = as_grid(img)
    h, w = img.shape
    ch, cw = max(1, int(round(h * fraction))), max(1, int(round(w * fraction)))
    r0 = (h - ch) // 2
    c0 = (w - cw) // 2
    return img[r0 : r0 + ch, c0 : c0 + cw]


def to_luma(rgb: np.ndarray) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise InvalidImageError(f"expected an (h, w, 3) RGB array, got {rgb.shape}")
    wr, wg, wb = LUMA_WEIGHTS
    return wr * rgb[:, :, 0] + wg * rgb[:, :, 1] + wb * rgb[:, :, 2]


def split_channels(img: np.ndarray) -> list[np.ndarray]:
    """Per-channel planes of a gray or RGB image."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return [img]
    if img.ndim == 3 and img.shape[2] == 3:
        return [img[:, :, c] for c in range(3)]
    raise InvalidImageError(f"expected gray or RGB image, got shape {img.shape}")


def merge_channels(planes: list[np.ndarray]) -> np.ndarray:
    if len(planes) == 1:
        return planes[0]
    if len(planes) == 3:
        return np.stack(planes, axis=2)
    raise InvalidImageError(f"expected 1 or 3 planes, got {len(planes)}")


def load_image(path) -> np.ndarray:
    """Read an 8- or 16-bit PNG as float64 scaled to [0, 1].

    Grayscale files become an (h, w) grid; RGB files an (h, w, 3) array
    in RGB channel order.  Anything unreadable raises
    :class:`ImageIOError` carrying the path.
    """
    path = Path(path)
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise ImageIOError(f"cannot read image file: {path}")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise ImageIOError(f"unsupported bit depth {raw.dtype} in {path}")
    arr = raw.astype(np.float64) / scale
    if arr.ndim == 2:
        return arr
    if arr.ndim == 3 and arr.shape[2] == 3:
        return arr[:, :, ::-1].copy()  # BGR on disk -> RGB
    if arr.ndim == 3 and arr.shape[2] == 4:
        return arr[:, :, 2::-1].copy()  # drop alpha
    raise ImageIOError(f"unsupported channel layout {raw.shape} in {path}")


def save_image(img, path, bit_depth: int = 8) -> None:
    """Write a gray or RGB image as PNG, clamping to [0, 1] first."""
    path = Path(path)
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim not in (2, 3):
        raise InvalidImageError(f"cannot save array of shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidImageError("refusing to save non-finite image")
    arr = np.clip(arr, 0.0, 1.0)
    if bit_depth == 8:
        quant = np.rint(arr * 255.0).astype(np.uint8)
    elif bit_depth == 16:
        quant = np.rint(arr * 65535.0).astype(np.uint16)
    else:
        raise ImageIOError(f"unsupported bit depth {bit_depth}")
    if quant.ndim == 3:
        quant = quant[:, :, ::-1]  # RGB -> BGR for the encoder
    path.parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(str(path), quant):
        raise ImageIOError(f"cannot write image file: {path}")
