"""Rain/image decomposition by nested alternating-direction splitting.

The decomposition minimizes, in the rectified frame ``Y_r`` (streaks
vertical),

    1/2 ||X + R - Y_r||_F^2
      + tau * (||D_along X||_1 + ||D_across X||_1)
      + lambda_along * ||D_along R||_1
      + lambda_across * ||D_across Y_r - D_across R||_1

where ``D_along``/``D_across`` are circulant forward differences.  The
clean layer carries an axis-relaxed isotropic TV prior; the rain layer is
forced smooth along the streaks while reproducing the observation's
across-streak gradients.  Both subproblems split their L1 terms onto
auxiliary planes solved by soft shrinkage, with the coupled quadratic
solved in closed form through the 2-D FFT (the operators are circulant,
so the normal equations diagonalize).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy import fft as spfft

from . import image
from .angle import AngleEstimate, estimate_angle, is_low_confidence
from .errors import InvalidImageError, NoSignalError, NumericError

# Largest tolerated imaginary residue after the inverse FFT of a solve
# whose spectrum should be real.
IMAG_RESIDUE_TOL = 1e-9


@dataclass(frozen=True)
class UdgParams:
    """Solver weights and schedules.

    ``tau`` weighs the clean layer's TV prior, ``lambda_along`` the rain
    layer's along-streak sparsity, ``lambda_across`` its across-streak
    gradient fidelity.  ``alpha0``/``beta0`` are the initial penalties of
    the along/across splitting constraints; both grow geometrically by
    ``rho`` every inner sweep.
    """

    tau: float = 0.002
    lambda_along: float = 0.15
    lambda_across: float = 0.05
    alpha0: float = 3.0
    beta0: float = 0.75
    rho: float = 1.05
    inner_iters: int = 10
    outer_iters: int = 10
    tol: float = 1e-4

    def __post_init__(self):
        positive = {
            "tau": self.tau,
            "lambda_along": self.lambda_along,
            "lambda_across": self.lambda_across,
            "alpha0": self.alpha0,
            "beta0": self.beta0,
            "tol": self.tol,
        }
        for name, value in positive.items():
            if not value > 0:
                raise InvalidImageError(f"UdgParams.{name} must be > 0, got {value}")
        if not self.rho > 1:
            raise InvalidImageError(f"UdgParams.rho must be > 1, got {self.rho}")
        if self.inner_iters < 1 or self.outer_iters < 1:
            raise InvalidImageError("iteration caps must be >= 1")


@dataclass
class AdmmState:
    """State of the rain-layer splitting after ``k`` inner sweeps."""

    R: np.ndarray
    P_along: np.ndarray
    P_across: np.ndarray
    J_along: np.ndarray
    J_across: np.ndarray
    alpha: float
    beta: float
    k: int = 0


@dataclass
class DecompositionResult:
    """Outcome of :func:`derain`.

    ``clean``/``rain`` live in the input frame; ``clean_rotated`` and
    ``rain_rotated`` in the rectified frame where ``clean_rotated +
    rain_rotated`` reproduces the rotated observation.  The objective
    trace holds the energy before iterating and after each outer
    iteration.
    """

    clean: np.ndarray
    rain: np.ndarray
    clean_rotated: np.ndarray
    rain_rotated: np.ndarray
    angle: AngleEstimate
    angle_source: str
    objective_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iters_used: int = 0
    converged: bool = False
    low_confidence_angle: bool = False


@lru_cache(maxsize=32)
def _otf_mag_sq(shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """|F(D_along)|^2 and |F(D_across)|^2 for one grid shape.

    Built literally from the operators' impulse responses so the spectra
    stay in lockstep with :func:`image.grad_forward`.
    """
    h, w = shape
    g_along = np.zeros(shape)
    g_along[0, 0] = -1.0
    g_along[h - 1, 0] = 1.0
    g_across = np.zeros(shape)
    g_across[0, 0] = -1.0
    g_across[0, w - 1] = 1.0
    mag_along = np.abs(spfft.fft2(g_along)) ** 2
    mag_across = np.abs(spfft.fft2(g_across)) ** 2
    return mag_along, mag_across


def _fft_quadratic_solve(rhs, weight_along, weight_across, iteration):
    """Solve (I + wa*Da'Da + wc*Dc'Dc) out = rhs for circulant Da, Dc."""
    mag_along, mag_across = _otf_mag_sq(rhs.shape)
    denom = 1.0 + weight_along * mag_along + weight_across * mag_across
    spectrum = spfft.fft2(rhs) / denom
    out = spfft.ifft2(spectrum)
    imag = float(np.abs(out.imag).max())
    if imag > IMAG_RESIDUE_TOL:
        raise NumericError(
            f"FFT solve left imaginary residue {imag:.3e}", iteration=iteration
        )
    out = out.real
    if not np.isfinite(out).all():
        raise NumericError("FFT solve produced non-finite values", iteration=iteration)
    return out


def shrink(values, threshold):
    """Soft shrinkage sign(v) * max(|v| - threshold, 0); zero stays zero."""
    values = np.asarray(values, dtype=np.float64)
    return np.sign(values) * np.maximum(np.abs(values) - threshold, 0.0)


def energy(X, R, Y_r, params: UdgParams) -> float:
    """Objective value for one (X, R) decomposition of ``Y_r``."""
    X = image.as_grid(X, min_side=8)
    R = image.as_grid(R, min_side=8)
    Y_r = image.as_grid(Y_r, min_side=8)
    if X.shape != Y_r.shape or R.shape != Y_r.shape:
        raise InvalidImageError(
            f"shape mismatch: X {X.shape}, R {R.shape}, Y_r {Y_r.shape}"
        )
    fidelity = 0.5 * float(np.sum((X + R - Y_r) ** 2))
    tv_x = float(
        np.abs(image.grad_forward(X, "along")).sum()
        + np.abs(image.grad_forward(X, "across")).sum()
    )
    rain_along = float(np.abs(image.grad_forward(R, "along")).sum())
    rain_across = float(
        np.abs(
            image.grad_forward(Y_r, "across") - image.grad_forward(R, "across")
        ).sum()
    )
    return (
        fidelity
        + params.tau * tv_x
        + params.lambda_along * rain_along
        + params.lambda_across * rain_across
    )


def init_rain_state(R0, Y_r, params: UdgParams) -> AdmmState:
    """Fresh splitting state around the current rain iterate.

    Auxiliary planes start at the shrinkage of their targets and the
    multipliers at zero, so the first sweep is already consistent with
    the update order solve -> shrink -> dual step.
    """
    R0 = np.asarray(R0, dtype=np.float64)
    d_along = image.grad_forward(R0, "along")
    d_across = image.grad_forward(R0, "across") - image.grad_forward(Y_r, "across")
    return AdmmState(
        R=R0.copy(),
        P_along=shrink(d_along, params.lambda_along / params.alpha0),
        P_across=shrink(d_across, params.lambda_across / params.beta0),
        J_along=np.zeros_like(R0),
        J_across=np.zeros_like(R0),
        alpha=params.alpha0,
        beta=params.beta0,
        k=0,
    )


def update_R(X, Y_r, state: AdmmState, params: UdgParams) -> AdmmState:
    """One inner sweep of the rain-layer splitting.

    (a) closed-form solve of the coupled quadratic via FFT, (b) soft
    shrinkage of both auxiliary planes, (c) multiplier and penalty step.
    """
    X = image.as_grid(X, min_side=8)
    Y_r = image.as_grid(Y_r, min_side=8)
    if state.R.shape != Y_r.shape or X.shape != Y_r.shape:
        raise InvalidImageError("state/image shape mismatch in update_R")
    if state.alpha <= 0 or state.beta <= 0:
        raise InvalidImageError("penalties must be positive")

    alpha, beta = state.alpha, state.beta
    dY_across = image.grad_forward(Y_r, "across")

    rhs = (
        (Y_r - X)
        + image.grad_adjoint(alpha * state.P_along - state.J_along, "along")
        + image.grad_adjoint(
            beta * state.P_across + beta * dY_across - state.J_across, "across"
        )
    )
    R = _fft_quadratic_solve(rhs, alpha, beta, iteration=state.k)

    dR_along = image.grad_forward(R, "along")
    dR_across = image.grad_forward(R, "across")
    P_along = shrink(dR_along + state.J_along / alpha, params.lambda_along / alpha)
    P_across = shrink(
        dR_across - dY_across + state.J_across / beta,
        params.lambda_across / beta,
    )

    J_along = state.J_along + alpha * (dR_along - P_along)
    J_across = state.J_across + beta * (dR_across - dY_across - P_across)

    for name, plane in (("P_along", P_along), ("P_across", P_across),
                        ("J_along", J_along), ("J_across", J_across)):
        if not np.isfinite(plane).all():
            raise NumericError(f"{name} became non-finite", iteration=state.k)

    return AdmmState(
        R=R,
        P_along=P_along,
        P_across=P_across,
        J_along=J_along,
        J_across=J_across,
        alpha=alpha * params.rho,
        beta=beta * params.rho,
        k=state.k + 1,
    )


def solve_rain(X, Y_r, R0, params: UdgParams) -> np.ndarray:
    """Run ``inner_iters`` sweeps of the rain subproblem from ``R0``."""
    state = init_rain_state(R0, Y_r, params)
    for _ in range(params.inner_iters):
        state = update_R(X, Y_r, state, params)
    return state.R


def update_X(R, Y_r, params: UdgParams, inner_iters: int | None = None) -> np.ndarray:
    """Solve the clean-layer subproblem

        min_X 1/2 ||X + R - Y_r||^2 + tau * ||grad X||_1

    with the same splitting recipe as the rain update: auxiliary gradient
    planes, FFT closed-form solve, soft shrinkage at tau/penalty, dual and
    penalty steps, for ``inner_iters`` sweeps.
    """
    R = image.as_grid(R, min_side=8)
    Y_r = image.as_grid(Y_r, min_side=8)
    if R.shape != Y_r.shape:
        raise InvalidImageError("shape mismatch in update_X")
    sweeps = params.inner_iters if inner_iters is None else inner_iters

    B = Y_r - R
    X = B.copy()
    gamma_along, gamma_across = params.alpha0, params.beta0
    Q_along = shrink(image.grad_forward(X, "along"), params.tau / gamma_along)
    Q_across = shrink(image.grad_forward(X, "across"), params.tau / gamma_across)
    K_along = np.zeros_like(X)
    K_across = np.zeros_like(X)

    for k in range(sweeps):
        rhs = (
            B
            + image.grad_adjoint(gamma_along * Q_along - K_along, "along")
            + image.grad_adjoint(gamma_across * Q_across - K_across, "across")
        )
        X = _fft_quadratic_solve(rhs, gamma_along, gamma_across, iteration=k)

        dX_along = image.grad_forward(X, "along")
        dX_across = image.grad_forward(X, "across")
        Q_along = shrink(dX_along + K_along / gamma_along, params.tau / gamma_along)
        Q_across = shrink(
            dX_across + K_across / gamma_across, params.tau / gamma_across
        )
        K_along = K_along + gamma_along * (dX_along - Q_along)
        K_across = K_across + gamma_across * (dX_across - Q_across)
        if not (np.isfinite(K_along).all() and np.isfinite(K_across).all()):
            raise NumericError("multipliers became non-finite", iteration=k)
        gamma_along *= params.rho
        gamma_across *= params.rho

    return X


def derain(
    Y,
    params: UdgParams | None = None,
    angle: float | AngleEstimate | None = None,
    fill_policy: str = "reflect",
) -> DecompositionResult:
    """Full pipeline: rectify, decompose, un-rotate.

    The streak angle is estimated unless supplied.  A flat image (no
    gradient signal) falls back to zero rotation with a warning flag
    rather than failing.
    """
    Y = image.as_grid(Y, min_side=32)
    params = params or UdgParams()

    angle_source = "user"
    low_conf = False
    if angle is None:
        try:
            est = estimate_angle(Y)
            angle_source = "estimated"
            low_conf = is_low_confidence(est)
        except NoSignalError:
            est = AngleEstimate(angle_degrees=0.0, confidence=1.0)
            angle_source = "fallback_flat"
            low_conf = True
    elif isinstance(angle, AngleEstimate):
        est = angle
    else:
        est = AngleEstimate(
            angle_degrees=image.canonical_angle(float(angle)), confidence=1.0
        )

    spec = image.RotationSpec(est.angle_degrees, fill_policy=fill_policy)
    Y_r = image.rotate(Y, spec)

    X = Y_r.copy()
    R = np.zeros_like(Y_r)
    trace = [energy(X, R, Y_r, params)]
    iters = 0
    converged = False
    for _ in range(params.outer_iters):
        # Monotone safeguard: the subproblems are solved inexactly, so an
        # outer step is accepted only if it does not raise the objective;
        # otherwise the inner accuracy is exhausted and we stop on the
        # previous iterate.  On an already-clean input the first step can
        # only lose, so the safeguard returns the input unchanged.
        R_new = solve_rain(X, Y_r, R, params)
        X_new = update_X(R_new, Y_r, params)
        e_new = energy(X_new, R_new, Y_r, params)
        prev = trace[-1]
        if e_new > prev * (1.0 + 1e-12) + 1e-12:
            converged = True
            break
        R, X = R_new, X_new
        trace.append(e_new)
        iters += 1
        if abs(prev - e_new) <= params.tol * max(abs(prev), 1e-12):
            converged = True
            break

    back = image.RotationSpec(-est.angle_degrees, fill_policy=fill_policy)
    # The clean layer reported in the input frame is Y minus the
    # un-rotated rain layer: rain is sparse and smooth along its length,
    # so it survives resampling, while reconstructing from the rotated X
    # would put every pixel through two interpolations.
    rain_back = image.rotate(R, back)
    return DecompositionResult(
        clean=Y - rain_back,
        rain=rain_back,
        clean_rotated=X,
        rain_rotated=R,
        angle=est,
        angle_source=angle_source,
        objective_trace=np.asarray(trace),
        iters_used=iters,
        converged=converged,
        low_confidence_angle=low_conf,
    )


def derain_planes(
    img,
    params: UdgParams | None = None,
    angle: float | AngleEstimate | None = None,
) -> tuple[np.ndarray, np.ndarray, DecompositionResult]:
    """Derain a gray or RGB image, per channel, with one shared angle.

    The angle is estimated once on luma; channel geometry is identical so
    re-estimating per channel would only add noise.  Returns (clean, rain,
    last-channel result) with clean/rain shaped like the input.
    """
    arr = np.asarray(img, dtype=np.float64)
    planes = image.split_channels(arr)
    if angle is None and len(planes) == 3:
        luma = image.to_luma(arr)
        try:
            angle = estimate_angle(luma)
        except NoSignalError:
            angle = None
    clean_planes, rain_planes = [], []
    result = None
    for plane in planes:
        result = derain(plane, params=params, angle=angle)
        if angle is None:
            angle = result.angle  # reuse the first estimate for the rest
        clean_planes.append(result.clean)
        rain_planes.append(result.rain)
    return (
        image.merge_channels(clean_planes),
        image.merge_channels(rain_planes),
        result,
    )


def with_ratio(params: UdgParams, ratio: float) -> UdgParams:
    """Copy of ``params`` with lambda_along = ratio * lambda_across."""
    if ratio <= 0:
        raise InvalidImageError("ratio must be > 0")
    return replace(params, lambda_along=ratio * params.lambda_across)
