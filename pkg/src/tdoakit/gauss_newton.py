"""Iterative nonlinear least-squares position estimation.

Minimizes the squared mismatch between predicted and measured pairwise
range differences with plain Gauss-Newton steps: the step solves
J * delta = -r in the least-squares sense, the Hessian's second-order term
being dropped. No damping or line search is applied; non-convergence is
reported, not patched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, NearAnchorError
from .geometry import (
    RANK_RTOL,
    AnchorSet,
    Point,
    TdoaVector,
    pair_indices,
)

__all__ = [
    "GaussNewtonConfig",
    "SolveReport",
    "residual",
    "jacobian",
    "gauss_newton_step",
    "locate_gauss_newton",
    "default_initial_guess",
]


@dataclass(frozen=True)
class GaussNewtonConfig:
    """Loop control for the iterative solver.

    ``initial_guess`` of None starts from the anchor centroid, which always
    lies inside the region surrounded by the anchors. ``tolerance`` stops
    the loop once the Euclidean step norm falls below it.
    ``min_anchor_distance`` guards the unit-vector division near anchors.
    """

    initial_guess: Point | None = None
    tolerance: float = 1e-9
    max_iterations: int = 100
    min_anchor_distance: float = 1e-9

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.min_anchor_distance < 0:
            raise ValueError("min_anchor_distance must be >= 0")


@dataclass(frozen=True)
class SolveReport:
    estimate: Point
    iterations: int
    final_step_norm: float
    final_residual_norm: float
    converged: bool
    jacobian_sigma_min: float


def _distances_guarded(p_xy: np.ndarray, anchors: AnchorSet, guard: float) -> np.ndarray:
    diff = p_xy[None, :] - anchors.xy
    d = np.hypot(diff[:, 0], diff[:, 1])
    if (d <= guard).any():
        i = int(np.argmin(d))
        raise NearAnchorError(
            f"evaluation point within {guard:g} m of anchor {i} (distance {d[i]:.3e} m)"
        )
    return d


def residual(
    p: Point,
    anchors: AnchorSet,
    dhat: TdoaVector,
    min_anchor_distance: float = 1e-9,
) -> np.ndarray:
    """Predicted-minus-measured range differences at p, canonical pair order."""
    if dhat.n != anchors.n:
        raise ValueError(f"measurement is for {dhat.n} anchors, layout has {anchors.n}")
    d = _distances_guarded(p.as_array(), anchors, min_anchor_distance)
    pairs = pair_indices(anchors.n)
    return (d[pairs[:, 0]] - d[pairs[:, 1]]) - dhat.values


def jacobian(
    p: Point,
    anchors: AnchorSet,
    min_anchor_distance: float = 1e-9,
) -> np.ndarray:
    """Derivative of the pairwise range differences w.r.t. the position.

    Row for pair (i, j) is u_i - u_j where u_i is the unit vector from
    anchor i toward p; shape (C(n,2), 2).
    """
    p_xy = p.as_array()
    d = _distances_guarded(p_xy, anchors, min_anchor_distance)
    u = (p_xy[None, :] - anchors.xy) / d[:, None]
    pairs = pair_indices(anchors.n)
    return u[pairs[:, 0]] - u[pairs[:, 1]]


def default_initial_guess(anchors: AnchorSet, guard: float = 1e-9) -> Point:
    """Anchor centroid, nudged along the hull when it sits on an anchor.

    The centroid always lies in the region surrounded by the anchors, which
    is where the iteration is well behaved; layouts with a central station
    can place it exactly on that station, so in that case the guess is moved
    toward the farthest anchor until it clears the guard radius.
    """
    c = anchors.centroid().as_array()
    d = np.hypot(*(c[None, :] - anchors.xy).T)
    if d.min() > guard:
        return Point(float(c[0]), float(c[1]))
    far = anchors.xy[int(np.argmax(d))]
    for t in (0.5, 0.25, 0.125, 0.0625, 0.03125):
        cand = c + t * (far - c)
        dc = np.hypot(*(cand[None, :] - anchors.xy).T)
        if dc.min() > guard:
            return Point(float(cand[0]), float(cand[1]))
    raise NearAnchorError("could not find an initial guess clear of all anchors")


@dataclass(frozen=True)
class StepDiagnostics:
    jacobian_sigma_min: float
    residual_norm: float


def gauss_newton_step(
    p: Point,
    anchors: AnchorSet,
    dhat: TdoaVector,
    min_anchor_distance: float = 1e-9,
) -> tuple[np.ndarray, StepDiagnostics]:
    """One least-squares step: solve J * delta = -r at p.

    Raises DegenerateGeometryError (carrying sigma_min) when the Jacobian is
    rank deficient, e.g. for collinear anchors seen from a point on their
    line.
    """
    r = residual(p, anchors, dhat, min_anchor_distance)
    j = jacobian(p, anchors, min_anchor_distance)
    sv = np.linalg.svd(j, compute_uv=False)
    smin, smax = float(sv[-1]), float(sv[0])
    if smax == 0.0 or smin < RANK_RTOL * smax:
        raise DegenerateGeometryError(
            f"rank-deficient Jacobian: sigma_min={smin:.3e}", sigma_min=smin
        )
    delta, *_ = np.linalg.lstsq(j, -r, rcond=None)
    return delta, StepDiagnostics(jacobian_sigma_min=smin, residual_norm=float(np.linalg.norm(r)))


def locate_gauss_newton(
    anchors: AnchorSet,
    dhat: TdoaVector,
    config: GaussNewtonConfig | None = None,
) -> SolveReport:
    """Iterate Gauss-Newton steps until the step norm drops below tolerance.

    Non-convergence within max_iterations is reported via the ``converged``
    flag, never raised. Degenerate geometry at any iterate does raise.
    """
    cfg = config or GaussNewtonConfig()
    if cfg.initial_guess is not None:
        p = cfg.initial_guess
    else:
        p = default_initial_guess(anchors, cfg.min_anchor_distance)
    xy = p.as_array()

    step_norm = math.inf
    smin = 0.0
    rnorm = math.inf
    iters = 0
    for iters in range(1, cfg.max_iterations + 1):
        delta, diag = gauss_newton_step(
            Point(float(xy[0]), float(xy[1])), anchors, dhat, cfg.min_anchor_distance
        )
        xy = xy + delta
        step_norm = float(np.linalg.norm(delta))
        smin = diag.jacobian_sigma_min
        rnorm = diag.residual_norm
        if step_norm <= cfg.tolerance:
            break

    estimate = Point(float(xy[0]), float(xy[1]))
    return SolveReport(
        estimate=estimate,
        iterations=iters,
        final_step_norm=step_norm,
        final_residual_norm=rnorm,
        converged=step_norm <= cfg.tolerance,
        jacobian_sigma_min=smin,
    )
