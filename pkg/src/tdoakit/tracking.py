"""Kalman tracking of a moving tag over range-difference measurements.

State is position only, with an identity transition and random-walk
process noise Q = q q^T, q being the expected per-step movement in each
dimension. Two correction models are provided:

- an (iterated) extended filter whose measurement function is the pairwise
  range-difference model, linearized through its Jacobian;
- a linear-system filter that uses the closed-form estimator's (M, f) as
  measurement matrix and observation.

Caveat of the second model, reproduced as designed: M is built from the
current measurement, so the observation matrix itself carries measurement
noise, which violates the textbook filter assumptions. It behaves well in
the geometries the linear estimator is suited to and degrades sharply
outside them.

A tracker instance's state is a value (replaced, never mutated); one
target per tracker, updates applied sequentially.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import NearAnchorError, SingularSystemError, TdoaError
from .gauss_newton import GaussNewtonConfig, jacobian, locate_gauss_newton
from .geometry import RANK_RTOL, AnchorSet, Point, TdoaVector, anchor_distances, pair_indices
from .linear import build_system_central, build_system_symmetric, locate_linear

__all__ = [
    "TrackerState",
    "TrackFix",
    "Trajectory",
    "TrackerConfig",
    "kf_predict",
    "ekf_update",
    "kf_update_linear",
    "track",
]


@dataclass(frozen=True)
class TrackerState:
    """Position estimate with covariance and the filter's noise settings.

    ``q_mode`` picks the process-noise structure built from q: "outer" is
    the rank-one random walk Q = q q^T; "diagonal" treats the dimensions as
    independent, Q = diag(q^2). The rank-one form is the reference model
    but cannot follow motion orthogonal to q indefinitely; the diagonal
    reading exists for exactly that case.
    """

    x: np.ndarray  # (2,) metres
    p_cov: np.ndarray  # (2, 2) m^2
    q: np.ndarray  # (2,) expected per-step movement, metres
    r2: float  # measurement variance, m^2
    q_mode: str = "outer"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(2)
        p = np.asarray(self.p_cov, dtype=float).reshape(2, 2)
        q = np.asarray(self.q, dtype=float).reshape(2)
        scale = max(1.0, float(np.abs(p).max()))
        if not np.allclose(p, p.T, atol=1e-9 * scale):
            raise ValueError("covariance must be symmetric")
        if np.linalg.eigvalsh((p + p.T) / 2).min() < -1e-9 * scale:
            raise ValueError("covariance must be positive semidefinite")
        if (q < 0).any():
            raise ValueError("process step scale must be >= 0")
        if self.r2 <= 0:
            raise ValueError("measurement variance must be > 0")
        if self.q_mode not in ("outer", "diagonal"):
            raise ValueError(f"unknown q_mode {self.q_mode!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p_cov", (p + p.T) / 2)
        object.__setattr__(self, "q", q)

    @property
    def estimate(self) -> Point:
        return Point(float(self.x[0]), float(self.x[1]))


@dataclass(frozen=True)
class TrackFix:
    """One filtered position with its quality diagnostics.

    ``quality`` is the smallest singular value of the measurement matrix
    used in the correction; 0.0 flags a step where the correction was
    skipped (singular system / anchor coincidence) and the fix is
    prediction-only.
    """

    time_index: int
    estimate: Point
    covariance: np.ndarray
    innovation_norm: float
    quality: float


@dataclass
class Trajectory:
    fixes: list[TrackFix]

    def __post_init__(self):
        idx = [f.time_index for f in self.fixes]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("fix time indices must be strictly increasing")

    def positions(self) -> np.ndarray:
        return np.array([[f.estimate.x, f.estimate.y] for f in self.fixes])

    def to_csv(self) -> str:
        lines = ["time_index,x,y,cov_xx,cov_xy,cov_yy,innovation,quality"]
        for f in self.fixes:
            c = f.covariance
            lines.append(
                "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g"
                % (
                    f.time_index,
                    f.estimate.x,
                    f.estimate.y,
                    c[0, 0],
                    c[0, 1],
                    c[1, 1],
                    f.innovation_norm,
                    f.quality,
                )
            )
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "fixes": [
                {
                    "time_index": f.time_index,
                    "x": f.estimate.x,
                    "y": f.estimate.y,
                    "cov": [[f.covariance[0, 0], f.covariance[0, 1]],
                            [f.covariance[1, 0], f.covariance[1, 1]]],
                    "innovation_norm": f.innovation_norm,
                    "quality": f.quality,
                }
                for f in self.fixes
            ]
        }


@dataclass(frozen=True)
class TrackerConfig:
    """Filter parameters; defaults follow the reference tuning r^2 = 0.5 m^2
    and a 0.1 m expected per-step movement.

    ``process_noise`` selects how ``q_scale`` is read: "movement" treats it
    as the per-dimension expected movement q (Q = q q^T with q_i = q_scale);
    "variance" treats it as Q's diagonal (Q = q q^T with q_i =
    sqrt(q_scale)); "diagonal" keeps q_i = q_scale but builds Q = diag(q^2)
    with independent dimensions, the structure needed to follow motion not
    aligned with the (1, 1) direction.
    """

    r2: float = 0.5
    q_scale: float = 0.1
    process_noise: str = "movement"
    gn_iterations: int = 1
    mode: str = "symmetric"  # linear correction build: "symmetric" | "central"
    central: int | None = None
    init_cov: float = 10.0

    def q_vector(self) -> np.ndarray:
        if self.process_noise in ("movement", "diagonal"):
            return np.array([self.q_scale, self.q_scale])
        if self.process_noise == "variance":
            return np.array([math.sqrt(self.q_scale)] * 2)
        raise ValueError(f"unknown process_noise mode {self.process_noise!r}")

    def q_mode(self) -> str:
        return "diagonal" if self.process_noise == "diagonal" else "outer"


def kf_predict(state: TrackerState) -> TrackerState:
    """Random-walk prediction: mean unchanged, covariance grown by Q."""
    if state.q_mode == "diagonal":
        growth = np.diag(state.q**2)
    else:
        growth = np.outer(state.q, state.q)
    return replace(state, p_cov=state.p_cov + growth)


def _symmetrize(p: np.ndarray) -> np.ndarray:
    return (p + p.T) / 2


def _correct(state: TrackerState, h: np.ndarray, innovation: np.ndarray,
             x_lin: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One Kalman correction with observation matrix h, linearized at x_lin.

    ``innovation`` is z - h_fn(x_lin); the update re-expresses it around the
    prior mean, which reduces to the textbook update when x_lin == prior.
    The covariance uses the Joseph form, which stays positive semidefinite
    under round-off for any gain.
    """
    p = state.p_cov
    s = h @ p @ h.T + state.r2 * np.eye(h.shape[0])
    k = p @ h.T @ np.linalg.inv(s)
    x_new = state.x + k @ (innovation - h @ (state.x - x_lin))
    a = np.eye(2) - k @ h
    p_new = _symmetrize(a @ p @ a.T + state.r2 * (k @ k.T))
    return x_new, p_new


def _pair_differences(x: np.ndarray, anchors: AnchorSet) -> np.ndarray:
    d = anchor_distances(x, anchors.xy)
    pairs = pair_indices(anchors.n)
    return d[pairs[:, 0]] - d[pairs[:, 1]]


def ekf_update(
    state: TrackerState,
    anchors: AnchorSet,
    dhat: TdoaVector,
    gn_iterations: int = 1,
    time_index: int = 0,
) -> tuple[TrackerState, TrackFix]:
    """Correction against the nonlinear range-difference model.

    With ``gn_iterations`` > 1 the linearization point is refreshed at the
    updated mean and the correction repeated (iterated EKF); as the prior
    becomes uninformative this converges to the standalone iterative
    least-squares fix.
    """
    if gn_iterations < 1:
        raise ValueError("gn_iterations must be >= 1")
    innovation_norm = math.nan
    quality = 0.0
    x_lin = state.x
    x_new, p_new = state.x, state.p_cov
    try:
        for it in range(gn_iterations):
            h = jacobian(Point(float(x_lin[0]), float(x_lin[1])), anchors)
            predicted = _pair_differences(x_lin, anchors)
            nu = dhat.values - predicted
            if it == 0:
                innovation_norm = float(np.linalg.norm(nu))
            x_new, p_new = _correct(state, h, nu, x_lin)
            x_lin = x_new
        quality = float(np.linalg.svd(h, compute_uv=False)[-1])
    except NearAnchorError:
        # mean sits on an anchor: leave the prediction untouched, flag the fix
        x_new, p_new = state.x, state.p_cov
        innovation_norm = math.nan
        quality = 0.0
    new_state = replace(state, x=x_new, p_cov=p_new)
    fix = TrackFix(
        time_index=time_index,
        estimate=new_state.estimate,
        covariance=new_state.p_cov.copy(),
        innovation_norm=innovation_norm,
        quality=quality,
    )
    return new_state, fix


def kf_update_linear(
    state: TrackerState,
    anchors: AnchorSet,
    dhat: TdoaVector,
    mode: str = "symmetric",
    central: int | None = None,
    time_index: int = 0,
) -> tuple[TrackerState, TrackFix]:
    """Correction using the closed-form estimator's system as observation.

    H = M and z = f from the chosen construction; for the central build the
    system lives in coordinates translated to the central anchor, which the
    innovation accounts for. A singular system skips the correction and
    returns the prediction, flagged via quality 0.
    """
    if mode == "central":
        if central is None:
            raise ValueError("central mode requires a central anchor index")
        system = build_system_central(anchors, central, dhat)
        origin = system.origin.as_array()
    elif mode == "symmetric":
        system = build_system_symmetric(anchors, dhat)
        origin = np.zeros(2)
    else:
        raise ValueError(f"unknown linear mode {mode!r}")

    sv = np.linalg.svd(system.m, compute_uv=False)
    smin, smax = float(sv[-1]), float(sv[0])
    if smax == 0.0 or smin < RANK_RTOL * smax:
        fix = TrackFix(
            time_index=time_index,
            estimate=state.estimate,
            covariance=state.p_cov.copy(),
            innovation_norm=math.nan,
            quality=0.0,
        )
        return state, fix

    h = system.m
    nu = system.f - h @ (state.x - origin)
    x_new, p_new = _correct(state, h, nu, state.x)
    new_state = replace(state, x=x_new, p_cov=p_new)
    fix = TrackFix(
        time_index=time_index,
        estimate=new_state.estimate,
        covariance=new_state.p_cov.copy(),
        innovation_norm=float(np.linalg.norm(nu)),
        quality=smin,
    )
    return new_state, fix


def _initial_state(
    first: TdoaVector,
    anchors: AnchorSet,
    estimator_kind: str,
    cfg: TrackerConfig,
) -> tuple[TrackerState, float]:
    """Standalone solve of the first measurement; centroid fallback on failure."""
    quality = 0.0
    try:
        if estimator_kind == "ekf":
            report = locate_gauss_newton(anchors, first, GaussNewtonConfig())
            p0 = report.estimate
            quality = report.jacobian_sigma_min
        elif estimator_kind == "linear":
            fix = locate_linear(anchors, first, mode=cfg.mode, central=cfg.central)
            p0 = fix.point
            quality = fix.sigma_min
        else:
            raise ValueError(f"unknown estimator kind {estimator_kind!r}")
    except (SingularSystemError, NearAnchorError, TdoaError):
        p0 = anchors.centroid()
        quality = 0.0
    state = TrackerState(
        x=p0.as_array(),
        p_cov=cfg.init_cov * np.eye(2),
        q=cfg.q_vector(),
        r2=cfg.r2,
        q_mode=cfg.q_mode(),
    )
    return state, quality


def track(
    measurements,
    anchors: AnchorSet,
    estimator_kind: str = "ekf",
    config: TrackerConfig | None = None,
) -> Trajectory:
    """Run predict/correct over a measurement stream; one fix per step.

    The first measurement initializes the state from a standalone solve
    with covariance init_cov * I; subsequent ones run the filter loop.
    ``estimator_kind`` is "ekf" or "linear".
    """
    cfg = config or TrackerConfig()
    measurements = list(measurements)
    if not measurements:
        raise ValueError("measurement stream is empty")

    state, q0 = _initial_state(measurements[0], anchors, estimator_kind, cfg)
    fixes = [
        TrackFix(
            time_index=0,
            estimate=state.estimate,
            covariance=state.p_cov.copy(),
            innovation_norm=math.nan,
            quality=q0,
        )
    ]
    for t, dhat in enumerate(measurements[1:], start=1):
        state = kf_predict(state)
        if estimator_kind == "ekf":
            state, fix = ekf_update(
                state, anchors, dhat, gn_iterations=cfg.gn_iterations, time_index=t
            )
        else:
            state, fix = kf_update_linear(
                state, anchors, dhat, mode=cfg.mode, central=cfg.central, time_index=t
            )
        fixes.append(fix)
    return Trajectory(fixes)
