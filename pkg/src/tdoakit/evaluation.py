"""RMSE metrics, benchmark scenarios, and the Monte-Carlo harness.

Static scenarios locate a fixed target many times under fresh noise;
track scenarios move a tag along a straight segment and run a filter over
the stream. Reports are exactly reproducible from (scenario, seed) for a
fixed kernel backend; paired comparisons across deployments reuse
identical per-anchor noise draws so directional claims are not washed out
by Monte-Carlo variance.

The built-in registry reproduces, at desk scale, the reference six-anchor
site used throughout the package's benchmark suite.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .gauss_newton import default_initial_guess
from .geometry import (
    AnchorSet,
    Point,
    TdoaVector,
    anchor_distances,
    distance,
    pair_indices,
)
from .measurement import simulate_tdoa_batch
from .tracking import TrackerConfig, track

__all__ = [
    "rmse_static",
    "point_segment_distance",
    "rmse_track",
    "StaticScenario",
    "TrackScenario",
    "ScenarioReport",
    "run_static_scenario",
    "run_track_scenario",
    "run_static_pair",
    "run_track_pair",
    "builtin_scenarios",
    "scenario_from_dict",
    "scenario_to_dict",
]


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def rmse_static(estimates: Sequence, truth: Point) -> float:
    """Root mean squared Euclidean error of estimates against one truth."""
    pts = _as_xy(estimates)
    if len(pts) == 0:
        raise ValueError("need at least one estimate")
    d2 = (pts[:, 0] - truth.x) ** 2 + (pts[:, 1] - truth.y) ** 2
    return math.sqrt(float(d2.mean()))


def point_segment_distance(p: Point, seg: tuple[Point, Point]) -> float:
    """Distance from a point to the closed segment between seg's endpoints."""
    a, b = seg
    ab = b.as_array() - a.as_array()
    denom = float(ab @ ab)
    if denom == 0.0:
        raise ValueError("segment endpoints must be distinct")
    t = float((p.as_array() - a.as_array()) @ ab) / denom
    t = min(1.0, max(0.0, t))
    closest = Point(a.x + t * ab[0], a.y + t * ab[1])
    return distance(p, closest)


def rmse_track(estimates: Sequence, seg: tuple[Point, Point]) -> float:
    """Root mean squared distance of estimates to a track segment."""
    pts = _as_xy(estimates)
    if len(pts) == 0:
        raise ValueError("need at least one estimate")
    d = [point_segment_distance(Point(float(x), float(y)), seg) for x, y in pts]
    return math.sqrt(float(np.mean(np.square(d))))


def _as_xy(estimates: Sequence) -> np.ndarray:
    if isinstance(estimates, np.ndarray):
        return estimates.reshape(-1, 2).astype(float)
    rows = []
    for e in estimates:
        if isinstance(e, Point):
            rows.append((e.x, e.y))
        else:
            rows.append((float(e[0]), float(e[1])))
    return np.array(rows, dtype=float).reshape(-1, 2)


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

def parse_estimator(spec: str) -> tuple[str, str, int | None]:
    """Split an estimator spec string into (family, linear mode, central).

    Accepted: "linear-symmetric", "linear-central:<i>", "gauss-newton".
    """
    if spec == "linear-symmetric":
        return "linear", "symmetric", None
    if spec.startswith("linear-central:"):
        idx = spec.split(":", 1)[1]
        return "linear", "central", int(idx)
    if spec == "gauss-newton":
        return "gauss-newton", "", None
    raise ValueError(f"unknown estimator {spec!r}")


@dataclass(frozen=True)
class StaticScenario:
    anchors: AnchorSet
    deployment: str
    target: Point
    sigma_d: float = 0.1
    samples: int = 500
    estimator: str = "linear-symmetric"

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        parse_estimator(self.estimator)


@dataclass(frozen=True)
class TrackScenario:
    anchors: AnchorSet
    deployment: str
    segment: tuple[Point, Point]
    sigma_d: float = math.sqrt(0.5)
    steps: int = 50
    estimator: str = "gauss-newton"
    r2: float = 0.5
    q_scale: float = 0.1
    burn_in: int = 5
    gn_iterations: int = 1
    process_noise: str = "movement"

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError("steps must be >= 2")
        a, b = self.segment
        if a.x == b.x and a.y == b.y:
            raise ValueError("segment endpoints must be distinct")
        parse_estimator(self.estimator)

    def true_positions(self) -> np.ndarray:
        a, b = self.segment
        t = np.linspace(0.0, 1.0, self.steps)
        return np.column_stack([a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)])


@dataclass
class ScenarioReport:
    """Per-run record: the RMSE, its per-sample terms, and the full config.

    Track runs also carry the full trajectory (not serialized with the
    report; callers dump it separately as CSV/JSON when needed).
    """

    rmse: float
    errors: list[float]
    failures: int
    nonconverged: int
    seed: int
    config: dict
    trajectory: object = None

    def to_json_dict(self) -> dict:
        return {
            "rmse": self.rmse,
            "errors": self.errors,
            "failures": self.failures,
            "nonconverged": self.nonconverged,
            "seed": self.seed,
            "config": self.config,
        }

    def to_csv(self) -> str:
        lines = ["sample,error_m"]
        for i, e in enumerate(self.errors):
            lines.append("%d,%.9g" % (i, e))
        return "\n".join(lines) + "\n"


def _derived_rng(seed: int, name: str) -> np.random.Generator:
    # stable across processes: crc32 of the scenario name, not hash()
    return np.random.default_rng(np.random.SeedSequence([seed, zlib.crc32(name.encode())]))


def run_static_scenario(
    scenario: StaticScenario,
    seed: int,
    rng: np.random.Generator | None = None,
) -> ScenarioReport:
    """Simulate, locate every sample, and report the static RMSE.

    ``rng`` overrides the default (seed, deployment)-derived stream; the
    paired runners use that to share noise draws across deployments.
    """
    if rng is None:
        rng = _derived_rng(seed, scenario.deployment)
    dhat = simulate_tdoa_batch(
        scenario.target, scenario.anchors, scenario.sigma_d, scenario.samples, rng
    )
    family, mode, central = parse_estimator(scenario.estimator)
    nonconverged = 0
    if family == "linear":
        if mode == "central":
            est, _, _, ok = kernels.locate_central_batch(
                scenario.anchors.xy, central, dhat
            )
        else:
            est, _, _, ok = kernels.locate_symmetric_batch(scenario.anchors.xy, dhat)
    else:
        init = default_initial_guess(scenario.anchors).as_array()
        est, _, conv, _, ok = kernels.locate_gn_batch(scenario.anchors.xy, dhat, init)
        nonconverged = int((~conv & ok).sum())
    good = est[ok]
    errors = np.hypot(good[:, 0] - scenario.target.x, good[:, 1] - scenario.target.y)
    rmse = math.sqrt(float(np.mean(errors**2))) if len(errors) else math.nan
    return ScenarioReport(
        rmse=rmse,
        errors=[float(e) for e in errors],
        failures=int((~ok).sum()),
        nonconverged=nonconverged,
        seed=seed,
        config=scenario_to_dict(scenario),
    )


def run_track_scenario(
    scenario: TrackScenario,
    seed: int,
    rng: np.random.Generator | None = None,
) -> ScenarioReport:
    """Simulate a straight-line run, filter it, and report the track RMSE.

    The first ``burn_in`` fixes are discarded from the metric to remove the
    initialization transient. Failures count prediction-only fixes.
    """
    if rng is None:
        rng = _derived_rng(seed, scenario.deployment)
    positions = scenario.true_positions()
    n = scenario.anchors.n
    eta = rng.standard_normal((scenario.steps, n)) * scenario.sigma_d
    pairs = pair_indices(n)
    measurements = []
    for k in range(scenario.steps):
        d = anchor_distances(positions[k], scenario.anchors.xy)
        pseudo = d + eta[k]
        measurements.append(TdoaVector(pseudo[pairs[:, 0]] - pseudo[pairs[:, 1]], n))

    family, mode, central = parse_estimator(scenario.estimator)
    cfg = TrackerConfig(
        r2=scenario.r2,
        q_scale=scenario.q_scale,
        process_noise=scenario.process_noise,
        mode=mode or "symmetric",
        central=central,
        gn_iterations=scenario.gn_iterations,
    )
    kind = "ekf" if family == "gauss-newton" else "linear"
    traj = track(measurements, scenario.anchors, estimator_kind=kind, config=cfg)

    kept = traj.fixes[scenario.burn_in :]
    if not kept:
        raise ValueError("burn-in discards every fix; reduce burn_in or add steps")
    errors = [point_segment_distance(f.estimate, scenario.segment) for f in kept]
    failures = sum(1 for f in traj.fixes if f.quality == 0.0 and f.time_index > 0)
    rmse = math.sqrt(float(np.mean(np.square(errors))))
    return ScenarioReport(
        rmse=rmse,
        errors=[float(e) for e in errors],
        failures=failures,
        nonconverged=0,
        seed=seed,
        config=scenario_to_dict(scenario),
        trajectory=traj,
    )


def run_static_pair(
    a: StaticScenario, b: StaticScenario, seed: int
) -> tuple[ScenarioReport, ScenarioReport]:
    """Run two static scenarios on identical noise draws (same seed stream).

    Requires equal anchor counts and sample counts so the draw sequences
    align sample-for-sample and anchor-for-anchor.
    """
    if a.anchors.n != b.anchors.n or a.samples != b.samples:
        raise ValueError("paired scenarios need matching anchor and sample counts")
    ra = run_static_scenario(a, seed, rng=np.random.default_rng(seed))
    rb = run_static_scenario(b, seed, rng=np.random.default_rng(seed))
    return ra, rb


def run_track_pair(
    a: TrackScenario, b: TrackScenario, seed: int
) -> tuple[ScenarioReport, ScenarioReport]:
    """Track-scenario analogue of run_static_pair."""
    if a.anchors.n != b.anchors.n or a.steps != b.steps:
        raise ValueError("paired scenarios need matching anchor and step counts")
    ra = run_track_scenario(a, seed, rng=np.random.default_rng(seed))
    rb = run_track_scenario(b, seed, rng=np.random.default_rng(seed))
    return ra, rb


# ---------------------------------------------------------------------------
# built-in site and registry
# ---------------------------------------------------------------------------

#: Six fixed stations of the reference site (metres).
SITE_ANCHORS = AnchorSet(
    [
        (20.961, 68.941),
        (20.911, 63.929),
        (22.652, 66.441),
        (25.417, 66.461),
        (28.274, 63.910),
        (28.324, 68.961),
    ],
    labels=["1", "2", "3", "4", "5", "6"],
)

#: Four outer corners of the site: a rectangle with no interior station.
RECTANGULAR_INDICES = (0, 1, 4, 5)

#: Three corners plus the interior station (index 2 of the subset).
TRIANGULAR_INDICES = (0, 1, 2, 5)
TRIANGULAR_CENTRAL = 2

STATIC_TARGETS = {
    "rectangular": Point(24.715, 66.554),
    "triangular": Point(22.650, 66.667),
}

TRACK_SEGMENTS = {
    "rectangular": (Point(22.11, 68.0), Point(22.11, 64.75)),
    "triangular": (Point(22.03, 64.2), Point(22.03, 68.4)),
}


def site_deployment(name: str) -> AnchorSet:
    if name == "rectangular":
        return SITE_ANCHORS.subset(RECTANGULAR_INDICES)
    if name == "triangular":
        return SITE_ANCHORS.subset(TRIANGULAR_INDICES)
    raise ValueError(f"unknown deployment {name!r}")


def builtin_scenarios() -> dict:
    """Named benchmark scenarios over the reference site.

    Static ones compare the two estimator families per deployment; track
    ones do the same with the filters. Which stations form each deployment
    is a configuration choice, not a law: rectangular takes the four outer
    corners, triangular three corners plus the interior station.
    """
    out = {}
    for dep in ("rectangular", "triangular"):
        anchors = site_deployment(dep)
        for est_name, est in (("linear", "linear-symmetric"), ("nonlinear", "gauss-newton")):
            out[f"table4-{dep}-{est_name}"] = StaticScenario(
                anchors=anchors,
                deployment=dep,
                target=STATIC_TARGETS[dep],
                sigma_d=0.1,
                samples=500,
                estimator=est,
            )
            out[f"table5-{dep}-{est_name}"] = TrackScenario(
                anchors=anchors,
                deployment=dep,
                segment=TRACK_SEGMENTS[dep],
                sigma_d=math.sqrt(0.5),
                steps=50,
                estimator=est,
            )
    return out


# ---------------------------------------------------------------------------
# JSON round-trip
# ---------------------------------------------------------------------------

def scenario_to_dict(s) -> dict:
    anchors = [
        {"x": float(x), "y": float(y), "label": (s.anchors.labels[i] if s.anchors.labels else str(i))}
        for i, (x, y) in enumerate(s.anchors.xy)
    ]
    base = {"anchors": anchors, "deployment": s.deployment, "sigma_d": s.sigma_d,
            "estimator": s.estimator}
    if isinstance(s, StaticScenario):
        base["target"] = {"x": s.target.x, "y": s.target.y}
        base["samples"] = s.samples
    elif isinstance(s, TrackScenario):
        a, b = s.segment
        base["segment"] = {"from": {"x": a.x, "y": a.y}, "to": {"x": b.x, "y": b.y}}
        base["steps"] = s.steps
        base["tracker"] = {"r2": s.r2, "q": s.q_scale, "burn_in": s.burn_in,
                           "gn_iterations": s.gn_iterations,
                           "process_noise": s.process_noise}
    else:
        raise TypeError(f"not a scenario: {type(s)!r}")
    return base


def scenario_from_dict(d: dict):
    anchors = AnchorSet(
        [(a["x"], a["y"]) for a in d["anchors"]],
        labels=[str(a.get("label", i)) for i, a in enumerate(d["anchors"])],
    )
    deployment = d.get("deployment", "custom")
    estimator = d.get("estimator", "linear-symmetric")
    sigma_d = float(d.get("sigma_d", 0.1))
    if "target" in d:
        return StaticScenario(
            anchors=anchors,
            deployment=deployment,
            target=Point(d["target"]["x"], d["target"]["y"]),
            sigma_d=sigma_d,
            samples=int(d.get("samples", 500)),
            estimator=estimator,
        )
    if "segment" in d:
        tr = d.get("tracker", {})
        seg = (
            Point(d["segment"]["from"]["x"], d["segment"]["from"]["y"]),
            Point(d["segment"]["to"]["x"], d["segment"]["to"]["y"]),
        )
        return TrackScenario(
            anchors=anchors,
            deployment=deployment,
            segment=seg,
            sigma_d=sigma_d,
            steps=int(d.get("steps", 50)),
            estimator=estimator,
            r2=float(tr.get("r2", 0.5)),
            q_scale=float(tr.get("q", 0.1)),
            burn_in=int(tr.get("burn_in", 5)),
            gn_iterations=int(tr.get("gn_iterations", 1)),
            process_noise=str(tr.get("process_noise", "movement")),
        )
    raise ValueError("scenario needs either a target (static) or a segment (track)")


def scenario_json(s) -> str:
    return json.dumps(scenario_to_dict(s), indent=2)
