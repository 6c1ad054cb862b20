"""Dilution-of-precision analysis for the two estimator families.

The central quantity is the angular dispersion of a set of directions: the
minimum singular value of the pairwise-differenced unit-direction matrix.
Dispersed directions score high; clustered or (anti)parallel directions
score near zero.

For the iterative estimator the measurement Jacobian at a target position
has exactly this dispersion (computed over the directions from the anchors
to the target) as its smallest singular value, so the dispersion *is* the
DoP indicator: bigger is better.

For the linear estimator the conditioning of the row-normalized
central-anchor system plays the same role (smaller cond is better); near
the central anchor it behaves like the reciprocal of the dispersion of the
anchor directions seen from that anchor.

Maps over candidate target positions are evaluated noise-free: they
characterize geometry, not measurement noise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import (
    AnchorSet,
    Point,
    pair_difference_operator,
    singular_values,
    true_distance_differences,
)
from .linear import build_system_central

__all__ = [
    "angular_dispersion",
    "linear_dop",
    "nonlinear_dop",
    "GridSpec",
    "DopGrid",
    "dop_map",
]

#: Distance (m) under which a map/target position counts as on an anchor.
COINCIDENT_EPS = kernels.COINCIDENT_EPS


def angular_dispersion(points: np.ndarray) -> float:
    """Dispersion score of a set of non-zero 2D vectors around the origin.

    Each vector is normalized to a unit direction; the score is the minimum
    singular value of the matrix of all pairwise direction differences.
    It is invariant to positive rescaling of any single vector and to a
    global rotation, and zero precisely when the directions take at most
    two distinct values.
    """
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < 2:
        raise ValueError("need an (n, 2) array with n >= 2")
    norms = np.hypot(p[:, 0], p[:, 1])
    if (norms == 0).any():
        raise ValueError("all points must have non-zero norm")
    u = p / norms[:, None]
    t = pair_difference_operator(p.shape[0])
    return float(singular_values(t @ u)[-1])


def nonlinear_dop(anchors: AnchorSet, target: Point) -> float:
    """Dispersion of the anchor directions as seen from the target.

    Equals the smallest singular value of the measurement Jacobian at the
    target. Larger is better. Returns NaN (masked) when the target
    coincides with an anchor.
    """
    rel = target.as_array()[None, :] - anchors.xy
    norms = np.hypot(rel[:, 0], rel[:, 1])
    if (norms <= COINCIDENT_EPS).any():
        return math.nan
    return angular_dispersion(rel)


def linear_dop(
    anchors: AnchorSet,
    central: int,
    target: Point,
    normalized: bool = True,
) -> float:
    """Condition number of the central-anchor linear system at a target.

    The system is built noise-free at the target with the central anchor
    translated to the origin and, by default, rows normalized by
    r_i * r_j - the scaling whose conditioning tracks the reciprocal of the
    anchor dispersion near the central anchor. Pass ``normalized=False``
    for the raw estimator matrix. Returns inf (masked) when the matrix is
    singular at the mask tolerance.
    """
    dhat = true_distance_differences(target, anchors)
    system = build_system_central(anchors, central, dhat, normalized=normalized)
    sv = singular_values(system.m)
    smin, smax = float(sv[-1]), float(sv[0])
    if smax == 0.0 or smin < kernels.MASK_RTOL * smax:
        return math.inf
    return smax / smin


@dataclass(frozen=True)
class GridSpec:
    """Rectangular evaluation window with cell counts."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int = 200
    ny: int = 200

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("grid bounds must satisfy min < max on both axes")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid resolution must be >= 1 on both axes")

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        dx = (self.x_max - self.x_min) / self.nx
        dy = (self.y_max - self.y_min) / self.ny
        xs = self.x_min + dx * (np.arange(self.nx) + 0.5)
        ys = self.y_min + dy * (np.arange(self.ny) + 0.5)
        return xs, ys


@dataclass
class DopGrid:
    """DoP values over a grid of candidate target positions.

    ``values[ix, iy]`` is the value at cell center (ix, iy); masked cells
    (degenerate geometry / singular system) hold NaN and are flagged in
    ``mask``. ``kind`` is "linear-cond" or "nonlinear-kappa".
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int
    kind: str
    values: np.ndarray
    mask: np.ndarray
    central: int | None = None

    def finite_range(self) -> tuple[float, float]:
        v = self.values[~self.mask]
        v = v[np.isfinite(v)]
        if len(v) == 0:
            return math.nan, math.nan
        return float(v.min()), float(v.max())

    def argmin_cell(self) -> tuple[int, int]:
        v = np.where(self.mask, np.inf, self.values)
        flat = int(np.nanargmin(v))
        return flat // self.ny, flat % self.ny

    def cell_center(self, ix: int, iy: int) -> Point:
        dx = (self.x_max - self.x_min) / self.nx
        dy = (self.y_max - self.y_min) / self.ny
        return Point(self.x_min + dx * (ix + 0.5), self.y_min + dy * (iy + 0.5))

    def to_json_dict(self) -> dict:
        return {
            "bounds": {
                "x_min": self.x_min,
                "x_max": self.x_max,
                "y_min": self.y_min,
                "y_max": self.y_max,
            },
            "nx": self.nx,
            "ny": self.ny,
            "kind": self.kind,
            "central": self.central,
            "values": [None if not math.isfinite(v) else v for v in self.values.ravel()],
            "mask": [bool(b) for b in self.mask.ravel()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    def to_csv(self) -> str:
        """Row-major dump: one line per x index, ny comma-separated values.

        Masked cells are written as nan. A comment header carries the
        bounds, resolution and kind.
        """
        lines = [
            "# bounds=%.9g,%.9g,%.9g,%.9g res=%dx%d kind=%s"
            % (self.x_min, self.x_max, self.y_min, self.y_max, self.nx, self.ny, self.kind)
        ]
        for ix in range(self.nx):
            row = self.values[ix]
            lines.append(
                ",".join("nan" if not math.isfinite(v) else "%.9g" % v for v in row)
            )
        return "\n".join(lines) + "\n"


def dop_map(
    anchors: AnchorSet,
    grid: GridSpec,
    kind: str,
    central: int | None = None,
    symmetric: bool = False,
) -> DopGrid:
    """Evaluate a DoP quantity at every cell center of the grid.

    kind "nonlinear-kappa" maps the angular dispersion; "linear-cond" maps
    the condition number of the linear system, which needs either a
    ``central`` anchor index (normalized central construction) or
    ``symmetric=True`` (raw triple construction).
    """
    xs, ys = grid.cell_centers()
    if kind == "nonlinear-kappa":
        vals, mask = kernels.kappa_grid(xs, ys, anchors.xy)
        used_central = None
    elif kind == "linear-cond":
        if symmetric:
            if anchors.n < 4:
                raise ValueError("symmetric linear map needs >= 4 anchors")
            vals, mask = kernels.symmetric_cond_grid(xs, ys, anchors.xy)
            used_central = None
        else:
            if central is None:
                raise ValueError(
                    "linear-cond maps need a central anchor index or symmetric=True"
                )
            if not 0 <= central < anchors.n:
                raise ValueError(f"central index {central} out of range")
            if anchors.n < 4:
                raise ValueError("central linear map needs >= 4 anchors")
            origin = anchors.xy[central]
            txy = np.delete(anchors.xy, central, axis=0) - origin
            vals, mask = kernels.central_cond_grid(xs - origin[0], ys - origin[1], txy)
            used_central = central
    else:
        raise ValueError(f"unknown map kind {kind!r}")
    return DopGrid(
        x_min=grid.x_min,
        x_max=grid.x_max,
        y_min=grid.y_min,
        y_max=grid.y_max,
        nx=grid.nx,
        ny=grid.ny,
        kind=kind,
        values=vals,
        mask=mask,
        central=used_central,
    )
