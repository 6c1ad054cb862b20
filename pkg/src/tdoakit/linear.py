"""Closed-form linear position estimation from range differences.

Two constructions are provided:

- the central-anchor form: one anchor is translated to the origin and each
  pair of remaining anchors contributes one equation that is linear in the
  target coordinates;
- the symmetric form: every unordered anchor triple contributes one
  equation, removing the need to choose a central anchor.

Both produce an overdetermined 2-unknown system solved by least squares.
Rows are used unweighted; the row-normalized variant of the central form
(each pair row divided by r_i * r_j) is exposed for conditioning analysis
only, since rescaling rows changes the least-squares answer on noisy data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularSystemError
from .geometry import (
    RANK_RTOL,
    AnchorSet,
    Point,
    TdoaVector,
    least_squares_solve,
    singular_values,
    triple_indices,
)

__all__ = [
    "LinearSystem",
    "LinearFix",
    "build_system_central",
    "build_system_symmetric",
    "solve_linear",
    "locate_linear",
]


@dataclass
class LinearSystem:
    """An (m, f) least-squares system for the target position.

    ``row_meta`` records the anchor pair (i, j) or triple (i, j, k) behind
    each row, in original anchor indices. ``origin`` is the translation that
    was applied to the coordinates (the central anchor position); the
    solution of the translated system must be shifted back by it.
    """

    m: np.ndarray
    f: np.ndarray
    row_meta: tuple
    normalized: bool = False
    origin: Point | None = None


@dataclass(frozen=True)
class LinearFix:
    """A linear least-squares position estimate with quality diagnostics."""

    point: Point
    sigma_min: float
    sigma_max: float

    @property
    def cond(self) -> float:
        return self.sigma_max / self.sigma_min if self.sigma_min > 0 else float("inf")


def build_system_central(
    anchors: AnchorSet,
    central: int,
    dhat: TdoaVector,
    normalized: bool = False,
) -> LinearSystem:
    """Pair-per-row linear system with the given anchor as the origin.

    Coordinates are translated so the central anchor sits at (0, 0); the
    translation is recorded in the returned system and undone by
    ``solve_linear``. Needs at least four anchors in total so the two
    unknowns stay overdetermined.

    With ``normalized`` each row (i, j) is divided by 2 * r_i * r_j, the
    scaling under which the system matrix's conditioning ties directly to
    the angular dispersion of the anchors around the origin.
    """
    n = anchors.n
    if not 0 <= central < n:
        raise ValueError(f"central anchor index {central} out of range for {n} anchors")
    if n < 4:
        raise ValueError(f"central construction needs >= 4 anchors, got {n}")
    if dhat.n != n:
        raise ValueError(f"measurement is for {dhat.n} anchors, layout has {n}")

    others = [i for i in range(n) if i != central]
    origin = anchors.point(central)
    txy = anchors.xy[others] - origin.as_array()
    r2 = txy[:, 0] ** 2 + txy[:, 1] ** 2
    # range difference to the central anchor, per non-central anchor
    dc = np.array([dhat.value(i, central) for i in others])

    rows = []
    rhs = []
    meta = []
    k = len(others)
    for a in range(k):
        for b in range(a + 1, k):
            i, j = others[a], others[b]
            dji = dhat.value(j, i)
            ax = 2.0 * (dc[b] * txy[a, 0] - dc[a] * txy[b, 0])
            ay = 2.0 * (dc[b] * txy[a, 1] - dc[a] * txy[b, 1])
            d = dc[b] * r2[a] - dc[a] * r2[b] + dc[a] * dc[b] * dji
            if normalized:
                scale = 2.0 * np.sqrt(r2[a]) * np.sqrt(r2[b])
                ax, ay, d = ax / scale, ay / scale, d / scale
            rows.append((ax, ay))
            rhs.append(d)
            meta.append((i, j))
    return LinearSystem(
        m=np.array(rows, dtype=float),
        f=np.array(rhs, dtype=float),
        row_meta=tuple(meta),
        normalized=normalized,
        origin=origin,
    )


def build_system_symmetric(anchors: AnchorSet, dhat: TdoaVector) -> LinearSystem:
    """Triple-per-row linear system that needs no central anchor.

    Each unordered triple (i, j, k) contributes

        2*(d_jk*x_i + d_ki*x_j + d_ij*x_k) * x
      + 2*(d_jk*y_i + d_ki*y_j + d_ij*y_k) * y
      = d_jk*r_i^2 + d_ki*r_j^2 + d_ij*r_k^2 + d_ij*d_jk*d_ki

    in the original (untranslated) coordinates. Every coefficient carries a
    measured difference, so a target equidistant from all anchors yields the
    all-zero matrix and is reported as singular by the solver.
    """
    n = anchors.n
    if n < 4:
        raise ValueError(f"symmetric construction needs >= 4 anchors, got {n}")
    if dhat.n != n:
        raise ValueError(f"measurement is for {dhat.n} anchors, layout has {n}")

    xy = anchors.xy
    r2 = xy[:, 0] ** 2 + xy[:, 1] ** 2
    rows = []
    rhs = []
    meta = []
    for i, j, k in triple_indices(n):
        d_ij = dhat.value(i, j)
        d_jk = dhat.value(j, k)
        d_ki = dhat.value(k, i)
        ax = 2.0 * (d_jk * xy[i, 0] + d_ki * xy[j, 0] + d_ij * xy[k, 0])
        ay = 2.0 * (d_jk * xy[i, 1] + d_ki * xy[j, 1] + d_ij * xy[k, 1])
        d = d_jk * r2[i] + d_ki * r2[j] + d_ij * r2[k] + d_ij * d_jk * d_ki
        rows.append((ax, ay))
        rhs.append(d)
        meta.append((int(i), int(j), int(k)))
    return LinearSystem(
        m=np.array(rows, dtype=float),
        f=np.array(rhs, dtype=float),
        row_meta=tuple(meta),
        normalized=False,
        origin=None,
    )


def solve_linear(system: LinearSystem) -> LinearFix:
    """Least-squares solution of a built system, with conditioning diagnostics.

    Raises SingularSystemError when the matrix is rank deficient at the
    package rank tolerance (sigma_min < RANK_RTOL * sigma_max).
    """
    sv = singular_values(system.m)
    smin, smax = float(sv[-1]), float(sv[0])
    if smax == 0.0 or smin < RANK_RTOL * smax:
        raise SingularSystemError(
            f"linear system is singular: sigma_min={smin:.3e}", sigma_min=smin
        )
    x = least_squares_solve(system.m, system.f)
    if system.origin is not None:
        x = x + system.origin.as_array()
    return LinearFix(point=Point(float(x[0]), float(x[1])), sigma_min=smin, sigma_max=smax)


def locate_linear(
    anchors: AnchorSet,
    dhat: TdoaVector,
    mode: str = "symmetric",
    central: int | None = None,
) -> LinearFix:
    """Build-and-solve convenience entry point.

    mode "central" requires ``central``; mode "symmetric" ignores it.
    """
    if mode == "central":
        if central is None:
            raise ValueError("central mode requires a central anchor index")
        system = build_system_central(anchors, central, dhat)
    elif mode == "symmetric":
        system = build_system_symmetric(anchors, dhat)
    else:
        raise ValueError(f"unknown linear mode {mode!r}")
    return solve_linear(system)
