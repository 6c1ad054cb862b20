"""2D geometry foundation: points, anchor sets, canonical pair indexing,
the pairwise-difference operator, and the dense linear-algebra helpers the
estimators are built on.

Conventions used throughout the package:

- coordinates and ranges are metres, times are seconds;
- anchors are indexed 0-based in code and in all file formats;
- pair order is strict lexicographic over (i, j) with i < j:
  (0,1), (0,2), ..., (0,n-1), (1,2), ..., (n-2,n-1).

All functions here are pure; returned arrays are freshly allocated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import SingularSystemError

#: Propagation speed used to convert timestamps to ranges (m/s, exact).
SPEED_OF_LIGHT = 299_792_458.0

#: Scale-free rank tolerance: a system counts as singular when
#: sigma_min < RANK_RTOL * sigma_max.
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class Point:
    """A 2D position in metres."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def translated(self, dx: float, dy: float) -> "Point":
        return Point(self.x + dx, self.y + dy)

    @staticmethod
    def from_array(a) -> "Point":
        return Point(float(a[0]), float(a[1]))


class AnchorSet:
    """Ordered set of fixed stations with known coordinates.

    Order is significant: it defines the canonical pair index used by every
    measurement vector and system matrix. Anchor positions must be pairwise
    distinct. At least two anchors are required here; the estimators impose
    their own stricter minimums.
    """

    def __init__(self, anchors: Iterable, labels: Sequence[str] | None = None):
        pts = []
        for a in anchors:
            if isinstance(a, Point):
                pts.append((a.x, a.y))
            else:
                x, y = a
                pts.append((float(x), float(y)))
        xy = np.array(pts, dtype=float)
        if xy.ndim != 2 or xy.shape[1] != 2 or xy.shape[0] < 2:
            raise ValueError("anchor set needs at least 2 points of shape (x, y)")
        if not np.isfinite(xy).all():
            raise ValueError("anchor coordinates must be finite")
        for i in range(len(xy)):
            for j in range(i + 1, len(xy)):
                if xy[i, 0] == xy[j, 0] and xy[i, 1] == xy[j, 1]:
                    raise ValueError(f"anchors {i} and {j} coincide at {tuple(xy[i])}")
        if labels is not None:
            labels = list(labels)
            if len(labels) != len(xy):
                raise ValueError("labels length must match anchor count")
        xy.setflags(write=False)
        self._xy = xy
        self.labels = labels

    @property
    def xy(self) -> np.ndarray:
        """Read-only (n, 2) coordinate array."""
        return self._xy

    @property
    def n(self) -> int:
        return self._xy.shape[0]

    def __len__(self) -> int:
        return self.n

    def point(self, i: int) -> Point:
        return Point(float(self._xy[i, 0]), float(self._xy[i, 1]))

    def points(self) -> list[Point]:
        return [self.point(i) for i in range(self.n)]

    def centroid(self) -> Point:
        c = self._xy.mean(axis=0)
        return Point(float(c[0]), float(c[1]))

    def translated(self, dx: float, dy: float) -> "AnchorSet":
        return AnchorSet(self._xy + np.array([dx, dy]), labels=self.labels)

    def subset(self, indices: Sequence[int]) -> "AnchorSet":
        labels = [self.labels[i] for i in indices] if self.labels else None
        return AnchorSet(self._xy[list(indices)], labels=labels)

    def __repr__(self) -> str:
        return f"AnchorSet({self._xy.tolist()})"


@dataclass(frozen=True)
class TdoaVector:
    """Pairwise range differences d_i - d_j in canonical pair order (metres)."""

    values: np.ndarray
    n: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.shape[0] != self.n * (self.n - 1) // 2:
            raise ValueError(
                f"expected {self.n * (self.n - 1) // 2} pair values for {self.n} anchors, "
                f"got {v.shape}"
            )
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def value(self, i: int, j: int) -> float:
        """Range difference d_i - d_j for any anchor pair, either order."""
        if i == j:
            return 0.0
        if i < j:
            return float(self.values[pair_row(self.n, i, j)])
        return -float(self.values[pair_row(self.n, j, i)])


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def pair_indices(n: int) -> np.ndarray:
    """All anchor pairs (i, j), i < j, in canonical order; shape (C(n,2), 2)."""
    if n < 2:
        raise ValueError(f"need at least 2 anchors to form pairs, got {n}")
    rows = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return np.array(rows, dtype=np.int64)

def pair_row(n: int, i: int, j: int) -> int:
    """Row of pair (i, j), i < j, in the canonical order."""
    if not (0 <= i < j < n):
        raise ValueError(f"invalid pair ({i}, {j}) for n={n}")
    # rows before block i: (n-1) + (n-2) + ... + (n-i)
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def triple_indices(n: int) -> np.ndarray:
    """All anchor triples (i, j, k), i < j < k, lexicographic; shape (C(n,3), 3)."""
    if n < 3:
        raise ValueError(f"need at least 3 anchors to form triples, got {n}")
    rows = [
        (i, j, k)
        for i in range(n)
        for j in range(i + 1, n)
        for k in range(j + 1, n)
    ]
    return np.array(rows, dtype=np.int64)


def pair_difference_operator(n: int) -> np.ndarray:
    """The C(n,2) x n operator mapping per-anchor values to pairwise differences.

    Row k, for pair (i, j) in canonical order, carries +1 in column i and -1
    in column j. Applied to a vector v it yields all v_i - v_j with i < j.
    """
    if n < 2:
        raise ValueError(f"pair difference operator needs n >= 2, got {n}")
    pairs = pair_indices(n)
    t = np.zeros((len(pairs), n), dtype=float)
    t[np.arange(len(pairs)), pairs[:, 0]] = 1.0
    t[np.arange(len(pairs)), pairs[:, 1]] = -1.0
    return t


def distance(a: Point, b: Point) -> float:
    """Euclidean distance between two points (metres)."""
    return math.hypot(a.x - b.x, a.y - b.y)


def anchor_distances(target_xy: np.ndarray, anchors_xy: np.ndarray) -> np.ndarray:
    """Distances from one target position to every anchor; shape (n,)."""
    d = anchors_xy - np.asarray(target_xy, dtype=float)
    return np.hypot(d[:, 0], d[:, 1])


def true_distance_differences(target: Point, anchors: AnchorSet) -> TdoaVector:
    """Noise-free range differences d_i - d_j for a known target position."""
    d = anchor_distances(target.as_array(), anchors.xy)
    pairs = pair_indices(anchors.n)
    return TdoaVector(d[pairs[:, 0]] - d[pairs[:, 1]], anchors.n)


def singular_values(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("expected a 2D matrix")
    return np.linalg.svd(m, compute_uv=False)


def min_singular_value(m: np.ndarray) -> float:
    return float(singular_values(m)[-1])


def max_singular_value(m: np.ndarray) -> float:
    return float(singular_values(m)[0])


def least_squares_solve(m: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Minimum of ||M x - f|| for a full-column-rank M, by orthogonal factorization.

    Raises SingularSystemError (carrying sigma_min) when M is rank deficient
    at the package-wide RANK_RTOL relative tolerance.
    """
    m = np.asarray(m, dtype=float)
    f = np.asarray(f, dtype=float)
    if m.ndim != 2 or f.ndim != 1 or m.shape[0] != f.shape[0]:
        raise ValueError(f"incompatible system shapes {m.shape} and {f.shape}")
    sv = singular_values(m)
    smin, smax = float(sv[-1]), float(sv[0])
    if smax == 0.0 or smin < RANK_RTOL * smax:
        raise SingularSystemError(
            f"rank-deficient system: sigma_min={smin:.3e}, sigma_max={smax:.3e}",
            sigma_min=smin,
        )
    x, *_ = np.linalg.lstsq(m, f, rcond=None)
    return x
