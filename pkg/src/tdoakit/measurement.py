"""Arrival-time and range-difference simulation under the Gaussian
line-of-sight model.

Each anchor timestamps one tag transmission; per-anchor timestamp noise is
Gaussian and independent. Differencing any two receive times cancels the
(unknown) transmit time, which is the property that makes the technique
synchronization-free on the tag side. Anchors themselves are assumed
perfectly synchronized with each other.

Noise is configured in the range domain (metres) because every downstream
tolerance is metric; internally it is injected per anchor in the time
domain as sigma_d / c.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import (
    SPEED_OF_LIGHT,
    AnchorSet,
    Point,
    TdoaVector,
    anchor_distances,
    pair_indices,
)

__all__ = [
    "ToaSample",
    "TdoaVector",
    "NoiseModel",
    "simulate_toa",
    "toa_to_tdoa",
    "simulate_tdoa",
]


@dataclass(frozen=True)
class ToaSample:
    """Receive timestamps (seconds), one per anchor, with their noise sigmas."""

    timestamps: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=float)
        s = np.asarray(self.sigma, dtype=float)
        if t.ndim != 1:
            raise ValueError("timestamps must be a 1D sequence")
        if s.shape != t.shape:
            raise ValueError("sigma must have one entry per timestamp")
        if not np.isfinite(t).all():
            raise ValueError("timestamps must be finite")
        if (s < 0).any():
            raise ValueError("timestamp sigmas must be >= 0")
        t = t.copy()
        s = s.copy()
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "sigma", s)

    @property
    def n(self) -> int:
        return self.timestamps.shape[0]


@dataclass(frozen=True)
class NoiseModel:
    """Range-domain measurement noise: sigma_d metres per anchor.

    ``per_anchor`` overrides the uniform sigma_d with one value per anchor.
    Identical seeds reproduce identical samples bit-for-bit within this
    implementation (numpy PCG64 *Generator*); cross-implementation agreement
    is statistical only.
    """

    sigma_d: float = 0.0
    seed: int | None = None
    per_anchor: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.sigma_d < 0:
            raise ValueError("sigma_d must be >= 0")
        if self.per_anchor is not None:
            pa = tuple(float(v) for v in self.per_anchor)
            if any(v < 0 for v in pa):
                raise ValueError("per-anchor sigmas must be >= 0")
            object.__setattr__(self, "per_anchor", pa)

    def range_sigmas(self, n: int) -> np.ndarray:
        """Per-anchor range sigmas (metres) for an n-anchor deployment."""
        if self.per_anchor is not None:
            if len(self.per_anchor) != n:
                raise ValueError(
                    f"per_anchor has {len(self.per_anchor)} entries, need {n}"
                )
            return np.array(self.per_anchor, dtype=float)
        return np.full(n, float(self.sigma_d))

    def make_rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def simulate_toa(
    target: Point,
    anchors: AnchorSet,
    noise: NoiseModel,
    transmit_offset: float = 0.0,
    rng: np.random.Generator | None = None,
) -> ToaSample:
    """Simulate one tag transmission: per-anchor receive timestamps.

    timestamp_i = transmit_offset + d_i / c + eta_i, with eta_i Gaussian of
    standard deviation sigma_d / c. ``transmit_offset`` models the unknown,
    unsynchronized transmit time; it shifts every timestamp equally and
    cancels under differencing.

    Pass ``rng`` to draw from an existing stream (batch runs); otherwise a
    fresh generator is created from the noise model's seed, so repeated
    calls with the same seed return identical samples.
    """
    if rng is None:
        rng = noise.make_rng()
    sig_d = noise.range_sigmas(anchors.n)
    sig_t = sig_d / SPEED_OF_LIGHT
    d = anchor_distances(target.as_array(), anchors.xy)
    eta = rng.standard_normal(anchors.n) * sig_t
    return ToaSample(transmit_offset + d / SPEED_OF_LIGHT + eta, sig_t)


def toa_to_tdoa(sample: ToaSample) -> TdoaVector:
    """Pairwise range differences c*(t_i - t_j) in canonical pair order.

    The shared transmit offset cancels in every pair. Because all pairwise
    values are differences of the same per-anchor ranges, the cyclic sums
    d_ij + d_jk + d_ki vanish to round-off for every triple.
    """
    if sample.n < 2:
        raise ValueError("need at least 2 timestamps to form differences")
    ranges = SPEED_OF_LIGHT * sample.timestamps
    pairs = pair_indices(sample.n)
    return TdoaVector(ranges[pairs[:, 0]] - ranges[pairs[:, 1]], sample.n)


def simulate_tdoa(
    target: Point,
    anchors: AnchorSet,
    noise: NoiseModel,
    rng: np.random.Generator | None = None,
) -> TdoaVector:
    """One simulated range-difference vector for a target position."""
    return toa_to_tdoa(simulate_toa(target, anchors, noise, 0.0, rng=rng))


def simulate_tdoa_batch(
    target: Point,
    anchors: AnchorSet,
    sigma_d: float,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """``count`` independent range-difference vectors; shape (count, C(n,2)).

    Noise draws are per anchor then differenced, so each row satisfies the
    same cyclic closure as single-shot simulation. Draw order is (sample,
    anchor), which keeps draws identical across deployments with the same
    anchor count - the property paired-seed comparisons rely on.
    """
    d = anchor_distances(target.as_array(), anchors.xy)
    eta = rng.standard_normal((count, anchors.n)) * sigma_d
    pseudo = d[None, :] + eta
    pairs = pair_indices(anchors.n)
    return pseudo[:, pairs[:, 0]] - pseudo[:, pairs[:, 1]]


def tdoa_from_values(values: Sequence[float], n: int) -> TdoaVector:
    """Wrap raw pair values (canonical order) as a measurement vector."""
    return TdoaVector(np.asarray(values, dtype=float), n)
