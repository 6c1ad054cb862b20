import numpy as np
import pytest

from tdoakit import AnchorSet, Point, nonlinear_dop


@pytest.fixture
def square_center_anchors():
    """Four stations around a central one at the origin."""
    return AnchorSet([(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1)])


@pytest.fixture
def corner_anchors():
    """Unit-square corners, no interior station."""
    return AnchorSet([(-1, -1), (1, -1), (1, 1), (-1, 1)])


def random_layout_cases(
    count: int,
    seed: int,
    n_min: int = 4,
    n_max: int = 7,
    min_kappa: float = 0.5,
    min_sep: float = 0.2,
):
    """Deterministic stream of (anchors, target) with dispersed geometry.

    Targets are convex combinations of the anchors (inside the hull) and
    kept only when the direction dispersion at the target clears min_kappa
    and the target is not effectively on an anchor.
    """
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < count:
        n = int(rng.integers(n_min, n_max + 1))
        xy = rng.uniform(-1.0, 1.0, (n, 2))
        seps = [
            np.linalg.norm(xy[i] - xy[j]) for i in range(n) for j in range(i + 1, n)
        ]
        if min(seps) < min_sep:
            continue
        w = rng.dirichlet(np.ones(n))
        target = Point(*(w @ xy))
        anchors = AnchorSet(xy)
        dist_to_anchor = np.hypot(*(target.as_array()[None, :] - xy).T).min()
        if dist_to_anchor < 1e-2:
            continue
        if nonlinear_dop(anchors, target) < min_kappa:
            continue
        cases.append((anchors, target))
    return cases
