"""TDoA localization toolkit.

Position estimation from pairwise arrival-time differences, conditioning
analysis of the estimators against anchor geometry, Kalman tracking, and a
deployment-planning workflow (simulator, CLI, HTTP service).
"""

from .dop import DopGrid, GridSpec, angular_dispersion, dop_map, linear_dop, nonlinear_dop
from .errors import (
    DegenerateGeometryError,
    NearAnchorError,
    SingularSystemError,
    TdoaError,
)
from .evaluation import (
    ScenarioReport,
    StaticScenario,
    TrackScenario,
    builtin_scenarios,
    point_segment_distance,
    rmse_static,
    rmse_track,
    run_static_scenario,
    run_track_scenario,
)
from .gauss_newton import (
    GaussNewtonConfig,
    SolveReport,
    gauss_newton_step,
    jacobian,
    locate_gauss_newton,
    residual,
)
from .geometry import (
    SPEED_OF_LIGHT,
    AnchorSet,
    Point,
    TdoaVector,
    distance,
    least_squares_solve,
    max_singular_value,
    min_singular_value,
    pair_difference_operator,
    pair_indices,
    true_distance_differences,
)
from .linear import (
    LinearFix,
    LinearSystem,
    build_system_central,
    build_system_symmetric,
    locate_linear,
    solve_linear,
)
from .measurement import NoiseModel, ToaSample, simulate_tdoa, simulate_toa, toa_to_tdoa
from .tracking import (
    TrackerConfig,
    TrackerState,
    TrackFix,
    Trajectory,
    ekf_update,
    kf_predict,
    kf_update_linear,
    track,
)

__version__ = "0.1.0"
