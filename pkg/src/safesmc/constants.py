"""Centralized defaults, column names and message strings."""

CONFIG_DIR = "configs"
CONFIG_EXT = ".json"

TRAJECTORY_FILE = "trajectory.csv"
TIMING_FILE = "timing.csv"
METRICS_FILE = "metrics.json"
RESOLVED_CONFIG_FILE = "config.json"

# Vessel (platform of 425 t with three azimuth thrusters on an isosceles triangle).
DEFAULT_MASS = 425.0e3
DEFAULT_ADDED_MASS_RATIO = 0.1
DEFAULT_DECAY_TIME = 50.0
DEFAULT_D_QUAD = (2.0e3, 2.0e3, 2.0e6)

TRIANGLE_BASE = 20.0
TRIANGLE_HEIGHT = 25.0
# Centroid at the body origin: apex forward, base aft.
DEFAULT_THRUSTER_POSITIONS = (
    (2.0 * TRIANGLE_HEIGHT / 3.0, 0.0),
    (-TRIANGLE_HEIGHT / 3.0, TRIANGLE_BASE / 2.0),
    (-TRIANGLE_HEIGHT / 3.0, -TRIANGLE_BASE / 2.0),
)
DEFAULT_F_MAX = 20.0e3
DEFAULT_C_F = 0.4
DEFAULT_C_N = 0.35

# Sliding-mode gains.
DEFAULT_LAMBDA = (0.02, 0.02, 0.1)
DEFAULT_KS = (0.02, 0.02, 0.02)
DEFAULT_PHI = 0.3

# Barrier.
DEFAULT_ALPHA = 0.1
DEFAULT_KAPPA = 1.0
DEFAULT_EPS_H = 1.0
DEFAULT_ALPHA_MAX_FACTOR = 5.0

# Projection filter.
DEFAULT_GAMMA = 1.0
DEFAULT_SWEEPS = 20
DEFAULT_TOL = 1e-6
ROW_NORM_EPS = 1e-9
FILTER_PROJECTION = "projection"
FILTER_ORACLE = "oracle"
FILTER_METHODS = frozenset({FILTER_PROJECTION, FILTER_ORACLE})

# Disturbances: mean + Gauss-Markov per channel, sized well inside the thrust budget.
DEFAULT_D_MAX = 6.0e3
DEFAULT_WIND = {"mean": (200.0, 100.0, 500.0), "sigma": (200.0, 200.0, 800.0),
                "correlation_time": 20.0}
DEFAULT_WAVE = {"mean": (100.0, 50.0, 0.0), "sigma": (250.0, 250.0, 1.0e3),
                "correlation_time": 8.0}
DEFAULT_CURRENT = {"mean": (100.0, -50.0, 0.0), "sigma": (80.0, 80.0, 200.0),
                   "correlation_time": 120.0}
DISTURBANCE_CHANNELS = ("wind", "wave", "current")

# Simulation.
DEFAULT_DT = 0.1
DEFAULT_HORIZON = 600.0
DEFAULT_SEED = 0
DEFAULT_GOAL = (80.0, 0.0, 0.0)
DEFAULT_OBSTACLES = ({"center": (40.0, 6.0), "radius": 8.0},)

GOAL_POSITION_TOL = 1.0
GOAL_HEADING_TOL = 0.05
GOAL_HOLD_TIME = 10.0
STEADY_STATE_FRACTION = 0.25
SAFETY_TOL_FACTOR = 1e-6
SLIDING_DIMENSION = 3

# Trajectory log columns (SI units in the names).
STATE_COLUMNS = ("t_s", "x_m", "y_m", "psi_rad", "u_mps", "v_mps", "r_radps")
ERROR_COLUMNS = ("ep_x_m", "ep_y_m", "ep_psi_rad")
SLIDING_COLUMNS = ("s_x", "s_y", "s_psi", "s_norm")
AXES = (("x", "N"), ("y", "N"), ("n", "Nm"))

ERR_CONFIG_NOT_FOUND = "Config file not found: {path}"
ERR_CONFIG_INVALID_JSON = "Invalid JSON in config file: {path}"
ERR_CONFIG_UNKNOWN_KEYS = "Unknown keys in {section}: {keys}"
ERR_CONFIG_BAD_VALUE = "Invalid value for {field}: {reason}"
ERR_MASS_NOT_SPD = "Mass matrix M must be symmetric positive definite"
ERR_LAYOUT_RANK = "Thruster layout is rank deficient (configuration matrix rank {rank} < 3)"
ERR_NON_FINITE_STATE = "Integration produced a non-finite state: eta={eta}, nu={nu}"
ERR_DISTURBANCE_ORDER = "Disturbance sampled out of order: t={t} after t={last} (dt={dt})"
ERR_QP_INFEASIBLE = "Safety filter QP is infeasible ({rows} half-spaces + actuator box)"
ERR_UNSAFE_START = "Initial state violates obstacle {index}: h(0) = {h:.6g} < 0"
ERR_ENSEMBLE_HAS_OBSTACLES = "check-t2 requires a scenario without obstacles"
ERR_ENSEMBLE_NO_OBSTACLES = "check-t3 requires a scenario with at least one obstacle"
ERR_LOG_MISSING = "Run directory is missing {name}: {path}"
ERR_LOG_SCHEMA = "Trajectory log header does not match: {path}"

MSG_BOX_UNCERTIFIED = (
    "Wrench box is not allocatable at all vertices (worst thruster {force:.0f} N > {f_max:.0f} N)"
)
MSG_FILTER_INFEASIBLE = "Safety constraints infeasible at t={t:.2f} s (max residual {res:.3g})"
MSG_THRUSTER_SATURATED = "Thruster saturation at t={t:.2f} s; check the wrench box factors"
