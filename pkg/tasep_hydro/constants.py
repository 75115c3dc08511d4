"""Package-wide constants."""

LOGGER_NAME = "tasep_hydro"
DEFAULT_CONFIG_FILE = "tasep-config.toml"
DEFAULT_OUTPUT_DIR = "tasep-output"

# Inputs this close to the edge of [0, 1/ell] are clamped instead of rejected
DOMAIN_TOLERANCE = 1e-12

# Relative tolerances for phase-diagram ties
MINIMUM_TOLERANCE = 1e-9
CURRENT_TIE_TOLERANCE = 1e-9
TRANSITION_TOLERANCE = 1e-9

# Densities closer than this to 0 or 1/ell are not used for rate inference
INFERENCE_EPSILON = 1e-4

EXACT_MAX_STATES = 1_000_000
EXACT_DENSE_LIMIT = 2_000
EXACT_RESIDUAL_TOLERANCE = 1e-10

DEFAULT_BATCHES = 20
EVENT_COUNTER_LIMIT = 2**62

CHARACTERISTIC_STEP = 1e-3
CHARACTERISTIC_DRIFT_TOLERANCE = 1e-6
REVERSAL_TIME_TOLERANCE = 1e-9
DEFAULT_TRACE_TIME = 50.0
