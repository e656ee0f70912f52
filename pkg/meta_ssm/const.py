"""Constants for the meta-learned neural state-space model package."""

from typing import Final

# Package name
DOMAIN: Final = "meta_ssm"

# Environment
ENV_OUTPUT_ROOT: Final = "META_SSM_OUTPUT_ROOT"
DEFAULT_OUTPUT_ROOT: Final = "runs"

# Binary file formats (little-endian)
DATASET_MAGIC: Final = b"NSSD"
DATASET_FORMAT_VERSION: Final = 1
CHECKPOINT_MAGIC: Final = b"NSSM"
CHECKPOINT_FORMAT_VERSION: Final = 1

# Van der Pol family
DEFAULT_THETA_LOW: Final = 0.5
DEFAULT_THETA_HIGH: Final = 2.0
DEFAULT_N_SYSTEMS: Final = 200
DEFAULT_DT: Final = 0.01
DEFAULT_T_FINAL_LOW: Final = 10.0
DEFAULT_T_FINAL_HIGH: Final = 40.0
DEFAULT_X0_LOW: Final = -1.0
DEFAULT_X0_HIGH: Final = 1.0
DIVERGENCE_THRESHOLD: Final = 1e6

# Query system
DEFAULT_QUERY_THETA: Final = 1.572
DEFAULT_QUERY_X0: Final = (1.0, -0.5)
DEFAULT_QUERY_T_FINAL: Final = 20.0

# Architecture
DEFAULT_HISTORY_LENGTH: Final = 10
DEFAULT_PREDICTION_HORIZON: Final = 5
DEFAULT_OUTPUT_DIM: Final = 2
DEFAULT_LATENT_DIM: Final = 128
DEFAULT_HIDDEN_WIDTH: Final = 128
DEFAULT_HIDDEN_LAYERS: Final = 5

# Layer names
ENCODER_PREFIX: Final = "encoder"
TRANSITION_LAYER: Final = "transition.weight"  # A_z
OUTPUT_LAYER: Final = "output.weight"  # C_z

# Meta-training
DEFAULT_INNER_RATE: Final = 0.01
DEFAULT_OUTER_RATE: Final = 0.001
DEFAULT_INNER_STEPS: Final = 10
DEFAULT_META_BATCH_SIZE: Final = 32
DEFAULT_OUTER_ITERATIONS: Final = 10_000
DEFAULT_CONTEXT_WINDOWS: Final = 12
DEFAULT_TARGET_WINDOWS: Final = 12
DEFAULT_CHECKPOINT_INTERVAL: Final = 1000

# Adaptive-moment optimizer
ADAM_BETA1: Final = 0.9
ADAM_BETA2: Final = 0.999
ADAM_EPSILON: Final = 1e-8

# Baselines
SSM_STEP_MULTIPLIER: Final = 10

# Evaluation
DEFAULT_CONTEXT_POINTS: Final = 400
DEFAULT_HORIZON: Final = 3000
DEFAULT_GRID_CONTEXT_SIZES: Final = (200, 500, 1000)
DEFAULT_GRID_ADAPTATION_STEPS: Final = (10, 40, 100)
DEFAULT_QUERY_RUNS: Final = 100
DEFAULT_INFERENCE_STEPS: Final = 40

# Methods
METHOD_MAML: Final = "maml"
METHOD_ANIL: Final = "anil"
METHOD_ANIL_R: Final = "anil-r"
METHOD_SSM: Final = "ssm"
METHOD_ALL_NOADAPT: Final = "all-noadapt"
METHOD_XFER: Final = "xfer"
META_METHODS: Final = (METHOD_MAML, METHOD_ANIL, METHOD_ANIL_R)
BASELINE_METHODS: Final = (METHOD_SSM, METHOD_ALL_NOADAPT, METHOD_XFER)
ALL_METHODS: Final = META_METHODS + BASELINE_METHODS

# Display names used in reports
METHOD_DISPLAY_NAMES: Final = {
    METHOD_MAML: "MAML-SSM",
    METHOD_ANIL: "ANIL-SSM",
    METHOD_ANIL_R: "ANIL-SSM-R",
    METHOD_SSM: "SSM",
    METHOD_ALL_NOADAPT: "All-NoAdapt-SSM",
    METHOD_XFER: "Xfer-SSM",
}

# CLI exit codes
EXIT_OK: Final = 0
EXIT_VALIDATION_ERROR: Final = 2
EXIT_RUNTIME_ERROR: Final = 3

# Output file names
TRACE_FILENAME: Final = "trace.csv"
REPORT_CSV_FILENAME: Final = "report.csv"
REPORT_TEXT_FILENAME: Final = "report.txt"
CURVES_CSV_FILENAME: Final = "sse_curves.csv"
PREDICTIONS_CSV_FILENAME: Final = "predictions.csv"
DATASET_FILENAME: Final = "dataset.nssd"
DATASET_CSV_FILENAME: Final = "dataset.csv"
CHECKPOINT_FILENAME: Final = "checkpoint.nssm"
ADAPTED_CHECKPOINT_FILENAME: Final = "adapted.nssm"
CONFIG_FILENAME: Final = "config.yaml"

# Evaluation modes
MODE_FIG3: Final = "fig3"
MODE_TABLE1: Final = "table1"
FIG3_METHODS: Final = (METHOD_MAML, METHOD_XFER, METHOD_SSM, METHOD_ALL_NOADAPT)
