# Command line arguments.
ALPHA_ARG = "--alpha"
BURN_IN_ARG = "--burn-in"
CONFIG_ARG = "--config"
CONFIG_SHORT_ARG = "-c"
CONSTANT_ARG = "--set"
CONSTANT_SHORT_ARG = "-s"
EPS_ARG = "--eps"
GAMMA1_ARG = "--gamma1"
GAMMA2_ARG = "--gamma2"
HORIZON_ARG = "--horizon"
LAMBDA1_ARG = "--lambda1"
OUT_ARG = "--out"
OUT_SHORT_ARG = "-o"
QUIET_ARG = "--quiet"
QUIET_SHORT_ARG = "-q"
RULE_ARG = "--rule"
SCHEDULE_ARG = "--schedule"
SWITCH_STEP_ARG = "--switch-step"
THEOREM_ARG = "--theorem"
VARIANCES_ARG = "--variances"
VERSION_ARG = "--version"
VERSION_SHORT_ARG = "-v"
WEIGHTS_ARG = "--weights"


# Sub-commands.
BENCHMARK = "benchmark"
BOUND = "bound"
SAMPLE = "sample"
TUNE = "tune"
VALIDATE = "validate"


# Formatting.
TABLE_WIDTH = 48


# Sampler kinds.
PROX_MALA = "proxMALA"
SGLD = "SGLD"
SPGLD = "SPGLD"
SSGLD = "SSGLD"
ULA = "ULA"
SAMPLER_KINDS = (ULA, SGLD, SSGLD, SPGLD, PROX_MALA)


# Admissibility variants.
VARIANT_SGLD = "SGLD-family"
VARIANT_ULA = "ULA"


# Oracle modes.
SMOOTH = "smooth"
SUBGRADIENT = "subgradient"


# Step and weight schedules.
CONSTANT = "constant"
GAMMA = "gamma"
PIECEWISE = "piecewise"
POLY = "poly"
SCHEDULE_KINDS = (CONSTANT, POLY, PIECEWISE)
WEIGHT_KINDS = (CONSTANT, POLY, GAMMA)


# Tuning rules.
SPGLD_COCO = "spgld-coco"
SPGLD_STRCONV = "spgld-strconv"
SPGLD_STRCONV_UNIFORM = "spgld-strconv-uniform"
SPGLD_UNIFORM = "spgld-uniform"
SSGLD_COCO = "ssgld-coco"
SSGLD_UNIFORM = "ssgld-uniform"
ULA_CONVEX = "ula-convex"
ULA_STRCONV_KL = "ula-strconv-kl"
ULA_STRCONV_W2 = "ula-strconv-w2"
TUNING_RULES = (
    ULA_CONVEX,
    ULA_STRCONV_W2,
    ULA_STRCONV_KL,
    SSGLD_UNIFORM,
    SSGLD_COCO,
    SPGLD_UNIFORM,
    SPGLD_COCO,
    SPGLD_STRCONV,
    SPGLD_STRCONV_UNIFORM,
)


# Bound theorems.
SPGLD_KL = "spgld-kl"
SPGLD_W2 = "spgld-w2"
SSGLD_KL = "ssgld-kl"
ULA_AVG_KL = "ula-avg-kl"
ULA_BIAS = "ula-bias"
ULA_RATE = "ula-rate"
ULA_W2 = "ula-w2"
THEOREMS = (
    ULA_AVG_KL,
    ULA_W2,
    ULA_BIAS,
    SSGLD_KL,
    SPGLD_KL,
    SPGLD_W2,
    ULA_RATE,
)
VARIANCE_THEOREMS = (SSGLD_KL, SPGLD_KL, SPGLD_W2)


# Functionals.
FIRST_COORDINATE = "I1"
MEAN_SQUARE = "I2"
SQUARED_NORM = "sq_norm"
DEFAULT_FUNCTIONALS = (FIRST_COORDINATE, MEAN_SQUARE)


# Priors, as (a1, a2).
CUSTOM = "custom"
P1 = "p1"
P12 = "p12"
PRIORS = {
    P1: (1.0, 0.0),
    P12: (0.9, 0.1),
}


# Target kinds.
LAPLACE = "laplace"
LOGISTIC = "logistic"
QUADRATIC = "quadratic"
TARGET_KINDS = (QUADRATIC, LAPLACE, LOGISTIC)


# Numerical tolerances.
ADMISSIBILITY_RTOL = 1e-12
CHECK_TOLERANCE = 1e-9
EIGENVALUE_TOLERANCE = 1e-12
MAX_DENSE_DIM = 1000
MAX_SUBSETS = 10 ** 6
MINIMIZER_TOLERANCE = 1e-10


# Prox-MALA tuning.
TARGET_ACCEPTANCE = 0.5
ACCEPTANCE_BAND = 0.05
TUNING_ROUNDS = 200
TUNING_STEPS = 500


# Experiment defaults.
BATCH_DIVISORS = (1, 10, 100)
BENCHMARK_ITERATIONS = 10 ** 6
CHECKPOINT_COUNT = 20
MIN_REFERENCE_BUDGET = 10 ** 5
REFERENCE_BATCHES = 50
REFERENCE_BUDGET = 10 ** 6
REPLICATIONS = 100
TAUS = (0.01, 0.1, 1.0)


# Verification suite.
VALIDATION_EPSILONS = (0.5, 0.1)
VALIDATION_SAMPLES = 50
VALIDATION_STEPS = 10 ** 4


# Synthetic dataset scales, as (rows, cols).
DATASET_SCALES = {
    "australian": (690, 34),
    "heart": (270, 14),
    "musk": (476, 166),
}


# Dataset ingestion.
INTERCEPT_NAME = "intercept"
LABEL_COLUMN = "y"
VARIANCE_COLUMN = "variance"


# Output files.
CACHE_DIRECTORY = "cache"
ERRORS_FILE = "errors.csv"
ESTIMATES_FILE = "estimates.csv"
METADATA_FILE = "metadata.json"
REPORTS_FILE = "reports.jsonl"
RUN_FILE = "run.json"
SUMMARY_FILE = "summary.csv"
TRACE_FILE = "trace.csv"
VALIDATION_FILE = "validation.csv"


# Effective passes.
EFFECTIVE_PASSES_DEFINITION = "iterations x batch / rows"
