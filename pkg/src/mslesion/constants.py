"""Project-wide constants."""

CONFIG_FILE = "mslesion.toml"
MANIFEST_FILE = "manifest.yaml"
RUN_MANIFEST_FILE = "run.json"
SCHEMA_VERSION = 1

MVOL_MAGIC = "MVOL1"
CKPT_MAGIC = "MCKPT1"
MVOL_SUFFIX = ".mvol"

PHANTOM_MODALITIES: tuple[str, ...] = ("flair", "t1", "t2")

# Phantom intensity model
BACKGROUND_INTENSITY = 0.0
BRAIN_INTENSITY = 0.5
LESION_INTENSITY: dict[str, float] = {"flair": 0.9, "t1": 0.2, "t2": 0.9}
BRAIN_SEMI_AXIS_FRACTION = 0.4
MAX_PLACEMENT_RETRIES = 200

DEFAULT_THRESHOLD = 0.5
DEFAULT_CONNECTIVITY = 26

# Optimisation schedule
DEFAULT_LR0 = 1e-4
DEFAULT_DECAY = 0.95
DEFAULT_DECAY_STEPS = 400
DEFAULT_BATCH_SIZE = 15
DEFAULT_MAX_EPOCHS = 1000

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
BN_MOMENTUM = 0.9
BN_EPS = 1e-5

STAPLE_INIT = 0.99
STAPLE_MAX_ITER = 100
STAPLE_TOL = 1e-6

TRAIN_LOG_FILE = "train_log.tsv"
TRAIN_REPORT_FILE = "train_report.json"
MODEL_FILE = "model.ckpt"
MODEL_CONFIG_FILE = "model_config.json"
MEMBER_DIGEST_FILE = "member.sha256"
MEMBERS_DIR = "members"
PREDICTIONS_DIR = "predictions"
REPORTS_DIR = "reports"
METRICS_TSV_FILE = "metrics.tsv"
METRICS_JSON_FILE = "metrics.json"
ABLATION_TSV_FILE = "ablation.tsv"
TRUTH_NAME = "truth"
MISSING_VALUE = "NA"
