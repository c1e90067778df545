EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT_ERROR = 2
EXIT_ANALYSIS_ERROR = 3

# 图节点
START_ID = "start"
START_LABEL = "start"
END_LABEL = "end"
ROOT_SITE = "root"

INIT_MEMBER = "<init>"
STATIC_RECEIVER_PREFIX = "<static:"
TEMP_PREFIX = "$t"
THIS = "this"

# 产物文件名
FACTS_DIR = "facts"
FRAMEWORK_FILE = "framework.json"
USAGES_DIR = "usages"
IFD_FILE = "ifd.json"
SOUND_DIR = "sound"
UNSOUND_FILE = "unsound.json"
GRAAMS_DIR = "graams"
FSPEC_FILE = "fspec.json"
CURVE_FILE = "curve.csv"
REPORT_FILE = "report.csv"

CURVE_COLUMNS = ["k", "cum_graam_nodes", "fspec_nodes", "fspec_edges"]
REPORT_COLUMNS = ["task", "k", "accuracy", "n_cases", "seed"]

TASKS = ("next", "missed", "misuse")
DEFAULT_SPLIT = 0.8
