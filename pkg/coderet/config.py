import os

# === General Config ===
TOY_DIR = os.path.join(os.path.dirname(__file__), "toy")
CORPUS_ROOT = os.path.join(TOY_DIR, "corpus")
QUERIES_PATH = os.path.join(TOY_DIR, "queries.jsonl")
GROUPS_PATH = os.path.join(TOY_DIR, "groups.json")
RESULTS_FOLDER = "runs"
SEED = 13
SUPPORTED_LANGUAGES = ("python", "java", "go", "javascript", "ruby", "php")
LANGUAGES = ("python", "java")
PARSE_WORKERS = 4

LANGUAGE_EXTENSIONS = {
    ".py": "python",
    ".java": "java",
    ".go": "go",
    ".js": "javascript",
    ".jsx": "javascript",
    ".mjs": "javascript",
    ".rb": "ruby",
    ".php": "php",
}

# === Comment Cleaning ===
MIN_COMMENT_TOKENS = 4
CODE_COMMENT_THRESHOLD = 0.5  # share of code-looking tokens that marks commented-out code
LINTER_PATTERN = r"^(linter|lint:|noqa|eslint|pylint|checkstyle)"

# Frozen so runs are reproducible; compared after name normalization.
TRIVIAL_FUNCTION_NAMES = [
    "__getter__", "__setter__", "getter", "setter", "get", "set",
    "__get__", "__set__", "__getattr__", "__setattr__", "__getattribute__",
    "__delattr__", "__str__", "__repr__", "__eq__", "__ne__", "__hash__",
    "toString", "equals", "hashCode",
]

# === Pair Mining (Matcher / CrossModel) ===
TAU1 = 0.75
TAU2 = 0.998
TAU2_KEEP_FRACTION = None  # e.g. 0.6 keeps the top 60% of C_Doc scores
MINING_TOP_K = 5
MATCHER_TEMPERATURE = 0.05
MATCHER_EPOCHS = 2
MATCHER_BATCH_SIZE = 16  # 256 at full scale
MATCHER_LR = 1e-2  # 2e-5 when fine-tuning a pretrained transformer
MATCHER_DIM = 32
TOKEN_DROPOUT = 0.1
NEGATIVE_RATIO = 1
CROSS_EPOCHS = 2
CROSS_BATCH_SIZE = 16
CROSS_LR = 2e-2
CROSS_DIM = 16
# CrossModel starts as a lexical scorer: sigmoid(6 * jaccard - 2) crosses 0.5 at jaccard 1/3
CROSS_EMBED_SCALE = 0.1
CROSS_LEXICAL_PRIOR = 6.0
CROSS_BIAS_PRIOR = -2.0
DENOISE = True

# Dropped before the CrossModel compares two functions across languages.
CODE_KEYWORDS = frozenset([
    # python
    "and", "as", "assert", "async", "await", "break", "class", "continue", "def", "del", "elif",
    "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda",
    "nonlocal", "not", "or", "pass", "raise", "return", "try", "while", "with", "yield",
    "none", "true", "false", "self", "cls",
    # java
    "abstract", "boolean", "byte", "case", "catch", "char", "default", "do", "double", "extends",
    "final", "float", "implements", "instanceof", "int", "interface", "long", "native", "new",
    "null", "package", "private", "protected", "public", "short", "static", "super", "switch",
    "synchronized", "this", "throw", "throws", "transient", "void", "volatile", "override",
])

# === Encoder ===
EMBED_DIM = 64
VOCAB_SIZE = 20000
MAX_TEXT_LEN = 128
MAX_CODE_LEN = 320
UNK_TOKEN = "<unk>"

# === Pre-training ===
BATCH_SIZE = 64
PRETRAIN_STEPS = 2000
PRETRAIN_LR = 5e-3
WEIGHT_DECAY = 0.01
WARMUP_STEPS = 20
MODALITY_MIX = (1 / 3, 1 / 3, 1 / 3)  # uni, doc, comment
HYBRID_LANGUAGES = True
PRETRAIN_TEMPERATURE = 20.0  # multiplies the cosine scores; at 1.0 the negatives barely repel
LOG_EVERY = 100
DIAGNOSTIC_PAIRS = 256

# === Fine-tuning ===
FINETUNE_STRATEGY = "inbatch"
FINETUNE_STEPS = 300
FINETUNE_LR = 2e-3
FINETUNE_BATCH_SIZE = 32
FINETUNE_TEMPERATURE = 20.0
HARD_NEGATIVE_K = 7
REFRESH_EVERY = 500

# === AR2 ===
AR2_NEGATIVE_SIZE = 7
AR2_POOL_SIZE = 32
AR2_G_LR = 1e-3
AR2_D_LR = 1e-2
AR2_G_STEPS = 160  # 16000 at full scale
AR2_D_STEPS = 40  # 4000 at full scale
AR2_ROUNDS = 2
AR2_BATCH_SIZE = 16
AR2_WARMUP_PROPORTION = 0.1
AR2_G_SUPERVISED_WEIGHT = 1.0

# === Evaluation ===
EVAL_MODE = "text"
