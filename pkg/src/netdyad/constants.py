"""Numeric defaults shared by the estimators, diagnostics and simulations.

Values in the MONTE CARLO block define the default coverage-study design;
the rest are engineering defaults.
"""

# === ESTIMATORS ===
ESTIMATOR_KINDS: tuple[str, ...] = ("ehw", "dyadic", "network")
KERNEL_KINDS: tuple[str, ...] = ("rectangular", "bartlett")
DEFAULT_LEVEL: float = 0.95
DEFAULT_PSD_EPSILON: float = 0.005
DEFAULT_CONDITION_LIMIT: float = 1e12
SYMMETRY_TOLERANCE: float = 1e-12

# === BANDWIDTH RULE ===
# b_M = 2 log(M) / log(max(average degree, 1.05))
BANDWIDTH_LOG_SCALE: float = 2.0
BANDWIDTH_DEGREE_FLOOR: float = 1.05
BANDWIDTH_DEGREE_SOURCES: tuple[str, ...] = ("dyad", "node")

# === DENSENESS DIAGNOSTICS ===
ALPHA_GRID_LOW: float = 1.01
ALPHA_GRID_HIGH: float = 8.0
ALPHA_GRID_POINTS: int = 40

# === GRAPH GENERATION ===
GRAPH_KINDS: tuple[str, ...] = ("barabasi_albert", "erdos_renyi")
SPEC_ALIASES: dict[str, str] = {"ba": "barabasi_albert", "er": "erdos_renyi"}
BA_SEED_MULTIPLIER: float = 5.0  # seed graph has ceil(5 sqrt(N)) nodes
DEFAULT_BA_SEED_LAMBDA: float = 1.0

# === MONTE CARLO ===
DEFAULT_BETA_TRUE: float = 1.0
DEFAULT_MC_BANDWIDTH: float = 2.0  # rectangular kernel, lag truncation two
DEFAULT_MC_REPS: int = 5000
GRID_NODE_COUNTS: tuple[int, ...] = (500, 1000, 5000)
GRID_GRAPH_PARAMS: tuple[int, ...] = (1, 2, 3)
MAX_REPLICATION_ATTEMPTS: int = 100
SHOCK_MODES: tuple[str, ...] = ("shared", "ordered")

# === SHELL MACHINERY ===
DEFAULT_SHELL_BLOCK_SIZE: int = 2048

# === OUTPUT ===
TEXT_FLOAT_FORMAT: str = "{:.4f}"
OUTPUT_FORMATS: tuple[str, ...] = ("csv", "text")
