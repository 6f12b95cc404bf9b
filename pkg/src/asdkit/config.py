"""Default size caps and budgets.

Every cap below is a default for a keyword argument, never a hard limit;
callers may pass larger values explicitly.  Defaults are sized so that the
full test suite runs in seconds.
"""

# make_projective: number of binary cells
MAX_PROJECTIVE_DIMENSION = 10

# make_linear: word length n
MAX_LINEAR_DIMENSION = 8

# direct products: state count of the result
MAX_PRODUCT_STATES = 4096

# any constructed device: partition count of the result
MAX_DEVICE_PARTITIONS = 20000

# k_reads: partitions accumulated while closing under meets
MAX_KREAD_PARTITIONS = 20000

# backtracking searches: nodes explored before giving up
SEARCH_NODE_BUDGET = 10_000_000

# prescreen: skip the perfectness-index screen above this partition count
PERFECTNESS_SCREEN_MAX_PARTITIONS = 128

# poly_signature: maximum expression depth
MAX_SIGNATURE_DEPTH = 4

# factor_binary audit: largest factor size in the exhaustive cross-check
MAX_FACTOR_STATES = 4

# brute_clique: vertex count beyond which exhaustive search is refused
MAX_BRUTE_VERTICES = 16
