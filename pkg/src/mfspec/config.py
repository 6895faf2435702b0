"""Run-time limits shared by the tree sums and the exhaustive sweeps."""
import os

DEFAULT_BUDGET = 100_000_000
DEFAULT_N_MAX = 12
DEFAULT_SPLIT = 2
# rows of a single chunk in the vectorized tree sums
CHUNK_ROWS = 1 << 20


def budget() -> int:
    """Maximum number of leaves a tree sum may visit (env MFSPEC_BUDGET)."""
    raw = os.environ.get("MFSPEC_BUDGET")
    if not raw:
        return DEFAULT_BUDGET
    value = int(float(raw))
    if value <= 0:
        raise ValueError("MFSPEC_BUDGET must be positive")
    return value
