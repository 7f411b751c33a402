"""Runtime switches read from the environment.

FAVARD_LAB_PURE_NUMPY=1   use the vectorised numpy kernels instead of numba
FAVARD_LAB_THREADS=N      cap the numba worker count
"""
import os

_TRUTHY = {"1", "true", "yes", "on"}


def pure_numpy_requested():
    return os.environ.get("FAVARD_LAB_PURE_NUMPY", "").strip().lower() in _TRUTHY


def thread_cap():
    raw = os.environ.get("FAVARD_LAB_THREADS", "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        return None
    return value if value > 0 else None
