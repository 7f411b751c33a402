"""Kernel dispatch: numba when available and not disabled, numpy otherwise."""
from .. import _env
from . import _numpy

NAMES = (
    "g_value",
    "square_interval",
    "sheared_intervals",
    "angle_stats",
    "circle_hits_cantor",
    "circle_hits_batch",
    "counter_uniforms",
    "annulus_hit_count",
    "classify_raw",
    "classify_pairs",
    "pair_table_exact",
    "distorted_pair_classes",
    "rho_windows",
)

ZERO, CIRCLE, SINE, LINEAR = _numpy.ZERO, _numpy.CIRCLE, _numpy.SINE, _numpy.LINEAR
NOT_CLASSIFIED = _numpy.NOT_CLASSIFIED

_jit_mod = None
if not _env.pure_numpy_requested():
    import os

    # numba sizes its pool from NUMBA_NUM_THREADS at import; let the cap raise it too
    _cap = _env.thread_cap()
    if _cap is not None and "NUMBA_NUM_THREADS" not in os.environ:
        os.environ["NUMBA_NUM_THREADS"] = str(_cap)
    try:
        from . import _jit as _jit_mod
    except ImportError:  # numba missing
        _jit_mod = None

BACKEND = "numba" if _jit_mod is not None else "numpy"
_impl = _jit_mod if _jit_mod is not None else _numpy

if _jit_mod is not None:
    import numba

    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    _cap = _env.thread_cap()
    if _cap is not None:
        numba.set_num_threads(min(_cap, numba.config.NUMBA_NUM_THREADS))

g_value = _impl.g_value
square_interval = _impl.square_interval
sheared_intervals = _impl.sheared_intervals
angle_stats = _impl.angle_stats
circle_hits_cantor = _impl.circle_hits_cantor
circle_hits_batch = _impl.circle_hits_batch
counter_uniforms = _impl.counter_uniforms
annulus_hit_count = _impl.annulus_hit_count
classify_raw = _impl.classify_raw
classify_pairs = _impl.classify_pairs
pair_table_exact = _impl.pair_table_exact
distorted_pair_classes = _impl.distorted_pair_classes
rho_windows = _impl.rho_windows


def backends():
    """Map backend name to kernel module, for benchmarks and cross-checks."""
    out = {"numpy": _numpy}
    if _jit_mod is not None:
        out["numba"] = _jit_mod
    return out
