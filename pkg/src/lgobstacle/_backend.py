"""Backend switch for the compiled kernels.

``LG_BACKEND=numba`` (default) compiles the hot loops with numba; ``LG_BACKEND=numpy``
uses vectorised numpy / scipy equivalents.  The choice is read once at import.
"""
import os

_requested = os.environ.get("LG_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"LG_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA = _requested == "numba" and _numba is not None
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(fn):
    """Compile ``fn`` when the numba backend is active, else return it untouched."""
    if USE_NUMBA:
        return _numba.njit(cache=True, nogil=True)(fn)
    return fn
