"""Backend selection for the banded attention kernel.

The compiled extension is used when it imports; otherwise the numpy
implementation. Both can be requested explicitly by name.
"""
import os

import numpy as np

from . import _kernels_py

try:
    from . import _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

BACKENDS = {"python": _kernels_py}
if _kernels_c is not None:
    BACKENDS["compiled"] = _kernels_c

DEFAULT_BACKEND = "compiled" if _kernels_c is not None else "python"
THREADS_ENV = "SPECBLEND_NUM_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def get_backend(name=None):
    name = name or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


def banded_attention(q, k, v, alpha, scale, want_maps=False, backend=None):
    """Softmax attention restricted to ``|i - j| <= alpha`` on [B, N, D] arrays.

    Returns ``(out, maps)``; ``maps`` is None unless requested.
    """
    q, k, v = (np.ascontiguousarray(a, dtype=np.float64) for a in (q, k, v))
    return get_backend(backend).banded_attention(
        q, k, v, int(alpha), float(scale), bool(want_maps), default_threads()
    )
