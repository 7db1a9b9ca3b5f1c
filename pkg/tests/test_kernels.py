import importlib
import sys

import numpy as np

from specblend import kernels


def test_fallback_selected_without_extension(monkeypatch):
    import specblend

    monkeypatch.setitem(sys.modules, "specblend._kernels_c", None)
    monkeypatch.delattr(specblend, "_kernels_c", raising=False)
    try:
        reloaded = importlib.reload(kernels)
        assert reloaded.DEFAULT_BACKEND == "python"
        assert sorted(reloaded.BACKENDS) == ["python"]
        q = np.random.default_rng(0).standard_normal((2, 5, 3))
        out, _ = reloaded.banded_attention(q, q, q, 1, 0.5)
        assert out.shape == (2, 5, 3)
    finally:
        monkeypatch.undo()
        importlib.reload(kernels)


def test_thread_count_does_not_change_results(monkeypatch, backend):
    r = np.random.default_rng(1)
    q, k, v = r.standard_normal((3, 7, 20, 4))
    monkeypatch.setenv(kernels.THREADS_ENV, "1")
    a, _ = kernels.banded_attention(q, k, v, 3, 0.5, backend=backend)
    monkeypatch.setenv(kernels.THREADS_ENV, "4")
    b, _ = kernels.banded_attention(q, k, v, 3, 0.5, backend=backend)
    assert a.tobytes() == b.tobytes()


def test_bad_thread_env_defaults_to_one(monkeypatch):
    monkeypatch.setenv(kernels.THREADS_ENV, "many")
    assert kernels.default_threads() == 1
