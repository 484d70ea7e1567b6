"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
numpy versions in ``_pykernels`` are used. Set ``PERSEUSFILTER_KERNELS=python``
to force the fallback.
"""
import os

from . import _pykernels

python_backend = _pykernels
compiled_backend = None

if os.environ.get("PERSEUSFILTER_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if active is compiled_backend else "python"


def get_backend(name=None):
    """Return the kernel module called ``name`` ("cython" or "python"), or the active one."""
    if name is None:
        return active
    if name == "python":
        return python_backend
    if name == "cython":
        if compiled_backend is None:
            raise RuntimeError("compiled kernels are not available; build with `pip install -e .`")
        return compiled_backend
    raise ValueError(f"unknown kernel backend {name!r}")


greedy_filter = active.greedy_filter
greedy_filter_sorted = active.greedy_filter_sorted
simulate_episode = active.simulate_episode
