"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
implementation.  Set ``TWOWEIGHT_BACKEND=python`` to force the fallback.
"""
import os

from . import _pykernels

python = _pykernels

try:
    from . import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

if compiled is not None and os.environ.get("TWOWEIGHT_BACKEND", "").lower() != "python":
    active = compiled
    BACKEND = "compiled"
else:
    active = _pykernels
    BACKEND = "python"


def get(name=None):
    """Return the kernel module for ``name`` ('compiled', 'python', or None for active)."""
    if name is None:
        return active
    if name == "python":
        return _pykernels
    if name == "compiled":
        if compiled is None:
            raise ImportError("compiled kernels are not built")
        return compiled
    raise ValueError(f"unknown backend {name!r}")


def luxemburg_blocks(*args):
    return active.luxemburg_blocks(*args)


def heap_sums(leaf):
    return active.heap_sums(leaf)


def heap_to_cells_max(heap, offset, out):
    return active.heap_to_cells_max(heap, offset, out)


def hl_maximal(f, mass, offsets):
    return active.hl_maximal(f, mass, offsets)
