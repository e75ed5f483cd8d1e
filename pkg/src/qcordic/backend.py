"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-Python twin is
the fallback and the reference for bit-exactness.  Selection happens once at
import; per-call overrides go through kernels_for.
"""

from . import _kernels_py

try:
    from . import _kernels
except ImportError:
    _kernels = None

HAVE_COMPILED = _kernels is not None

kernels = _kernels if HAVE_COMPILED else _kernels_py


def backend_name() -> str:
    return "compiled" if kernels is not _kernels_py else "pure"


def kernels_for(params):
    """Pick the kernel set able to hold this datapath in 64-bit words.

    The widest intermediate is the final scaling product, bounded by
    2^(guard_int_bits + 2*frac_bits + 1); past 62 bits the pure-Python
    kernels (arbitrary-precision ints) take over.
    """
    if HAVE_COMPILED and params.guard_int_bits + 2 * params.frac_bits + 1 <= 62:
        return _kernels
    return _kernels_py
