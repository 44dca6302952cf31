"""Backend selection for the lattice kernels.

Numba is used when it imports cleanly and ``QSPFORGE_DISABLE_NUMBA`` is not
set to a truthy value. The pure-numpy path is always importable, so both can
be compared side by side (see ``benchmarks/bench_kernels.py``).
"""

import os

_FALSY = {"", "0", "false", "no", "off"}

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def decorator(func):
            return func

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return decorator


def numba_requested() -> bool:
    flag = os.environ.get("QSPFORGE_DISABLE_NUMBA", "").strip().lower()
    return flag in _FALSY


USE_NUMBA = NUMBA_AVAILABLE and numba_requested()
