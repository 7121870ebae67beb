"""Kernel backend selection.

The hot numeric loops in :mod:`pimaw._kernels` are written once and either
compiled with numba (default when importable) or run as plain numpy code.
Set the environment variable ``PIMAW_BACKEND`` to ``numba`` or ``numpy`` to
force a backend; ``numba`` raises if numba cannot be imported.
"""

import os

ENV_VAR = "PIMAW_BACKEND"


def _resolve():
    choice = os.environ.get(ENV_VAR, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"{ENV_VAR} must be 'numba' or 'numpy' (got {choice!r})"
        )
    if choice == "numpy":
        return "numpy", None
    try:
        import numba
    except ImportError:
        if choice == "numba":
            raise RuntimeError(
                f"{ENV_VAR}=numba requested but numba is not importable"
            )
        return "numpy", None
    return "numba", numba


BACKEND, _numba = _resolve()


def jit(func):
    """Compile ``func`` with numba when active, else return it unchanged."""
    if BACKEND == "numba":
        return _numba.njit(cache=True)(func)
    return func


def active_backend():
    return BACKEND
