"""Kernel backend selection.

The hot evaluation kernels exist twice: a compiled Cython extension
(``boxloss._speedups``) and a pure-Python mirror (``boxloss._kernels_py``).
The compiled one is picked at import when available; both produce
bit-identical results, so everything downstream is backend-agnostic.

Set ``BOXLOSS_BACKEND=python`` or ``BOXLOSS_BACKEND=compiled`` to force a
backend (the latter raises if the extension is missing).
"""

from __future__ import annotations

import os

from boxloss import _kernels_py

__all__ = ["kernels", "BACKEND", "compiled_available", "get_kernels"]


def _load():
    forced = os.environ.get("BOXLOSS_BACKEND", "").strip().lower()
    if forced == "python":
        return _kernels_py
    try:
        from boxloss import _speedups
    except ImportError:
        if forced == "compiled":
            raise RuntimeError(
                "BOXLOSS_BACKEND=compiled but the boxloss._speedups extension "
                "is not built; reinstall with a C compiler available"
            ) from None
        return _kernels_py
    if forced not in ("", "compiled", "auto"):
        raise RuntimeError(f"unknown BOXLOSS_BACKEND value {forced!r}")
    return _speedups


#: Active kernel module, chosen once at import.
kernels = _load()

#: Name of the active backend: "compiled" or "python".
BACKEND: str = kernels.BACKEND_NAME


def compiled_available() -> bool:
    """True when the Cython extension can be imported."""
    try:
        from boxloss import _speedups  # noqa: F401
    except ImportError:
        return False
    return True


def get_kernels(name: str):
    """Fetch a kernel module by name ("python" or "compiled")."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from boxloss import _speedups

        return _speedups
    raise ValueError(f"unknown backend {name!r}")
