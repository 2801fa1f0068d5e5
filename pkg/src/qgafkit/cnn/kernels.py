"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
implementation. ``QGAFKIT_BACKEND=python`` (or ``native``) forces a choice.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py


def _load_native() -> ModuleType | None:
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _kernels


native = _load_native()
python = _kernels_py


def select(name: str | None = None) -> ModuleType:
    name = (name or os.environ.get("QGAFKIT_BACKEND", "auto")).lower()
    if name == "python":
        return python
    if name == "native":
        if native is None:
            raise ImportError("qgafkit.cnn._kernels is not built; reinstall with Cython available")
        return native
    if name != "auto":
        raise ValueError(f"unknown kernel backend {name!r}")
    return native if native is not None else python


backend = select()
BACKEND = backend.NAME


def set_backend(name: str) -> str:
    """Switch the module-level backend; returns the active backend name."""
    global backend, BACKEND
    backend = select(name)
    BACKEND = backend.NAME
    return BACKEND
