"""Backend selection: compiled extension when available, numpy otherwise.

The compiled core is optional; both backends expose the same kernel
signatures (see _core_py).  Set VESSELSAFE_BACKEND=python to force the
fallback, e.g. for benchmarking or debugging.
"""

from __future__ import annotations

import os

from . import _core_py

try:
    from . import _core as _compiled
except ImportError:
    _compiled = None


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if _compiled is not None else ("python",)


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (default: best available)."""
    if name is None:
        name = os.environ.get("VESSELSAFE_BACKEND")
    if name is None:
        return _compiled if _compiled is not None else _core_py
    if name == "python":
        return _core_py
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled backend requested but the extension is not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}; expected 'compiled' or 'python'")


def default_backend_name() -> str:
    return get_backend().BACKEND_NAME
