"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``AKLT_GRAPHS_PURE`` is set to a non-empty value other
than ``0``, the pure-Python twin is used.  Both expose the same functions.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - exercised only without a build
    _compiled = None


def _want_pure() -> bool:
    return os.environ.get("AKLT_GRAPHS_PURE", "") not in ("", "0")


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module: ``"compiled"``, ``"python"`` or the default choice."""
    if name is None:
        name = "python" if _want_pure() or _compiled is None else "compiled"
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


backend = get_backend()
BACKEND = "compiled" if backend is _compiled else "python"
HAVE_COMPILED = _compiled is not None
