"""Pick the loop implementation at import time.

``ZOSPG_BACKEND=python`` forces the pure-Python loop, ``=cython`` makes a
missing extension an error; the default uses the extension when present.
"""

import os

from . import _core_py

try:
    from . import _core as _core_c
except ImportError:  # extension not built
    _core_c = None

_BACKENDS = {"python": _core_py}
if _core_c is not None:
    _BACKENDS["cython"] = _core_c


def available() -> list[str]:
    return sorted(_BACKENDS)


def get(name: str | None = None):
    """Return ``(name, module)`` for the requested or default backend."""
    if name is None:
        name = os.environ.get("ZOSPG_BACKEND", "auto").lower()
    if name == "auto":
        name = "cython" if "cython" in _BACKENDS else "python"
    try:
        return name, _BACKENDS[name]
    except KeyError:
        raise RuntimeError(
            f"backend {name!r} is not available (have: {', '.join(available())})"
        ) from None


DEFAULT, _ = get()
