"""Select the SGD kernel backend at import time.

The compiled extension is preferred; the numpy fallback keeps the package
usable from a source tree without a compiler. Set MOTIFCLASS_BACKEND=python
to force the fallback (e.g. for benchmarking).
"""

from __future__ import annotations

import logging
import os

from . import _sgd_py

log = logging.getLogger(__name__)

if os.environ.get("MOTIFCLASS_BACKEND", "").lower() == "python":
    _impl = _sgd_py
else:
    try:
        from . import _sgd_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        log.info("compiled SGD kernel unavailable; using numpy fallback")
        _impl = _sgd_py

BACKEND: str = _impl.BACKEND
run_steps = _impl.run_steps


def available_backends() -> list[str]:
    out = ["python"]
    try:
        from . import _sgd_cy  # noqa: F401
        out.append("cython")
    except ImportError:
        pass
    return out


def get_backend(name: str):
    """Return a specific backend module (for benchmarks and cross-checks)."""
    if name == "python":
        return _sgd_py
    if name == "cython":
        from . import _sgd_cy
        return _sgd_cy
    raise ValueError(f"unknown backend {name!r}")
