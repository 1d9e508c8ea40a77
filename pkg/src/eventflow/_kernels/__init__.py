"""Solver kernel selection.

The compiled extension is used when it imported cleanly; otherwise the
numpy fallback takes over with identical semantics. Set the environment
variable ``EVENTFLOW_FORCE_PYTHON`` (to any non-empty value) before import
to skip the extension, e.g. to benchmark or to debug numeric questions.
"""

import os

from . import _cd_py

if os.environ.get("EVENTFLOW_FORCE_PYTHON"):
    _impl = _cd_py
else:
    try:
        from . import _cd as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _cd_py

BACKEND: str = _impl.BACKEND_NAME
cd_solve = _impl.cd_solve
max_abs_corr = _impl.max_abs_corr


def available_backends() -> tuple[str, ...]:
    """Importable backend names, preferred first."""
    names = ["python"]
    try:
        from . import _cd  # noqa: F401
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return tuple(names)


def get_backend(name: str):
    """Fetch a backend module by name, for benchmarks and parity tests."""
    if name == "python":
        return _cd_py
    if name == "cython":
        from . import _cd

        return _cd
    raise ValueError(f"unknown backend {name!r}")
