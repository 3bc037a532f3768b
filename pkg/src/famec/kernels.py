"""Selects the fitness-kernel backend at import time.

The compiled extension is preferred when it built; otherwise the vectorized
numpy fallback is used. Both expose fitness_batch with the same contract, and
set_backend allows forcing one explicitly (used by the benchmark and tests).
"""

from __future__ import annotations

from types import ModuleType

from . import _core_py

try:
    from . import _core
except ImportError:
    _core = None

_active: ModuleType = _core if _core is not None else _core_py


def available_backends() -> list[str]:
    names = ["python"]
    if _core is not None:
        names.insert(0, "compiled")
    return names


def active_backend() -> str:
    return "compiled" if _core is not None and _active is _core else "python"


def get_module(name: str) -> ModuleType:
    if name == "python":
        return _core_py
    if name == "compiled":
        if _core is None:
            raise ValueError("compiled backend is not available")
        return _core
    raise ValueError(f"unknown backend {name!r}; expected 'compiled' or 'python'")


def set_backend(name: str) -> None:
    """Force a backend: 'compiled', 'python', or 'auto' for the import-time pick."""
    global _active
    if name == "auto":
        _active = _core if _core is not None else _core_py
        return
    _active = get_module(name)


def fitness_batch(*args, **kwargs):
    return _active.fitness_batch(*args, **kwargs)
