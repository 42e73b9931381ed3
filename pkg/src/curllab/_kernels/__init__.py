"""Interchangeable finite-volume sweep backends.

``reference`` is the pure-numpy implementation; ``accel`` wraps the
compiled Cython translation of the same sweeps and is preferred when the
extension imported successfully.  Selection happens once here and can be
overridden explicitly with :func:`use_backend`; results are required (and
tested) to agree to rounding.
"""

from . import reference

_BACKENDS = {"reference": reference}

try:
    from . import accel
except ImportError:
    accel = None
else:
    _BACKENDS["accel"] = accel

_active_name = "accel" if accel is not None else "reference"


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def active_backend() -> str:
    return _active_name


def use_backend(name: str) -> None:
    """Select the sweep backend by name ('reference' or 'accel')."""
    global _active_name
    if name not in _BACKENDS:
        raise ValueError(
            f"unknown backend {name!r}; available: {', '.join(available_backends())}")
    _active_name = name


def get_backend(name: str | None = None):
    """The active backend module (or a specific one when name is given)."""
    if name is None:
        name = _active_name
    if name not in _BACKENDS:
        raise ValueError(
            f"unknown backend {name!r}; available: {', '.join(available_backends())}")
    return _BACKENDS[name]
