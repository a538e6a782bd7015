"""Kernel selection: the compiled extension when importable, else numpy."""

from __future__ import annotations

from . import _pytree

try:
    from . import _ctree
except ImportError:  # extension not built
    _ctree = None

_BACKENDS = {"python": _pytree}
if _ctree is not None:
    _BACKENDS["compiled"] = _ctree

_active = _ctree if _ctree is not None else _pytree


def available() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def current() -> str:
    return "compiled" if _active is _ctree and _ctree is not None else "python"


def use(name: str) -> None:
    """Switch kernels process-wide (benchmarks and equivalence tests)."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available()}")
    _active = _BACKENDS[name]


def kernel():
    return _active
