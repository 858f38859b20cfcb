"""Input validation helpers for the estimator and orchestration layers."""

from __future__ import annotations

from .exceptions import DescriptorMismatch
from .modules import ModuleDescriptor, ModuleElement

__all__ = ["ensure_module_elements", "ensure_positive", "ensure_in"]


def ensure_module_elements(X, descriptor: ModuleDescriptor | None = None):
    """Materialize X as a non-string sequence of same-module elements."""
    if isinstance(X, ModuleElement):
        raise TypeError("expected a sequence of module elements, got a single one")
    points = list(X)
    for i, x in enumerate(points):
        if not isinstance(x, ModuleElement):
            raise TypeError(f"X[{i}] is {type(x)!r}, not a ModuleElement")
        if descriptor is None:
            descriptor = x.descriptor
        elif x.descriptor != descriptor:
            raise DescriptorMismatch(f"X[{i}] lives in a different module")
    return points


def ensure_positive(name: str, value, allow_zero: bool = False):
    v = float(value)
    if v < 0.0 or (v == 0.0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be {bound}, got {value!r}")
    return v


def ensure_in(name: str, value, options):
    if value not in options:
        raise ValueError(f"{name} must be one of {sorted(options)}, got {value!r}")
    return value
