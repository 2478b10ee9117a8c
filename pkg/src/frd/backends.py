"""Texture-kernel backend selection.

The compiled extension is preferred when importable; setting the environment
variable ``FRD_PURE_PYTHON=1`` (or calling :func:`set_backend`) forces the
numpy fallback. Both backends implement the identical kernel contract.
"""

from __future__ import annotations

import os

from frd import _texture_py

try:
    from frd import _texture_fast
except ImportError:
    _texture_fast = None

if os.environ.get("FRD_PURE_PYTHON"):
    _active = _texture_py
else:
    _active = _texture_fast if _texture_fast is not None else _texture_py


def active():
    """The currently selected kernel module."""
    return _active


def available() -> tuple:
    """Names of the importable backends."""
    names = ["python"]
    if _texture_fast is not None:
        names.insert(0, "compiled")
    return tuple(names)


def set_backend(name: str):
    """Select a backend by name ('compiled' or 'python'). Returns the module."""
    global _active
    if name == "python":
        _active = _texture_py
    elif name == "compiled":
        if _texture_fast is None:
            raise RuntimeError("compiled texture kernels are not available")
        _active = _texture_fast
    else:
        raise ValueError(f"unknown backend {name!r}")
    return _active
