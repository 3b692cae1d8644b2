"""Kernel backend selection.

The compiled extension is used when it built; otherwise the pure-Python
kernels take over. STYLEMIRROR_PURE=1 forces the fallback, and set_backend()
switches at runtime (used by the benchmark and the parity tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels_cy
except ImportError:
    _kernels_cy = None


def _pick(name: str):
    if name == "pure":
        return _kernels_py
    if name == "native":
        if _kernels_cy is None:
            raise RuntimeError("compiled kernels are not available")
        return _kernels_cy
    if name == "auto":
        return _kernels_cy if _kernels_cy is not None else _kernels_py
    raise ValueError(f"unknown kernel backend {name!r}")

_impl = _pick("pure" if os.environ.get("STYLEMIRROR_PURE") == "1" else "auto")


def set_backend(name: str) -> None:
    """Select 'pure', 'native', or 'auto'."""
    global _impl
    _impl = _pick(name)


def backend_name() -> str:
    return "native" if _impl is _kernels_cy else "pure"


def native_available() -> bool:
    return _kernels_cy is not None


def scan_unigrams(tokens, offsets, vocab_size):
    return _impl.scan_unigrams(tokens, offsets, vocab_size)


def scan_level(tokens, offsets, prev_pos, width):
    return _impl.scan_level(tokens, offsets, prev_pos, width)
