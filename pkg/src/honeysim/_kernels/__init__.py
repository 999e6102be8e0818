"""Kernel backend selection.

The compiled extension is preferred when present; HONEYSIM_PURE=1
forces the pure-Python twin. Both expose the same surface (Stream,
CoreWorld, tally, mix64, IMPL) and are parity-tested against each
other, so everything above this package is backend-agnostic.
"""

import os

from . import pure

if os.environ.get("HONEYSIM_PURE"):
    _impl = pure
else:
    try:
        from . import _accel as _impl
    except ImportError:
        _impl = pure

BACKEND = _impl.IMPL
Stream = _impl.Stream
CoreWorld = _impl.CoreWorld
tally = _impl.tally
mix64 = _impl.mix64


def get_backend(name=None):
    """Return a kernel module by name ("pure" or "compiled").

    name=None returns the default selection. Asking for "compiled"
    when the extension is not built raises ImportError.
    """
    if name is None:
        return _impl
    if name == "pure":
        return pure
    if name == "compiled":
        from . import _accel
        return _accel
    raise ValueError(f"unknown kernel backend: {name!r}")
