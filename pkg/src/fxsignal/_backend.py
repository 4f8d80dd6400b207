"""Kernel backend selection: compiled extension when available, numpy otherwise.

Set FXSIGNAL_BACKEND=python (or =c) to force a backend; forcing the compiled
backend when the extension is missing raises at import.
"""

from __future__ import annotations

import os

from . import _kernels_py

_forced = os.environ.get("FXSIGNAL_BACKEND", "").lower()

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

if _forced == "python":
    _impl = _kernels_py
    BACKEND = "python"
elif _forced == "c":
    if _compiled is None:
        raise ImportError("FXSIGNAL_BACKEND=c but the compiled extension is not built")
    _impl = _compiled
    BACKEND = "c"
elif _compiled is not None:
    _impl = _compiled
    BACKEND = "c"
else:
    _impl = _kernels_py
    BACKEND = "python"

lstm_forward_loop = _impl.lstm_forward_loop
lstm_backward_loop = _impl.lstm_backward_loop


def backend_name() -> str:
    return BACKEND
