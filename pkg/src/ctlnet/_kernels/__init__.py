"""Kernel backend selection.

The hot kernels exist twice: a compiled Cython core (``_core``) and a numpy
fallback (``_fallback``) with identical signatures. The compiled core is
preferred when importable; ``CTLNET_KERNELS=fallback|compiled`` forces the
choice (forcing ``compiled`` raises if the extension is missing).
"""

import os

from ctlnet._kernels import _fallback

_forced = os.environ.get("CTLNET_KERNELS", "").strip().lower()

if _forced == "fallback":
    _impl = _fallback
    BACKEND = "fallback"
elif _forced == "compiled":
    from ctlnet._kernels import _core as _impl  # type: ignore[no-redef]

    BACKEND = "compiled"
elif _forced:
    raise ValueError(
        f"CTLNET_KERNELS must be 'fallback' or 'compiled', got {_forced!r}"
    )
else:
    try:
        from ctlnet._kernels import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "fallback"

sliding_windows_fwd = _impl.sliding_windows_fwd
sliding_windows_bwd = _impl.sliding_windows_bwd
lstm_gates_fwd = _impl.lstm_gates_fwd
lstm_gates_bwd = _impl.lstm_gates_bwd
layernorm_fwd = _impl.layernorm_fwd
layernorm_bwd = _impl.layernorm_bwd
softmax_fwd = _impl.softmax_fwd
softmax_bwd = _impl.softmax_bwd
