"""Hot numeric kernels: compiled core with a numpy fallback.

Three inner loops dominate the toolkit's runtime: STFT framing, inverse-STFT
overlap-add (executed once per Griffin-Lim iteration), and the polyphase
resampler tap loop. Both backends implement the same functions with the same
accumulation order; the compiled one (Cython, built by setup.py) is selected
at import when present. Set VOCEVAL_FORCE_FALLBACK=1 to force the numpy
implementation. benchmarks/bench_kernels.py compares the two.
"""

import os

from . import _py

if os.environ.get("VOCEVAL_FORCE_FALLBACK", "") == "1":
    _speed = None
else:
    try:
        from . import _speed
    except ImportError:
        _speed = None

_impl = _py if _speed is None else _speed

frame_signal = _impl.frame_signal
overlap_add = _impl.overlap_add
resample_apply = _impl.resample_apply


def backend() -> str:
    """Name of the active backend: 'compiled' or 'fallback'."""
    return "compiled" if _impl is _speed else "fallback"


def backends() -> dict:
    """All importable backends, keyed by name (for tests and benchmarks)."""
    out = {"fallback": _py}
    if _speed is not None:
        out["compiled"] = _speed
    return out
