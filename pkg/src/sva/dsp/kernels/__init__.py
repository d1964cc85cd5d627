"""Kernel backend selection: compiled extension when present, reference fallback otherwise.

Set SVA_KERNEL_BACKEND=python to force the fallback (or =compiled to insist
on the extension and fail loudly if it is missing).
"""
import os

from sva.dsp.kernels import _reference

_requested = os.environ.get("SVA_KERNEL_BACKEND", "").strip().lower()

if _requested == "python":
    _impl = _reference
elif _requested == "compiled":
    from sva.dsp import _kernels as _impl  # type: ignore[no-redef]
else:
    try:
        from sva.dsp import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _reference

BACKEND = "python" if _impl is _reference else "compiled"

biquad_df2t = _impl.biquad_df2t
overlap_add = _impl.overlap_add
frame_rms = _impl.frame_rms

__all__ = ["BACKEND", "biquad_df2t", "overlap_add", "frame_rms"]
