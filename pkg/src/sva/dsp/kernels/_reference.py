"""NumPy/pure-Python reference kernels.

Semantics must stay identical to the compiled extension in
sva/dsp/_kernels.pyx. The biquad recurrence cannot be vectorized (each
output feeds the next state), so this fallback is the slow path the
compiled kernel exists for.
"""
import numpy as np


def biquad_df2t(x, b0, b1, b2, a1, a2):
    """Transposed direct-form-II biquad with zero initial state."""
    s1 = 0.0
    s2 = 0.0
    out = []
    append = out.append
    for v in np.asarray(x, dtype=np.float64).tolist():
        y = b0 * v + s1
        s1 = b1 * v - a1 * y + s2
        s2 = b2 * v - a2 * y
        append(y)
    return np.asarray(out, dtype=np.float64)


def overlap_add(frames, hop, out_len):
    """Accumulate frame m at offset m*hop; contributions past out_len are dropped."""
    frames = np.asarray(frames, dtype=np.float64)
    out = np.zeros(out_len, dtype=np.float64)
    n_fft = frames.shape[1]
    for m in range(frames.shape[0]):
        start = m * hop
        if start >= out_len:
            break
        stop = min(start + n_fft, out_len)
        out[start:stop] += frames[m, : stop - start]
    return out


def frame_rms(x, n_fft, hop):
    """Per-frame sqrt(mean(x^2)) over full frames only (same framing as the STFT)."""
    x = np.asarray(x, dtype=np.float64)
    n_frames = 1 + (x.shape[0] - n_fft) // hop
    frames = np.lib.stride_tricks.sliding_window_view(x, n_fft)[::hop][:n_frames]
    return np.sqrt(np.mean(frames * frames, axis=1))
