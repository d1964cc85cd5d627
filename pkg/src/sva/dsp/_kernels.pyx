# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot-loop kernels.

Semantics must stay identical to sva.dsp.kernels._reference; the
equivalence is covered by tests and the two are compared by
benchmarks/bench_kernels.py.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def biquad_df2t(double[::1] x, double b0, double b1, double b2,
                double a1, double a2):
    """Transposed direct-form-II biquad with zero initial state."""
    cdef Py_ssize_t n = x.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double s1 = 0.0, s2 = 0.0, v, y
    cdef Py_ssize_t i
    for i in range(n):
        v = x[i]
        y = b0 * v + s1
        s1 = b1 * v - a1 * y + s2
        s2 = b2 * v - a2 * y
        out[i] = y
    return out_arr


def overlap_add(double[:, ::1] frames, Py_ssize_t hop, Py_ssize_t out_len):
    """Accumulate frame m at offset m*hop; contributions past out_len are dropped."""
    cdef Py_ssize_t n_frames = frames.shape[0]
    cdef Py_ssize_t n_fft = frames.shape[1]
    out_arr = np.zeros(out_len, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t m, i, start, stop
    for m in range(n_frames):
        start = m * hop
        if start >= out_len:
            break
        stop = n_fft
        if start + stop > out_len:
            stop = out_len - start
        for i in range(stop):
            out[start + i] += frames[m, i]
    return out_arr


def frame_rms(double[::1] x, Py_ssize_t n_fft, Py_ssize_t hop):
    """Per-frame sqrt(mean(x^2)) over full frames only (same framing as the STFT)."""
    cdef Py_ssize_t n_frames = 1 + (x.shape[0] - n_fft) // hop
    out_arr = np.empty(n_frames, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double acc
    cdef Py_ssize_t m, i, start
    for m in range(n_frames):
        start = m * hop
        acc = 0.0
        for i in range(n_fft):
            acc += x[start + i] * x[start + i]
        out[m] = sqrt(acc / n_fft)
    return out_arr
