"""Signal-chain operations.

Everything here is a pure function over immutable Waveform values: STFT
analysis, framewise RMS and the energy gate, RBJ biquad filters, the
spectral-gate denoiser, gain, duration fitting, resampling, and mixing.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from sva.dsp import kernels
from sva.dsp.types import GateDecision, Spectrogram, StftParams, Waveform
from sva.errors import (
    CutoffOutOfRangeError,
    EmptyTrackListError,
    EmptyWaveformError,
    LengthMismatchError,
    NegativeFactorError,
    RateMismatchError,
    TooShortError,
)

DEFAULT_GATE_THRESHOLD = 0.3
DEFAULT_Q = 1.0 / math.sqrt(2.0)

# Spectral gate tuning. The floor margin is part of the denoiser contract;
# the smoothing radii keep gate decisions stable against single-bin variance
# (without them a magnitude threshold cannot suppress stationary noise deeply).
DENOISE_FLOOR_MARGIN = 2.0
DENOISE_QUIET_FRACTION = 0.10
_DENOISE_SMOOTH_FRAMES = 2  # +/- frames around each cell
_DENOISE_SMOOTH_BINS = 2    # +/- bins around each cell
_DENOISE_FLOOR_MEDIAN_BINS = 25

CROSSFADE_S = 0.05


@lru_cache(maxsize=8)
def _hann(n_fft: int) -> np.ndarray:
    win = np.hanning(n_fft)
    win.setflags(write=False)
    return win


def _frame_signal(x: np.ndarray, n_fft: int, hop: int) -> np.ndarray:
    """Full frames only; inputs shorter than one frame are zero-padded to one."""
    if x.shape[0] < n_fft:
        x = np.concatenate([x, np.zeros(n_fft - x.shape[0])])
    n_frames = 1 + (x.shape[0] - n_fft) // hop
    return np.lib.stride_tricks.sliding_window_view(x, n_fft)[::hop][:n_frames]


def _stft_complex(x: np.ndarray, n_fft: int, hop: int) -> np.ndarray:
    frames = _frame_signal(x, n_fft, hop)
    return np.fft.rfft(frames * _hann(n_fft), axis=1)


def _istft(spec: np.ndarray, n_fft: int, hop: int, length: int) -> np.ndarray:
    """Weighted overlap-add synthesis; exact inverse wherever frames overlap."""
    win = _hann(n_fft)
    frames = np.fft.irfft(spec, n=n_fft, axis=1) * win
    n_frames = frames.shape[0]
    total = (n_frames - 1) * hop + n_fft
    num = kernels.overlap_add(np.ascontiguousarray(frames), hop, total)
    wsq = np.ascontiguousarray(np.tile(win * win, (n_frames, 1)))
    den = kernels.overlap_add(wsq, hop, total)
    out = np.where(den > 1e-10, num / np.maximum(den, 1e-300), 0.0)
    if total < length:
        out = np.concatenate([out, np.zeros(length - total)])
    return out[:length]


def stft(w: Waveform, params: StftParams = StftParams()) -> Spectrogram:
    """Hann-windowed magnitude spectra, one row per frame."""
    mags = np.abs(_stft_complex(w.samples, params.n_fft, params.hop))
    return Spectrogram(mags, params, w.sample_rate_hz)


def frame_rms(w: Waveform, params: StftParams = StftParams()) -> np.ndarray:
    """Per-frame RMS over raw (unwindowed) samples, aligned with the STFT framing."""
    if len(w) == 0:
        return np.empty(0)
    x = w.samples
    if x.shape[0] < params.n_fft:
        x = np.concatenate([x, np.zeros(params.n_fft - x.shape[0])])
    return kernels.frame_rms(np.ascontiguousarray(x), params.n_fft, params.hop)


def noise_gate(w: Waveform, threshold: float = DEFAULT_GATE_THRESHOLD,
               params: StftParams = StftParams()) -> GateDecision:
    """Keep the track iff its mean frame RMS stays at or below the threshold."""
    if len(w) == 0:
        raise EmptyWaveformError("cannot gate an empty waveform")
    mean_rms = float(np.mean(frame_rms(w, params)))
    return GateDecision(kept=mean_rms <= threshold, mean_rms=mean_rms, threshold=threshold)


def biquad_coefficients(kind: str, cutoff_hz: float, sample_rate_hz: int,
                        q: float = DEFAULT_Q) -> tuple[float, float, float, float, float]:
    """RBJ cookbook coefficients (b0, b1, b2, a1, a2), normalized by a0."""
    w0 = 2.0 * math.pi * cutoff_hz / sample_rate_hz
    cos_w0 = math.cos(w0)
    alpha = math.sin(w0) / (2.0 * q)
    if kind == "lowpass":
        b0 = (1.0 - cos_w0) / 2.0
        b1 = 1.0 - cos_w0
        b2 = b0
    elif kind == "highpass":
        b0 = (1.0 + cos_w0) / 2.0
        b1 = -(1.0 + cos_w0)
        b2 = b0
    else:
        raise ValueError(f"unknown filter kind {kind!r}")
    a0 = 1.0 + alpha
    a1 = -2.0 * cos_w0
    a2 = 1.0 - alpha
    return (b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0)


def apply_biquad(w: Waveform, kind: str, cutoff_hz: float, q: float = DEFAULT_Q) -> Waveform:
    """Second-order filter (transposed direct form II), zero initial state."""
    if not 0.0 < cutoff_hz < w.sample_rate_hz / 2.0:
        raise CutoffOutOfRangeError(
            f"cutoff {cutoff_hz} Hz outside (0, {w.sample_rate_hz / 2}) at "
            f"{w.sample_rate_hz} Hz")
    b0, b1, b2, a1, a2 = biquad_coefficients(kind, cutoff_hz, w.sample_rate_hz, q)
    y = kernels.biquad_df2t(np.ascontiguousarray(w.samples), b0, b1, b2, a1, a2)
    return Waveform(y, w.sample_rate_hz)


def _box_smooth(a: np.ndarray, half_t: int, half_f: int) -> np.ndarray:
    """Mean over a (2*half_t+1) x (2*half_f+1) box, edge cells averaging fewer neighbours."""
    total = np.zeros_like(a)
    count = np.zeros_like(a)
    n_t, n_f = a.shape
    for dt in range(-half_t, half_t + 1):
        t_src = slice(max(0, -dt), n_t - max(0, dt))
        t_dst = slice(max(0, dt), n_t - max(0, -dt))
        for df in range(-half_f, half_f + 1):
            f_src = slice(max(0, -df), n_f - max(0, df))
            f_dst = slice(max(0, df), n_f - max(0, -df))
            total[t_dst, f_dst] += a[t_src, f_src]
            count[t_dst, f_dst] += 1.0
    return total / count


def _median_smooth(v: np.ndarray, size: int) -> np.ndarray:
    """Running median over `size` taps with reflected edges (removes narrowband bumps)."""
    half = size // 2
    padded = np.pad(v, half, mode="reflect")
    windows = np.lib.stride_tricks.sliding_window_view(padded, size)
    return np.median(windows, axis=1)


def spectral_denoise(w: Waveform, suppression_db: float = -25.0,
                     params: StftParams = StftParams()) -> Waveform:
    """Spectral gate: attenuate time-frequency cells near the noise floor.

    The floor is taken per bin from the quietest 10% of frames (ranked by
    frame energy) and median-smoothed across frequency so narrowband signal
    cannot inflate its own floor. Cells whose box-smoothed magnitude falls
    below floor x margin are scaled by 10^(suppression_db/20); kept cells
    pass through untouched. Synthesis is Hann overlap-add at hop = n_fft/4,
    trimmed to the input length.
    """
    if suppression_db >= 0:
        raise ValueError("suppression_db must be negative")
    if len(w) < params.n_fft:
        raise TooShortError(f"need at least {params.n_fft} samples, got {len(w)}")

    n_fft = params.n_fft
    hop = n_fft // 4
    spec = _stft_complex(w.samples, n_fft, hop)
    mag = np.abs(spec)
    n_frames = mag.shape[0]

    n_quiet = max(1, math.ceil(DENOISE_QUIET_FRACTION * n_frames))
    frame_energy = np.einsum("fb,fb->f", mag, mag)
    quiet = np.argpartition(frame_energy, n_quiet - 1)[:n_quiet]
    floor = _median_smooth(mag[quiet].mean(axis=0), _DENOISE_FLOOR_MEDIAN_BINS)

    stat = _box_smooth(mag, _DENOISE_SMOOTH_FRAMES, _DENOISE_SMOOTH_BINS)
    gain = 10.0 ** (suppression_db / 20.0)
    gains = np.where(stat < DENOISE_FLOOR_MARGIN * floor[None, :], gain, 1.0)

    y = _istft(spec * gains, n_fft, hop, len(w))
    return Waveform(y, w.sample_rate_hz)


def apply_gain(w: Waveform, factor: float) -> Waveform:
    """Sample-wise multiply; no clamping (that happens at mix/write time)."""
    if factor < 0:
        raise NegativeFactorError(f"gain factor must be >= 0, got {factor}")
    return Waveform(w.samples * factor, w.sample_rate_hz)


def fit_duration(w: Waveform, target_s: float) -> Waveform:
    """Trim to the target, or loop with short complementary crossfades then trim.

    The crossfade is raised-cosine and amplitude-complementary (fades sum to
    one), so looping identical material is exact.
    """
    if len(w) == 0:
        raise EmptyWaveformError("cannot fit an empty waveform")
    if target_s <= 0:
        raise ValueError("target duration must be positive")
    n_target = round(target_s * w.sample_rate_hz)
    if n_target == 0:
        raise ValueError("target duration shorter than one sample")

    x = w.samples
    if x.shape[0] >= n_target:
        return Waveform(x[:n_target].copy(), w.sample_rate_hz)

    n_fade = min(round(CROSSFADE_S * w.sample_rate_hz), x.shape[0] - 1)
    if n_fade > 0:
        ramp = np.arange(1, n_fade + 1) / (n_fade + 1)
        fade_in = np.sin(0.5 * math.pi * ramp) ** 2
        fade_out = 1.0 - fade_in
    out = x
    while out.shape[0] < n_target:
        if n_fade > 0:
            seam = out[-n_fade:] * fade_out + x[:n_fade] * fade_in
            out = np.concatenate([out[:-n_fade], seam, x[n_fade:]])
        else:
            out = np.concatenate([out, x])
    return Waveform(out[:n_target], w.sample_rate_hz)


def resample(w: Waveform, target_hz: int) -> Waveform:
    """Linear-interpolation resampling; identical rate returns a copy."""
    if target_hz <= 0:
        raise ValueError("target rate must be positive")
    if target_hz == w.sample_rate_hz:
        return Waveform(w.samples.copy(), w.sample_rate_hz)
    n_out = round(len(w) * target_hz / w.sample_rate_hz)
    positions = np.arange(n_out) * (w.sample_rate_hz / target_hz)
    y = np.interp(positions, np.arange(len(w)), w.samples)
    return Waveform(y, target_hz)


def mix(tracks: list[Waveform]) -> Waveform:
    """Average the tracks sample-wise and clamp to [-1, 1]."""
    if not tracks:
        raise EmptyTrackListError("need at least one track")
    rate = tracks[0].sample_rate_hz
    if any(t.sample_rate_hz != rate for t in tracks):
        raise RateMismatchError("all tracks must share one sample rate")
    length = len(tracks[0])
    if any(len(t) != length for t in tracks):
        raise LengthMismatchError("all tracks must share one length")
    out = np.mean(np.stack([t.samples for t in tracks]), axis=0)
    return Waveform(np.clip(out, -1.0, 1.0), rate)
