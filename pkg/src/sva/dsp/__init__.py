"""Numerical signal processing for the post-production chain."""

from sva.dsp.ops import (
    DEFAULT_GATE_THRESHOLD,
    DEFAULT_Q,
    apply_biquad,
    apply_gain,
    biquad_coefficients,
    fit_duration,
    frame_rms,
    mix,
    noise_gate,
    resample,
    spectral_denoise,
    stft,
)
from sva.dsp.types import GateDecision, Spectrogram, StftParams, Waveform
from sva.dsp.wavio import read_wav, write_wav

__all__ = [
    "DEFAULT_GATE_THRESHOLD",
    "DEFAULT_Q",
    "GateDecision",
    "Spectrogram",
    "StftParams",
    "Waveform",
    "apply_biquad",
    "apply_gain",
    "biquad_coefficients",
    "fit_duration",
    "frame_rms",
    "mix",
    "noise_gate",
    "read_wav",
    "resample",
    "spectral_denoise",
    "stft",
    "write_wav",
]
