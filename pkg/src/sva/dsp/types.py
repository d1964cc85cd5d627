"""Value types for the signal chain."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Waveform:
    """Mono PCM, floats nominally in [-1, 1].

    Intermediate processing may exceed the range transiently; samples are
    clamped only when mixing and when written to disk.
    """

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("waveform must be mono (1-D)")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample rate must be positive")
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz


@dataclass(frozen=True)
class StftParams:
    """Analysis framing: Hann window of n_fft samples advancing by hop."""

    n_fft: int = 2048
    hop: int = 512

    def __post_init__(self):
        if self.n_fft <= 0 or (self.n_fft & (self.n_fft - 1)) != 0:
            raise ValueError("n_fft must be a positive power of two")
        if not 0 < self.hop <= self.n_fft:
            raise ValueError("hop must satisfy 0 < hop <= n_fft")

    @property
    def n_bins(self) -> int:
        return self.n_fft // 2 + 1


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """Magnitude spectra, one row per frame, n_fft/2 + 1 bins per row."""

    magnitudes: np.ndarray
    params: StftParams
    sample_rate_hz: int

    def __post_init__(self):
        mags = np.asarray(self.magnitudes, dtype=np.float64)
        if mags.ndim != 2 or mags.shape[1] != self.params.n_bins:
            raise ValueError(f"expected shape (frames, {self.params.n_bins})")
        object.__setattr__(self, "magnitudes", mags)

    @property
    def n_frames(self) -> int:
        return int(self.magnitudes.shape[0])


@dataclass(frozen=True)
class GateDecision:
    """Outcome of the energy gate: kept iff mean frame RMS <= threshold."""

    kept: bool
    mean_rms: float
    threshold: float
