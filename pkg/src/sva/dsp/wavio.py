"""WAV file I/O.

Reads PCM16 and float32 RIFF files with 1 or 2 channels (stereo is downmixed
by averaging); writes mono float32. Hand-rolled because the stdlib wave
module (3.10) cannot write IEEE-float files and we want precise control over
the error taxonomy.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from sva.errors import CorruptHeaderError, UnsupportedFormatError, WavIoError
from sva.dsp.types import Waveform

_FMT_PCM = 1
_FMT_FLOAT = 3


def decode_wav_bytes(data: bytes) -> Waveform:
    """Decode a RIFF/WAVE payload into a mono Waveform."""
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise CorruptHeaderError("not a RIFF/WAVE file")

    fmt = None
    pcm = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise CorruptHeaderError("fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            if len(body) < size:
                raise CorruptHeaderError("data chunk truncated")
            pcm = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None or pcm is None:
        raise CorruptHeaderError("missing fmt or data chunk")

    audio_format, channels, rate, _, _, bits = fmt
    if channels not in (1, 2):
        raise UnsupportedFormatError(f"{channels} channels (only mono/stereo)")
    if rate <= 0:
        raise CorruptHeaderError("non-positive sample rate")

    if audio_format == _FMT_PCM and bits == 16:
        samples = np.frombuffer(pcm, dtype="<i2").astype(np.float64) / 32768.0
    elif audio_format == _FMT_FLOAT and bits == 32:
        samples = np.frombuffer(pcm, dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedFormatError(f"format code {audio_format} at {bits} bits")

    if channels == 2:
        if len(samples) % 2:
            samples = samples[:-1]
        samples = samples.reshape(-1, 2).mean(axis=1)
    return Waveform(samples, rate)


def encode_wav_bytes(w: Waveform) -> bytes:
    """Encode a Waveform as mono float32 RIFF, clamping samples to [-1, 1]."""
    samples = np.clip(w.samples, -1.0, 1.0).astype("<f4")
    payload = samples.tobytes()
    fmt = struct.pack("<HHIIHH", _FMT_FLOAT, 1, w.sample_rate_hz,
                      w.sample_rate_hz * 4, 4, 32)
    fact = struct.pack("<I", len(samples))
    chunks = (
        b"WAVE"
        + b"fmt " + struct.pack("<I", len(fmt)) + fmt
        + b"fact" + struct.pack("<I", len(fact)) + fact
        + b"data" + struct.pack("<I", len(payload)) + payload
    )
    return b"RIFF" + struct.pack("<I", len(chunks)) + chunks


def read_wav(path: str | Path) -> Waveform:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise WavIoError(f"cannot read {path}: {e}") from e
    return decode_wav_bytes(data)


def write_wav(path: str | Path, w: Waveform) -> None:
    try:
        Path(path).write_bytes(encode_wav_bytes(w))
    except OSError as e:
        raise WavIoError(f"cannot write {path}: {e}") from e
