"""WAV reader/writer: round trips, downmix, and the error taxonomy."""
import struct

import numpy as np
import pytest

from sva.dsp.types import Waveform
from sva.dsp.wavio import decode_wav_bytes, encode_wav_bytes, read_wav, write_wav
from sva.errors import CorruptHeaderError, UnsupportedFormatError, WavIoError


def _sine(freq=440.0, seconds=1.0, rate=32000, amp=0.5):
    t = np.arange(round(seconds * rate)) / rate
    return amp * np.sin(2 * np.pi * freq * t)


def _raw_wav(fmt_code, channels, rate, bits, payload, fmt_extra=b""):
    fmt = struct.pack("<HHIIHH", fmt_code, channels, rate,
                      rate * channels * bits // 8, channels * bits // 8, bits) + fmt_extra
    body = (b"WAVE"
            + b"fmt " + struct.pack("<I", len(fmt)) + fmt
            + b"data" + struct.pack("<I", len(payload)) + payload)
    return b"RIFF" + struct.pack("<I", len(body)) + body


def test_float32_round_trip_is_sample_exact(tmp_path):
    samples = _sine().astype(np.float32).astype(np.float64)
    path = tmp_path / "sine.wav"
    write_wav(path, Waveform(samples, 32000))
    back = read_wav(path)
    assert back.sample_rate_hz == 32000
    assert np.array_equal(back.samples, samples)


def test_write_clamps_out_of_range_samples(tmp_path):
    path = tmp_path / "hot.wav"
    write_wav(path, Waveform(np.array([1.5, -2.0, 0.25]), 16000))
    back = read_wav(path)
    assert back.samples[0] == 1.0
    assert back.samples[1] == -1.0
    assert back.samples[2] == 0.25


def test_stereo_float32_downmixes_by_averaging():
    frames = np.array([0.2, 0.4] * 100, dtype="<f4").tobytes()
    wave = decode_wav_bytes(_raw_wav(3, 2, 48000, 32, frames))
    assert wave.sample_rate_hz == 48000
    assert len(wave) == 100
    np.testing.assert_allclose(wave.samples, 0.3, atol=1e-7)


def test_pcm16_scaling():
    payload = np.array([0, 16384, -32768, 32767], dtype="<i2").tobytes()
    wave = decode_wav_bytes(_raw_wav(1, 1, 16000, 16, payload))
    np.testing.assert_allclose(
        wave.samples, [0.0, 0.5, -1.0, 32767 / 32768], atol=1e-9)


def test_truncated_header_is_corrupt():
    with pytest.raises(CorruptHeaderError):
        decode_wav_bytes(b"RIFF\x00\x00")


def test_wrong_magic_is_corrupt():
    with pytest.raises(CorruptHeaderError):
        decode_wav_bytes(b"OGGS" + b"\x00" * 64)


def test_truncated_data_chunk_is_corrupt():
    good = _raw_wav(1, 1, 16000, 16, np.zeros(64, dtype="<i2").tobytes())
    with pytest.raises(CorruptHeaderError):
        decode_wav_bytes(good[:-10])


def test_missing_fmt_chunk_is_corrupt():
    body = b"WAVE" + b"data" + struct.pack("<I", 4) + b"\x00" * 4
    with pytest.raises(CorruptHeaderError):
        decode_wav_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)


def test_unsupported_bit_depth():
    payload = b"\x00" * 96
    with pytest.raises(UnsupportedFormatError):
        decode_wav_bytes(_raw_wav(1, 1, 16000, 24, payload))


def test_unsupported_channel_count():
    payload = np.zeros(30, dtype="<i2").tobytes()
    with pytest.raises(UnsupportedFormatError):
        decode_wav_bytes(_raw_wav(1, 3, 16000, 16, payload))


def test_read_missing_file(tmp_path):
    with pytest.raises(WavIoError):
        read_wav(tmp_path / "nope.wav")


def test_encode_decode_identity_for_float32_values():
    w = Waveform(_sine(freq=97.0).astype(np.float32).astype(np.float64), 24000)
    assert np.array_equal(decode_wav_bytes(encode_wav_bytes(w)).samples, w.samples)
