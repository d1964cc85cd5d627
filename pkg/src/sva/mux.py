"""Combine the processed audio with the original video into an MP4.

The video stream is copied untouched; the audio is AAC-encoded at the
requested bitrate. Audio is resampled to `audio_sample_rate_hz` at encode
time: AAC tops out at 6144 bits per frame per channel, which at 32 kHz mono
is exactly 192 kb/s, so encoders cannot average near that target unless the
stream runs at 44.1 kHz or above.
"""
from __future__ import annotations

import json
import os
import subprocess
from dataclasses import dataclass
from pathlib import Path

from sva.errors import MissingInputError, MuxToolError, OutputUnwritableError, ProbeToolError

DEFAULT_AUDIO_BITRATE = 192_000
DEFAULT_MUX_SAMPLE_RATE = 48_000


@dataclass(frozen=True)
class MuxRequest:
    video_path: str
    audio_path: str
    out_path: str
    audio_bitrate: int = DEFAULT_AUDIO_BITRATE
    audio_sample_rate_hz: int = DEFAULT_MUX_SAMPLE_RATE

    def __post_init__(self):
        if not self.out_path.endswith(".mp4"):
            raise ValueError("output path must end with .mp4")
        if self.audio_bitrate <= 0:
            raise ValueError("audio bitrate must be positive")
        if self.audio_sample_rate_hz <= 0:
            raise ValueError("audio sample rate must be positive")


@dataclass(frozen=True)
class MuxResult:
    out_path: str
    duration_s: float


def _probe_duration(path: str, ffprobe: str) -> float:
    cmd = [ffprobe, "-v", "error", "-show_entries", "format=duration", "-of", "json", path]
    result = subprocess.run(cmd, capture_output=True, text=True)
    if result.returncode != 0:
        raise ProbeToolError(f"{ffprobe} exited {result.returncode} on {path}",
                             stderr=result.stderr)
    try:
        return float(json.loads(result.stdout)["format"]["duration"])
    except (KeyError, TypeError, ValueError) as e:
        raise ProbeToolError(f"no duration in {ffprobe} output for {path}") from e


def mux(req: MuxRequest, ffmpeg: str = "ffmpeg", ffprobe: str = "ffprobe") -> MuxResult:
    """Stream-copy the video, encode the audio, stop at the shorter stream."""
    for needed in (req.video_path, req.audio_path):
        if not Path(needed).exists():
            raise MissingInputError(f"missing input: {needed}")
    parent = Path(req.out_path).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise OutputUnwritableError(f"cannot write into {parent}")

    cmd = [ffmpeg, "-y", "-nostdin", "-v", "error",
           "-i", req.video_path, "-i", req.audio_path,
           "-c:v", "copy",
           "-c:a", "aac", "-b:a", str(req.audio_bitrate),
           "-ar", str(req.audio_sample_rate_hz),
           "-shortest", req.out_path]
    try:
        result = subprocess.run(cmd, capture_output=True, text=True)
    except OSError as e:
        raise MuxToolError(f"cannot run {ffmpeg}: {e}") from e
    if result.returncode != 0:
        raise MuxToolError(f"{ffmpeg} exited {result.returncode} muxing {req.out_path}",
                           stderr=result.stderr)
    return MuxResult(out_path=req.out_path, duration_s=_probe_duration(req.out_path, ffprobe))
