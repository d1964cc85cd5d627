"""Probe input videos and extract/select the key frame that stands in for the content.

Delegates to external ffprobe/ffmpeg binaries (resolved from configuration
or PATH). Key frames are the container's intra-coded frames, materialized
as lossless PNGs; one of them is chosen by a seeded uniform draw so runs
are reproducible.
"""
from __future__ import annotations

import json
import logging
import random
import re
import subprocess
from dataclasses import dataclass
from pathlib import Path

from sva.errors import (
    EmptyFrameListError,
    ExtractToolError,
    NoKeyFramesError,
    NotAVideoError,
    ProbeToolError,
)

logger = logging.getLogger(__name__)

DEFAULT_FFMPEG = "ffmpeg"
DEFAULT_FFPROBE = "ffprobe"

_KEYFRAME_PATTERN = "kf_%04d.png"


@dataclass(frozen=True)
class VideoAsset:
    """A successfully probed input video."""

    path: str
    duration_s: float
    has_video_stream: bool


@dataclass(frozen=True)
class KeyFrame:
    """One extracted intra-coded frame, 0-indexed in presentation order."""

    index: int
    image_path: str
    timestamp_s: float


def _run(cmd: list[str]) -> subprocess.CompletedProcess:
    return subprocess.run(cmd, capture_output=True, text=True)


def tool_version(binary: str) -> str:
    """First line of `<binary> -version`, for the run report."""
    try:
        result = _run([binary, "-version"])
    except OSError:
        return "unavailable"
    first = (result.stdout or result.stderr).splitlines()
    return first[0] if first else "unavailable"


def probe(path: str | Path, ffprobe: str = DEFAULT_FFPROBE) -> VideoAsset:
    """Duration and video-stream presence; rejects audio-only inputs."""
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(str(p))
    cmd = [ffprobe, "-v", "error",
           "-show_entries", "format=duration",
           "-select_streams", "v",
           "-show_entries", "stream=codec_type",
           "-of", "json", str(p)]
    try:
        result = _run(cmd)
    except OSError as e:
        raise ProbeToolError(f"cannot run {ffprobe}: {e}") from e
    if result.returncode != 0:
        raise ProbeToolError(f"{ffprobe} exited {result.returncode} on {p}",
                             stderr=result.stderr)
    try:
        info = json.loads(result.stdout or "{}")
    except json.JSONDecodeError as e:
        raise ProbeToolError(f"unparseable {ffprobe} output for {p}") from e

    streams = info.get("streams") or []
    if not any(s.get("codec_type") == "video" for s in streams):
        raise NotAVideoError(f"{p} has no video stream")
    try:
        duration = float(info.get("format", {}).get("duration"))
    except (TypeError, ValueError):
        raise NotAVideoError(f"{p} has no usable duration") from None
    if duration <= 0:
        raise NotAVideoError(f"{p} reports non-positive duration {duration}")
    return VideoAsset(path=str(p), duration_s=duration, has_video_stream=True)


def _keyframe_timestamps(path: str, ffprobe: str) -> list[float]:
    """Presentation timestamps of the key frames, via a decoder pass that skips the rest."""
    cmd = [ffprobe, "-v", "error", "-select_streams", "v", "-skip_frame", "nokey",
           "-show_entries", "frame=pts_time", "-of", "json", path]
    try:
        result = _run(cmd)
    except OSError as e:
        raise ProbeToolError(f"cannot run {ffprobe}: {e}") from e
    if result.returncode != 0:
        raise ProbeToolError(f"{ffprobe} exited {result.returncode} listing key frames",
                             stderr=result.stderr)
    times = []
    for frame in json.loads(result.stdout or "{}").get("frames", []):
        try:
            times.append(float(frame["pts_time"]))
        except (KeyError, TypeError, ValueError):
            continue
    return sorted(times)


def count_keyframes(path: str | Path, ffprobe: str = DEFAULT_FFPROBE) -> int:
    """Independent I-frame count for the same file (consistency oracle)."""
    return len(_keyframe_timestamps(str(path), ffprobe))


def extract_keyframes(asset: VideoAsset, out_dir: str | Path,
                      ffmpeg: str = DEFAULT_FFMPEG,
                      ffprobe: str = DEFAULT_FFPROBE) -> list[KeyFrame]:
    """One PNG per intra-coded frame, in presentation order, indices from 0."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for stale in out.glob("kf_*.png"):
            stale.unlink()
    except OSError as e:
        raise ExtractToolError(f"cannot prepare {out}: {e}") from e

    cmd = [ffmpeg, "-y", "-nostdin", "-v", "error",
           "-i", asset.path,
           "-vf", "select='eq(pict_type,I)'",
           "-vsync", "vfr", "-frame_pts", "1",
           str(out / _KEYFRAME_PATTERN)]
    try:
        result = _run(cmd)
    except OSError as e:
        raise ExtractToolError(f"cannot run {ffmpeg}: {e}") from e
    if result.returncode != 0:
        raise ExtractToolError(f"{ffmpeg} exited {result.returncode} extracting key frames",
                               stderr=result.stderr)

    def frame_number(p: Path) -> int:
        match = re.search(r"(\d+)", p.stem)
        return int(match.group(1)) if match else 0

    pngs = sorted(out.glob("kf_*.png"), key=frame_number)
    if not pngs:
        raise NoKeyFramesError(f"extraction produced no frames for {asset.path}")

    times = _keyframe_timestamps(asset.path, ffprobe)
    if len(times) != len(pngs):
        logger.warning("key-frame count mismatch for %s: %d PNGs vs %d probed timestamps",
                       asset.path, len(pngs), len(times))

    frames = []
    for i, png in enumerate(pngs):
        t = times[i] if i < len(times) else (times[-1] if times else 0.0)
        frames.append(KeyFrame(index=i, image_path=str(png),
                               timestamp_s=min(max(t, 0.0), asset.duration_s)))
    return frames


def select_keyframe(frames: list[KeyFrame], seed: int) -> KeyFrame:
    """Seeded uniform choice; a pure function of (frames, seed)."""
    if not frames:
        raise EmptyFrameListError("no key frames to select from")
    return frames[random.Random(seed).randrange(len(frames))]
