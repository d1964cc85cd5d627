"""Muxing: stream-copied video plus AAC audio in an MP4."""
import json
import subprocess

import numpy as np
import pytest

from sva.dsp.types import Waveform
from sva.dsp.wavio import write_wav
from sva.errors import MissingInputError, OutputUnwritableError
from sva.mux import MuxRequest, mux

from conftest import FFPROBE, requires_tools


def _probe_streams(path):
    result = subprocess.run(
        [FFPROBE, "-v", "error", "-count_frames",
         "-show_entries", "stream=codec_type,codec_name,bit_rate,nb_read_frames",
         "-show_entries", "format=duration", "-of", "json", str(path)],
        capture_output=True, text=True, check=True)
    return json.loads(result.stdout)


@pytest.fixture(scope="module")
def noise_wav(tmp_path_factory):
    rng = np.random.default_rng(8)
    path = tmp_path_factory.mktemp("audio") / "noise5s.wav"
    write_wav(path, Waveform(rng.uniform(-0.5, 0.5, 5 * 32000), 32000))
    return path


@requires_tools
class TestMux:
    def test_output_has_one_video_and_one_aac_stream(self, fixture_video, noise_wav, tmp_path):
        out = tmp_path / "merged.mp4"
        result = mux(MuxRequest(str(fixture_video), str(noise_wav), str(out)))
        assert out.exists()
        assert result.duration_s == pytest.approx(5.0, abs=0.1)
        info = _probe_streams(out)
        kinds = sorted(s["codec_type"] for s in info["streams"])
        assert kinds == ["audio", "video"]
        audio = next(s for s in info["streams"] if s["codec_type"] == "audio")
        assert audio["codec_name"] == "aac"

    def test_aac_bitrate_within_15_percent_of_target(self, fixture_video, noise_wav, tmp_path):
        out = tmp_path / "merged.mp4"
        mux(MuxRequest(str(fixture_video), str(noise_wav), str(out), audio_bitrate=192_000))
        audio = next(s for s in _probe_streams(out)["streams"]
                     if s["codec_type"] == "audio")
        assert abs(int(audio["bit_rate"]) - 192_000) <= 0.15 * 192_000

    def test_video_stream_copied_not_reencoded(self, fixture_video, noise_wav, tmp_path):
        before = next(s for s in _probe_streams(fixture_video)["streams"]
                      if s["codec_type"] == "video")
        out = tmp_path / "merged.mp4"
        mux(MuxRequest(str(fixture_video), str(noise_wav), str(out)))
        after = next(s for s in _probe_streams(out)["streams"]
                     if s["codec_type"] == "video")
        assert after["codec_name"] == before["codec_name"]
        assert after["nb_read_frames"] == before["nb_read_frames"]

    def test_rerun_produces_same_topology_and_duration(self, fixture_video, noise_wav, tmp_path):
        out = tmp_path / "merged.mp4"
        first = mux(MuxRequest(str(fixture_video), str(noise_wav), str(out)))
        second = mux(MuxRequest(str(fixture_video), str(noise_wav), str(out)))
        assert first.duration_s == second.duration_s
        info = _probe_streams(out)
        assert sorted(s["codec_type"] for s in info["streams"]) == ["audio", "video"]

    def test_missing_audio(self, fixture_video, tmp_path):
        with pytest.raises(MissingInputError):
            mux(MuxRequest(str(fixture_video), str(tmp_path / "no.wav"),
                           str(tmp_path / "o.mp4")))

    def test_missing_video(self, noise_wav, tmp_path):
        with pytest.raises(MissingInputError):
            mux(MuxRequest(str(tmp_path / "no.mp4"), str(noise_wav),
                           str(tmp_path / "o.mp4")))

    def test_unwritable_output_dir(self, fixture_video, noise_wav, tmp_path):
        with pytest.raises(OutputUnwritableError):
            mux(MuxRequest(str(fixture_video), str(noise_wav),
                           str(tmp_path / "missing-dir" / "o.mp4")))


class TestMuxRequest:
    def test_out_path_must_be_mp4(self):
        with pytest.raises(ValueError):
            MuxRequest("v.mp4", "a.wav", "out.mkv")

    def test_bitrate_must_be_positive(self):
        with pytest.raises(ValueError):
            MuxRequest("v.mp4", "a.wav", "out.mp4", audio_bitrate=0)

    def test_default_bitrate_is_192k(self):
        assert MuxRequest("v.mp4", "a.wav", "out.mp4").audio_bitrate == 192_000
