"""Whole-pipeline runs against mock backends and a real fixture video."""
import json
import socket

import pytest

from sva.errors import StageError
from sva.gateway import BackendConfig
from sva.pipeline import PipelineConfig, default_backends, run

from conftest import requires_tools

EXPECTED_STAGES = ["probe", "keyframes", "describe", "scheme", "generate", "resample",
                   "gate", "filter", "denoise", "gain", "fit", "mix", "write", "mux"]


def _config(video, out, seed=7, profile=None, **overrides):
    backends = default_backends()
    if profile:
        backends["mllm"] = BackendConfig(kind="mllm", endpoint=f"mock#{profile}")
    return PipelineConfig(video_path=str(video), out_dir=str(out), seed=seed,
                          backends=backends, **overrides)


@requires_tools
class TestRun:
    def test_full_run_report_and_artifacts(self, fixture_video, tmp_path):
        out = tmp_path / "run"
        report = run(_config(fixture_video, out))
        assert report.description.strip()
        assert len(report.scheme.sfx) == 2 and report.scheme.bgm
        assert len(report.gate_decisions) >= 2
        assert report.output_path == "final.mp4"
        assert (out / "final.mp4").exists()
        assert report.output_duration_s == pytest.approx(5.0, abs=0.1)
        assert (out / "mix.wav").exists()
        assert (out / "prompts" / "scheme_prompt.txt").exists()
        data = json.loads((out / "report.json").read_text())
        assert data["schema"] == 1
        assert [t["stage"] for t in data["timings_ms"]] == EXPECTED_STAGES
        frame = data["selected_frame"]
        assert 0 <= frame["timestamp_s"] <= data["video"]["duration_s"]
        assert (out / frame["image_path"]).exists()
        assert all({"op", "retries"} <= set(c) for c in data["backend_calls"])
        assert any(c["op"] == "generate_audio" for c in data["backend_calls"])
        for label in ("sfx1", "sfx2", "bgm"):
            files = data["track_files"][label]
            for key in ("raw", "denoised", "processed"):
                assert key in files

    def test_two_runs_are_byte_identical(self, fixture_video, tmp_path):
        report_a = run(_config(fixture_video, tmp_path / "a"))
        report_b = run(_config(fixture_video, tmp_path / "b"))
        mix_a = (tmp_path / "a" / "mix.wav").read_bytes()
        mix_b = (tmp_path / "b" / "mix.wav").read_bytes()
        assert mix_a == mix_b
        dict_a, dict_b = report_a.to_dict(), report_b.to_dict()
        dict_a.pop("timings_ms"), dict_b.pop("timings_ms")
        assert dict_a == dict_b

    def test_noisy_sfx1_dropped_without_retry_budget(self, fixture_video, tmp_path):
        report = run(_config(fixture_video, tmp_path / "n1",
                             profile="noisy-sfx1", gate_retry_limit=0))
        assert report.dropped_tracks == ["sfx1"]
        flagged = [g for g in report.gate_decisions if g.track == "sfx1"]
        assert len(flagged) == 1 and not flagged[0].decision.kept
        # two tracks survive into the mix: sfx2 and bgm
        assert "processed" not in report.track_files["sfx1"]
        assert "processed" in report.track_files["sfx2"]
        assert "processed" in report.track_files["bgm"]
        assert report.output_path == "final.mp4"

    def test_gate_retries_regenerate_with_same_prompt(self, fixture_video, tmp_path):
        report = run(_config(fixture_video, tmp_path / "n2",
                             profile="noisy-sfx1", gate_retry_limit=2))
        attempts = [g.attempt for g in report.gate_decisions if g.track == "sfx1"]
        assert attempts == [0, 1, 2]  # mock is deterministic, so every retry fails too
        assert report.dropped_tracks == ["sfx1"]
        raw_files = report.track_files["sfx1"]["raw"]
        assert len(raw_files) == 3

    def test_both_sfx_discarded_still_produces_output(self, fixture_video, tmp_path):
        report = run(_config(fixture_video, tmp_path / "n3",
                             profile="noisy-both", gate_retry_limit=0))
        assert sorted(report.dropped_tracks) == ["sfx1", "sfx2"]
        assert report.output_path == "final.mp4"
        assert (tmp_path / "n3" / "final.mp4").exists()

    def test_bgm_is_never_gated(self, fixture_video, tmp_path):
        report = run(_config(fixture_video, tmp_path / "g"))
        assert all(g.track != "bgm" for g in report.gate_decisions)

    def test_personalized_run(self, fixture_video, tmp_path):
        out = tmp_path / "p"
        report = run(_config(fixture_video, out,
                             user_personalization="melancholic atmosphere"))
        assert report.personalization is not None
        assert "Melancholy" in report.personalization.keywords
        assert len(report.personalization.examples) >= 1
        prompt = (out / "prompts" / "scheme_prompt.txt").read_text()
        assert "Melancholy" in prompt
        assert "Mystical Curiosity" not in prompt  # stock examples replaced
        stages = [t.stage for t in report.timings]
        assert "personalize" in stages

    def test_mock_run_uses_no_network(self, fixture_video, tmp_path, monkeypatch):
        def refuse(*args, **kwargs):
            raise AssertionError("network touched during a mock run")

        monkeypatch.setattr(socket.socket, "connect", refuse)
        monkeypatch.setattr(socket, "create_connection", refuse)
        report = run(_config(fixture_video, tmp_path / "offline"))
        assert report.output_path == "final.mp4"

    def test_stage_errors_carry_stage_name(self, tmp_path):
        cfg = _config(tmp_path / "missing.mp4", tmp_path / "x")
        with pytest.raises(StageError) as err:
            run(cfg)
        assert err.value.stage == "probe"

    def test_stop_after_scheme(self, fixture_video, tmp_path):
        out = tmp_path / "dry"
        report = run(_config(fixture_video, out), stop_after_scheme=True)
        assert report.scheme is not None
        assert report.output_path is None
        assert not (out / "report.json").exists()
        assert not (out / "final.mp4").exists()

    def test_scheme_regenerated_once_on_parse_failure(self, fixture_video, tmp_path,
                                                      backend_server):
        # HTTP MLLM that first answers garbage, then a valid scheme.
        backend_server.queue(200, json.dumps({"text": "a plain description"}).encode())
        backend_server.queue(200, json.dumps({"text": "no json in this reply"}).encode())
        scheme = ('{"idea":"Recovered", "SFX":["First sound here","Second sound here"], '
                  '"BGM":"Some calm music"}')
        backend_server.queue(200, json.dumps({"text": scheme}).encode())
        backends = default_backends()
        backends["mllm"] = BackendConfig(kind="mllm", endpoint=backend_server.url,
                                         timeout_s=5.0, max_retries=0)
        out = tmp_path / "flaky"
        cfg = PipelineConfig(video_path=str(fixture_video), out_dir=str(out),
                             seed=1, backends=backends)
        report = run(cfg)
        assert report.scheme.idea == "Recovered"
        assert (out / "prompts" / "scheme_reply_retry.txt").exists()


class TestConfig:
    def test_backends_must_cover_all_kinds(self):
        with pytest.raises(ValueError):
            PipelineConfig(video_path="v", out_dir="o",
                           backends={"mllm": BackendConfig(kind="mllm", endpoint="mock")})

    def test_gate_retry_limit_bounds(self):
        with pytest.raises(ValueError):
            PipelineConfig(video_path="v", out_dir="o", gate_retry_limit=6)

    def test_from_dict_round_trip(self):
        cfg = PipelineConfig.from_dict({
            "video_path": "in.mp4",
            "out_dir": "out",
            "seed": 3,
            "gate_retry_limit": 1,
            "backends": {
                "mllm": {"endpoint": "mock"},
                "sfx-audio": {"endpoint": "mock", "target_sample_rate_hz": 32000},
                "bgm-audio": {"endpoint": "mock", "target_sample_rate_hz": 32000},
            },
            "dsp": {"gate_threshold": 0.25, "lowpass_hz": 2500.0},
        })
        assert cfg.seed == 3
        assert cfg.dsp.gate_threshold == 0.25
        assert cfg.dsp.lowpass_hz == 2500.0
        assert cfg.backends["mllm"].kind == "mllm"

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ValueError):
            PipelineConfig.from_dict({"video_path": "v", "out_dir": "o", "volume": 11})

    def test_from_dict_rejects_unknown_dsp_keys(self):
        with pytest.raises(ValueError):
            PipelineConfig.from_dict({"video_path": "v", "out_dir": "o",
                                      "dsp": {"reverb": True}})

    def test_from_dict_rejects_mismatched_backend_kind(self):
        with pytest.raises(ValueError):
            PipelineConfig.from_dict({
                "video_path": "v", "out_dir": "o",
                "backends": {"mllm": {"kind": "sfx-audio", "endpoint": "mock"}}})
