"""End-to-end orchestration: video in, audio-enabled video out.

Stages run in a fixed order (probe, key frames, describe, optional
personalization, scheme, generate, resample, gate, filter, denoise, gain,
fit, mix, write, mux); every stage's wall time and every intermediate
artifact is recorded so a run can be audited afterwards. With mock backends
and a fixed seed the whole run is deterministic.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from sva import media, mux as muxmod, prompts
from sva.dsp import ops, wavio
from sva.dsp.types import GateDecision, StftParams, Waveform
from sva.errors import NoJsonFoundError, SchemeParseError, StageError
from sva.gateway import BACKEND_KINDS, BackendConfig, CallInfo, make_client
from sva.media import KeyFrame, VideoAsset
from sva.prompts import Personalization, Scheme

logger = logging.getLogger(__name__)

SFX_LABELS = ("sfx1", "sfx2")
BGM_LABEL = "bgm"
REPORT_SCHEMA = 1


@dataclass
class DspSettings:
    """Post-processing knobs; defaults are the published tool settings."""

    gate_threshold: float = 0.3
    highpass_hz: float = 200.0
    lowpass_hz: float = 3000.0
    suppression_db: float = -25.0
    sfx_gain: float = 0.05
    bgm_gain: float = 3.0
    internal_sample_rate_hz: int = 32000
    n_fft: int = 2048
    hop: int = 512
    filter_sfx: bool = True
    filter_bgm: bool = True

    @property
    def stft(self) -> StftParams:
        return StftParams(n_fft=self.n_fft, hop=self.hop)


def default_backends(internal_rate: int = 32000) -> dict[str, BackendConfig]:
    """All-mock backends: offline, deterministic, no network."""
    return {
        "mllm": BackendConfig(kind="mllm", endpoint="mock"),
        "sfx-audio": BackendConfig(kind="sfx-audio", endpoint="mock",
                                   target_sample_rate_hz=internal_rate),
        "bgm-audio": BackendConfig(kind="bgm-audio", endpoint="mock",
                                   target_sample_rate_hz=internal_rate),
    }


@dataclass
class PipelineConfig:
    video_path: str = ""
    out_dir: str = ""
    seed: int = 0
    user_personalization: str | None = None
    backends: dict[str, BackendConfig] = field(default_factory=default_backends)
    dsp: DspSettings = field(default_factory=DspSettings)
    gate_retry_limit: int = 2
    max_generation_s: float = 30.0
    audio_bitrate: int = muxmod.DEFAULT_AUDIO_BITRATE
    mux_sample_rate_hz: int = muxmod.DEFAULT_MUX_SAMPLE_RATE
    ffmpeg: str = media.DEFAULT_FFMPEG
    ffprobe: str = media.DEFAULT_FFPROBE

    def __post_init__(self):
        if sorted(self.backends) != sorted(BACKEND_KINDS):
            raise ValueError(f"backends must contain exactly one of each of {BACKEND_KINDS}")
        if not 0 <= self.gate_retry_limit <= 5:
            raise ValueError("gate_retry_limit must be in [0, 5]")
        if self.max_generation_s <= 0:
            raise ValueError("max_generation_s must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        data = dict(data)
        backends_raw = data.pop("backends", None)
        dsp_raw = data.pop("dsp", None)

        known = {f.name for f in dataclasses.fields(cls)} - {"backends", "dsp"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)

        if backends_raw is not None:
            backends = {}
            for kind, entry in backends_raw.items():
                entry = dict(entry)
                entry.setdefault("kind", kind)
                if entry["kind"] != kind:
                    raise ValueError(f"backend {kind!r} declares mismatched kind {entry['kind']!r}")
                backends[kind] = BackendConfig(**entry)
            kwargs["backends"] = backends

        if dsp_raw is not None:
            dsp_known = {f.name for f in dataclasses.fields(DspSettings)}
            dsp_unknown = set(dsp_raw) - dsp_known
            if dsp_unknown:
                raise ValueError(f"unknown dsp config keys: {sorted(dsp_unknown)}")
            kwargs["dsp"] = DspSettings(**dsp_raw)

        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class GateRecord:
    track: str
    attempt: int
    decision: GateDecision


@dataclass
class StageTiming:
    stage: str
    ms: float


@dataclass
class PipelineReport:
    """Machine-readable record of one run; written as report.json in out_dir."""

    seed: int
    video: VideoAsset | None = None
    frame_count: int = 0
    selected_frame: KeyFrame | None = None
    description: str = ""
    personalization: Personalization | None = None
    scheme: Scheme | None = None
    gate_decisions: list[GateRecord] = field(default_factory=list)
    dropped_tracks: list[str] = field(default_factory=list)
    track_files: dict[str, dict] = field(default_factory=dict)
    mix_file: str | None = None
    output_path: str | None = None
    output_duration_s: float | None = None
    backend_calls: list[CallInfo] = field(default_factory=list)
    timings: list[StageTiming] = field(default_factory=list)
    tool_versions: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "seed": self.seed,
            "video": None if self.video is None else {
                "path": self.video.path, "duration_s": self.video.duration_s},
            "frame_count": self.frame_count,
            "selected_frame": None if self.selected_frame is None else {
                "index": self.selected_frame.index,
                "image_path": self.selected_frame.image_path,
                "timestamp_s": self.selected_frame.timestamp_s},
            "description": self.description,
            "personalization": None if self.personalization is None else {
                "user_input": self.personalization.user_input,
                "keywords": list(self.personalization.keywords),
                "examples": list(self.personalization.examples)},
            "scheme": None if self.scheme is None else json.loads(
                prompts.serialize_scheme(self.scheme)),
            "gate_decisions": [
                {"track": g.track, "attempt": g.attempt, "kept": g.decision.kept,
                 "mean_rms": g.decision.mean_rms, "threshold": g.decision.threshold}
                for g in self.gate_decisions],
            "dropped_tracks": list(self.dropped_tracks),
            "track_files": self.track_files,
            "mix_file": self.mix_file,
            "output_path": self.output_path,
            "output_duration_s": self.output_duration_s,
            "backend_calls": [{"op": c.op, "retries": c.retries} for c in self.backend_calls],
            "timings_ms": [{"stage": t.stage, "ms": t.ms} for t in self.timings],
            "tool_versions": self.tool_versions,
        }


@contextmanager
def _stage(name: str, report: PipelineReport):
    start = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except Exception as e:
        raise StageError(name, e) from e
    finally:
        report.timings.append(StageTiming(name, (time.perf_counter() - start) * 1000.0))


def run(cfg: PipelineConfig, stop_after_scheme: bool = False) -> PipelineReport:
    """Execute the full flow; returns the report (and writes it to out_dir).

    With stop_after_scheme the run ends after scheme parsing (no audio is
    generated and no report file is written); the returned report carries
    the scheme.
    """
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    prompts_dir = out_dir / "prompts"
    prompts_dir.mkdir(exist_ok=True)
    tracks_dir = out_dir / "tracks"
    tracks_dir.mkdir(exist_ok=True)

    report = PipelineReport(seed=cfg.seed)
    report.tool_versions = {
        "ffmpeg": media.tool_version(cfg.ffmpeg),
        "ffprobe": media.tool_version(cfg.ffprobe),
    }

    mllm = make_client(cfg.backends["mllm"])
    sfx_backend = make_client(cfg.backends["sfx-audio"])
    bgm_backend = make_client(cfg.backends["bgm-audio"])

    def save(name: str, text: str) -> None:
        (prompts_dir / name).write_text(text, encoding="utf-8")

    def rel(p: Path) -> str:
        return str(p.relative_to(out_dir))

    with _stage("probe", report):
        asset = media.probe(cfg.video_path, cfg.ffprobe)
        report.video = asset

    with _stage("keyframes", report):
        frames = media.extract_keyframes(asset, out_dir / "frames",
                                         ffmpeg=cfg.ffmpeg, ffprobe=cfg.ffprobe)
        report.frame_count = len(frames)
        selected = media.select_keyframe(frames, cfg.seed)
        report.selected_frame = KeyFrame(selected.index,
                                         rel(Path(selected.image_path)),
                                         selected.timestamp_s)

    with _stage("describe", report):
        image = Path(selected.image_path).read_bytes()
        description_prompt = prompts.render_description_prompt()
        save("description_prompt.txt", description_prompt)
        description = mllm.describe_image(image, description_prompt)
        save("description_reply.txt", description)
        report.description = description

    template = prompts.load_template("scheme-generation")
    if cfg.user_personalization:
        with _stage("personalize", report):
            keyword_prompt = prompts.render_keyword_prompt(cfg.user_personalization)
            save("keyword_prompt.txt", keyword_prompt)
            keyword_reply = mllm.complete_text(keyword_prompt)
            save("keyword_reply.txt", keyword_reply)
            keywords = prompts.parse_keywords(keyword_reply)

            examples_prompt = prompts.render_examples_prompt(cfg.user_personalization)
            save("examples_prompt.txt", examples_prompt)
            examples_reply = mllm.complete_text(examples_prompt)
            save("examples_reply.txt", examples_reply)
            examples = prompts.extract_example_objects(examples_reply)
            if not examples:
                raise NoJsonFoundError("no valid substitute examples in reply")

            personalization = Personalization(user_input=cfg.user_personalization,
                                              keywords=tuple(keywords),
                                              examples=examples)
            template = prompts.personalize_template(template, personalization)
            report.personalization = personalization

    with _stage("scheme", report):
        scheme_prompt = prompts.render_scheme_prompt(description, template)
        save("scheme_prompt.txt", scheme_prompt)
        scheme_reply = mllm.complete_text(scheme_prompt)
        save("scheme_reply.txt", scheme_reply)
        try:
            scheme = prompts.parse_scheme(scheme_reply)
        except SchemeParseError:
            # One fresh attempt against flaky formatting, then give up.
            scheme_reply = mllm.complete_text(scheme_prompt)
            save("scheme_reply_retry.txt", scheme_reply)
            scheme = prompts.parse_scheme(scheme_reply)
        report.scheme = scheme

    if stop_after_scheme:
        report.backend_calls = list(mllm.calls)
        return report

    requested_s = min(asset.duration_s, cfg.max_generation_s)
    track_prompts = {
        "sfx1": scheme.sfx[0],
        "sfx2": scheme.sfx[1],
        BGM_LABEL: scheme.bgm,
    }
    track_backends = {"sfx1": sfx_backend, "sfx2": sfx_backend, BGM_LABEL: bgm_backend}

    with _stage("generate", report):
        with ThreadPoolExecutor(max_workers=3) as pool:
            futures = {label: pool.submit(track_backends[label].generate_audio,
                                          track_prompts[label], requested_s)
                       for label in track_prompts}
            raw = {label: f.result() for label, f in futures.items()}
        for label, wave in raw.items():
            path = tracks_dir / f"{label}_raw.wav"
            wavio.write_wav(path, wave)
            report.track_files[label] = {"raw": [rel(path)]}

    internal = cfg.dsp.internal_sample_rate_hz
    with _stage("resample", report):
        tracks = {label: ops.resample(w, internal) for label, w in raw.items()}

    with _stage("gate", report):
        survivors: dict[str, Waveform] = {}
        for label in SFX_LABELS:
            wave = tracks[label]
            attempt = 0
            decision = ops.noise_gate(wave, cfg.dsp.gate_threshold, cfg.dsp.stft)
            report.gate_decisions.append(GateRecord(label, attempt, decision))
            while not decision.kept and attempt < cfg.gate_retry_limit:
                attempt += 1
                regenerated = track_backends[label].generate_audio(
                    track_prompts[label], requested_s)
                path = tracks_dir / f"{label}_raw_attempt{attempt}.wav"
                wavio.write_wav(path, regenerated)
                report.track_files[label]["raw"].append(rel(path))
                wave = ops.resample(regenerated, internal)
                decision = ops.noise_gate(wave, cfg.dsp.gate_threshold, cfg.dsp.stft)
                report.gate_decisions.append(GateRecord(label, attempt, decision))
            if decision.kept:
                survivors[label] = wave
            else:
                report.dropped_tracks.append(label)
                logger.info("dropping %s: mean RMS %.3f over threshold %.3f after %d attempts",
                            label, decision.mean_rms, decision.threshold, attempt + 1)
        survivors[BGM_LABEL] = tracks[BGM_LABEL]  # BGM is never gated

    with _stage("filter", report):
        for label, wave in survivors.items():
            wants = cfg.dsp.filter_bgm if label == BGM_LABEL else cfg.dsp.filter_sfx
            if wants:
                wave = ops.apply_biquad(wave, "highpass", cfg.dsp.highpass_hz)
                wave = ops.apply_biquad(wave, "lowpass", cfg.dsp.lowpass_hz)
                survivors[label] = wave

    with _stage("denoise", report):
        for label, wave in survivors.items():
            if len(wave) >= cfg.dsp.stft.n_fft:
                wave = ops.spectral_denoise(wave, cfg.dsp.suppression_db, cfg.dsp.stft)
                survivors[label] = wave
            path = tracks_dir / f"{label}_denoised.wav"
            wavio.write_wav(path, wave)
            report.track_files[label]["denoised"] = rel(path)

    with _stage("gain", report):
        for label, wave in survivors.items():
            gain = cfg.dsp.bgm_gain if label == BGM_LABEL else cfg.dsp.sfx_gain
            survivors[label] = ops.apply_gain(wave, gain)

    with _stage("fit", report):
        for label, wave in survivors.items():
            fitted = ops.fit_duration(wave, asset.duration_s)
            survivors[label] = fitted
            path = tracks_dir / f"{label}_processed.wav"
            wavio.write_wav(path, fitted)
            report.track_files[label]["processed"] = rel(path)

    with _stage("mix", report):
        ordered = [survivors[label] for label in (*SFX_LABELS, BGM_LABEL)
                   if label in survivors]
        mixed = ops.mix(ordered)

    mix_path = out_dir / "mix.wav"
    with _stage("write", report):
        wavio.write_wav(mix_path, mixed)
        report.mix_file = rel(mix_path)

    with _stage("mux", report):
        request = muxmod.MuxRequest(video_path=asset.path,
                                    audio_path=str(mix_path),
                                    out_path=str(out_dir / "final.mp4"),
                                    audio_bitrate=cfg.audio_bitrate,
                                    audio_sample_rate_hz=cfg.mux_sample_rate_hz)
        result = muxmod.mux(request, ffmpeg=cfg.ffmpeg, ffprobe=cfg.ffprobe)
        report.output_path = rel(Path(result.out_path))
        report.output_duration_s = result.duration_s

    report.backend_calls = list(mllm.calls) + list(sfx_backend.calls) + list(bgm_backend.calls)
    (out_dir / "report.json").write_text(
        json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return report
