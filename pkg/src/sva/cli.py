"""Command-line interface: run, probe, and postfx subcommands."""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from sva import __version__, media, pipeline, prompts
from sva.dsp import ops, wavio
from sva.errors import SvaError
from sva.pipeline import DspSettings, PipelineConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sva",
        description="Generate semantically matching SFX and BGM for a silent video.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="full video -> scheme -> audio -> merged video flow")
    run_p.add_argument("--video", help="input video (overrides config)")
    run_p.add_argument("--out", help="output directory (overrides config)")
    run_p.add_argument("--seed", type=int, help="RNG seed for key-frame selection")
    run_p.add_argument("--config", help="pipeline config JSON file")
    run_p.add_argument("--personalize", metavar="TEXT",
                       help="free-text user requirement for the audio scheme")
    run_p.add_argument("--dry-run", action="store_true",
                       help="stop after scheme generation and print the scheme JSON")

    probe_p = sub.add_parser("probe", help="probe a video and print duration/stream facts")
    probe_p.add_argument("video")
    probe_p.add_argument("--ffprobe", default=media.DEFAULT_FFPROBE)

    post_p = sub.add_parser("postfx",
                            help="run the post-processing chain on existing WAV files")
    post_p.add_argument("--sfx", action="append", default=[], metavar="WAV",
                        help="SFX input (repeatable; gated and may be dropped)")
    post_p.add_argument("--bgm", metavar="WAV", help="BGM input (never gated)")
    post_p.add_argument("--out", required=True, help="output directory")
    post_p.add_argument("--duration", type=float,
                        help="target duration in seconds (default: longest input)")
    post_p.add_argument("--config", help="pipeline config JSON (dsp section is used)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args, parser)
        if args.command == "probe":
            return _cmd_probe(args)
        return _cmd_postfx(args, parser)
    except SystemExit as e:  # argparse usage errors / --help
        return int(e.code or 0)
    except (SvaError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


def _cmd_run(args, parser) -> int:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    if args.video:
        cfg.video_path = args.video
    if args.out:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.personalize:
        cfg.user_personalization = args.personalize
    if not cfg.video_path:
        parser.error("run needs --video (or video_path in --config)")
    if not cfg.out_dir:
        parser.error("run needs --out (or out_dir in --config)")

    report = pipeline.run(cfg, stop_after_scheme=args.dry_run)
    if args.dry_run:
        print(prompts.serialize_scheme(report.scheme))
        return 0
    print(f"wrote {Path(cfg.out_dir) / report.output_path}")
    if report.dropped_tracks:
        print(f"dropped after gating: {', '.join(report.dropped_tracks)}")
    return 0


def _cmd_probe(args) -> int:
    asset = media.probe(args.video, ffprobe=args.ffprobe)
    print(json.dumps(dataclasses.asdict(asset)))
    return 0


def _cmd_postfx(args, parser) -> int:
    if not args.sfx and not args.bgm:
        parser.error("postfx needs at least one --sfx or --bgm input")
    settings = (PipelineConfig.from_file(args.config).dsp if args.config
                else DspSettings())
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    tracks: dict[str, object] = {}
    for i, path in enumerate(args.sfx, start=1):
        tracks[f"sfx{i}"] = wavio.read_wav(path)
    if args.bgm:
        tracks["bgm"] = wavio.read_wav(args.bgm)

    internal = settings.internal_sample_rate_hz
    tracks = {label: ops.resample(w, internal) for label, w in tracks.items()}

    kept: dict[str, object] = {}
    for label, wave in tracks.items():
        if label == "bgm":
            kept[label] = wave
            continue
        decision = ops.noise_gate(wave, settings.gate_threshold, settings.stft)
        print(f"{label}: mean_rms={decision.mean_rms:.4f} "
              f"threshold={decision.threshold} kept={decision.kept}")
        if decision.kept:
            kept[label] = wave
    if not kept:
        print("error: no tracks left after gating", file=sys.stderr)
        return 1

    for label, wave in kept.items():
        use_filters = settings.filter_bgm if label == "bgm" else settings.filter_sfx
        if use_filters:
            wave = ops.apply_biquad(wave, "highpass", settings.highpass_hz)
            wave = ops.apply_biquad(wave, "lowpass", settings.lowpass_hz)
        if len(wave) >= settings.stft.n_fft:
            wave = ops.spectral_denoise(wave, settings.suppression_db, settings.stft)
        gain = settings.bgm_gain if label == "bgm" else settings.sfx_gain
        kept[label] = ops.apply_gain(wave, gain)

    target_s = args.duration or max(w.duration_s for w in kept.values())
    fitted = []
    for label in sorted(kept):
        wave = ops.fit_duration(kept[label], target_s)
        wavio.write_wav(out_dir / f"{label}_processed.wav", wave)
        fitted.append(wave)

    mixed = ops.mix(fitted)
    mix_path = out_dir / "mix.wav"
    wavio.write_wav(mix_path, mixed)
    print(f"wrote {mix_path}")
    return 0
