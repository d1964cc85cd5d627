"""Uniform client protocol for the language-model and text-to-audio backends.

A BackendConfig with endpoint "mock" (optionally "mock#<profile>") yields a
deterministic in-process backend for offline runs and tests; any other
endpoint is treated as the base URL of the JSON-over-HTTP wire protocol
described in the README.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from sva.dsp.types import Waveform

BACKEND_KINDS = ("mllm", "sfx-audio", "bgm-audio")
AUDIO_KINDS = ("sfx-audio", "bgm-audio")
ALLOWED_SAMPLE_RATES = (16000, 24000, 32000, 44100, 48000)
MAX_RETRIES_LIMIT = 5
MAX_GENERATION_DURATION_S = 120.0

API_KEY_ENV_VAR = "SVA_API_KEY"


@dataclass(frozen=True)
class BackendConfig:
    kind: str
    endpoint: str
    api_key: str | None = None
    timeout_s: float = 30.0
    max_retries: int = 2
    target_sample_rate_hz: int | None = None

    def __post_init__(self):
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
        if not 0 <= self.max_retries <= MAX_RETRIES_LIMIT:
            raise ValueError(f"max_retries must be in [0, {MAX_RETRIES_LIMIT}]")
        if self.kind in AUDIO_KINDS:
            if self.target_sample_rate_hz not in ALLOWED_SAMPLE_RATES:
                raise ValueError(
                    f"audio backends need target_sample_rate_hz in {ALLOWED_SAMPLE_RATES}")

    @property
    def is_mock(self) -> bool:
        return self.endpoint == "mock" or self.endpoint.startswith("mock#")

    @property
    def mock_profile(self) -> str:
        _, _, profile = self.endpoint.partition("#")
        return profile or "default"


@dataclass
class CallInfo:
    """One completed backend call, kept for the run report."""

    op: str
    retries: int


def make_client(cfg: BackendConfig):
    if cfg.is_mock:
        from sva.gateway.mock import MockAudioClient, MockMllmClient

        return MockMllmClient(cfg) if cfg.kind == "mllm" else MockAudioClient(cfg)
    from sva.gateway.http import HttpBackendClient

    return HttpBackendClient(cfg)


def describe_image(cfg: BackendConfig, image: bytes, prompt: str) -> str:
    return make_client(cfg).describe_image(image, prompt)


def complete_text(cfg: BackendConfig, prompt: str) -> str:
    return make_client(cfg).complete_text(prompt)


def generate_audio(cfg: BackendConfig, prompt: str, duration_s: float) -> Waveform:
    return make_client(cfg).generate_audio(prompt, duration_s)


__all__ = [
    "ALLOWED_SAMPLE_RATES",
    "API_KEY_ENV_VAR",
    "AUDIO_KINDS",
    "BACKEND_KINDS",
    "BackendConfig",
    "CallInfo",
    "complete_text",
    "describe_image",
    "generate_audio",
    "make_client",
]
