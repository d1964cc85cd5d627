"""HTTP client for the backend wire protocol, with bounded retry/backoff.

Transient failures (timeouts, connection errors, 429/5xx) are retried up to
max_retries with exponential backoff; the whole call is bounded by a hard
deadline of (max_retries + 1) * timeout_s. 401/403 are never retried.
"""
from __future__ import annotations

import base64
import os
import time

import requests

from sva.dsp import ops, wavio
from sva.errors import (
    AuthError,
    BackendTimeoutError,
    BadAudioPayloadError,
    CorruptHeaderError,
    EmptyReplyError,
    HttpStatusError,
    UnsupportedFormatError,
)
from sva.gateway import API_KEY_ENV_VAR, AUDIO_KINDS, MAX_GENERATION_DURATION_S, BackendConfig, CallInfo

_TRANSIENT_STATUSES = frozenset({429, 500, 502, 503, 504})
_BACKOFF_BASE_S = 0.25


class HttpBackendClient:
    """Safe for concurrent use; per-call state stays on the stack."""

    def __init__(self, cfg: BackendConfig, backoff_base_s: float = _BACKOFF_BASE_S):
        self.cfg = cfg
        self._backoff_base_s = backoff_base_s
        api_key = os.environ.get(API_KEY_ENV_VAR) or cfg.api_key
        self._headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._session = requests.Session()
        self.calls: list[CallInfo] = []

    def describe_image(self, image: bytes, prompt: str) -> str:
        self._require_kind("mllm")
        payload = {
            "prompt": prompt,
            "image_b64": base64.b64encode(image).decode("ascii"),
        }
        return self._complete(payload, op="describe_image")

    def complete_text(self, prompt: str) -> str:
        self._require_kind("mllm")
        return self._complete({"prompt": prompt, "image_b64": None}, op="complete_text")

    def generate_audio(self, prompt: str, duration_s: float):
        if self.cfg.kind not in AUDIO_KINDS:
            raise ValueError(f"generate_audio needs an audio backend, got {self.cfg.kind!r}")
        if not 0 < duration_s <= MAX_GENERATION_DURATION_S:
            raise ValueError(
                f"duration_s must be in (0, {MAX_GENERATION_DURATION_S}], got {duration_s}")
        response, retries = self._post("/v1/generate",
                                       {"prompt": prompt, "duration_s": duration_s})
        body = response.content
        if not body:
            raise BadAudioPayloadError("empty audio response body")
        try:
            wave = wavio.decode_wav_bytes(body)
        except (CorruptHeaderError, UnsupportedFormatError) as e:
            raise BadAudioPayloadError(f"undecodable audio payload: {e}") from e
        if len(wave) == 0:
            raise BadAudioPayloadError("zero-length audio payload")
        if wave.sample_rate_hz != self.cfg.target_sample_rate_hz:
            wave = ops.resample(wave, self.cfg.target_sample_rate_hz)
        self.calls.append(CallInfo("generate_audio", retries))
        return wave

    def _complete(self, payload: dict, op: str) -> str:
        response, retries = self._post("/v1/complete", payload)
        try:
            text = response.json().get("text", "")
        except ValueError as e:
            raise EmptyReplyError(f"reply body was not JSON: {e}") from e
        if not isinstance(text, str) or not text.strip():
            raise EmptyReplyError("backend returned an empty reply")
        self.calls.append(CallInfo(op, retries))
        return text

    def _require_kind(self, kind: str) -> None:
        if self.cfg.kind != kind:
            raise ValueError(f"operation needs a {kind!r} backend, got {self.cfg.kind!r}")

    def _post(self, path: str, payload: dict) -> tuple[requests.Response, int]:
        url = self.cfg.endpoint.rstrip("/") + path
        deadline = time.monotonic() + (self.cfg.max_retries + 1) * self.cfg.timeout_s
        attempt = 0
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise BackendTimeoutError(f"deadline exhausted calling {url}")
            last_error: Exception
            try:
                response = self._session.post(
                    url, json=payload, headers=self._headers,
                    timeout=min(self.cfg.timeout_s, remaining))
            except requests.exceptions.Timeout as e:
                last_error = BackendTimeoutError(f"timeout calling {url}")
                last_error.__cause__ = e
            except requests.exceptions.ConnectionError as e:
                last_error = HttpStatusError(0, f"connection error: {e}")
            else:
                status = response.status_code
                if status in (401, 403):
                    raise AuthError(f"backend rejected credentials (HTTP {status})")
                if status == 200:
                    return response, attempt
                last_error = HttpStatusError(status, response.text[:200])
                if status not in _TRANSIENT_STATUSES:
                    raise last_error
            attempt += 1
            if attempt > self.cfg.max_retries:
                raise last_error
            backoff = self._backoff_base_s * 2 ** (attempt - 1)
            time.sleep(max(0.0, min(backoff, deadline - time.monotonic())))
