"""Deterministic in-process backends for offline runs and tests.

Replies are pure functions of (prompt, duration, fixed internal seed), so
whole-pipeline runs against mocks are byte-reproducible. The audio mock maps
a prompt hash to a small tone mixture (RMS ~= 0.1); BGM additionally gets a
rhythmic noise layer so mock music has the broadband texture real
generators produce. The reserved tokens NOISEBURST (full-scale uniform
noise, RMS ~= 0.58) and SILENCE force the energy gate's discard and keep
paths.

Endpoint "mock" picks the default behaviour; "mock#noisy-sfx1" and
"mock#noisy-both" make the scheme reply carry NOISEBURST SFX prompts.
"""
from __future__ import annotations

import hashlib
import math
import re

import numpy as np

from sva.dsp.types import Waveform
from sva.gateway import AUDIO_KINDS, MAX_GENERATION_DURATION_S, BackendConfig, CallInfo

MAGIC_NOISEBURST = "NOISEBURST"
MAGIC_SILENCE = "SILENCE"

_INTERNAL_SEED = b"sva-mock-v1"

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_JPEG_MAGIC = b"\xff\xd8"

_DESCRIPTIONS = (
    "A ginger cat balances on a weathered wooden fence at dusk, tail curled while leaves drift past.",
    "A narrow mountain stream rushes over mossy rocks under morning mist.",
    "Children fly colorful kites on a windy beach while waves roll in.",
    "A barista pours steamed milk into a cup, drawing a leaf pattern in the foam.",
    "Fireworks bloom over a city skyline reflected in a calm river.",
    "A street musician plays an accordion under warm lamplight as people pass by.",
)

_SCHEMES = (
    '{"idea":"Twilight Patrol", "SFX":["Leaves rustling in a light evening breeze",'
    '"A cat meowing once then purring softly"], "BGM":"A gentle lo-fi groove with mellow '
    'electric piano, soft vinyl hiss and a lazy bass line"}',
    '{"idea":"River Morning", "SFX":["Water burbling over smooth stones",'
    '"Songbirds chirping back and forth nearby"], "BGM":"Calm acoustic guitar fingerpicking '
    'over light hand percussion and warm ambient pads"}',
    '{"idea":"Seaside Play", "SFX":["Waves crashing and receding on wet sand",'
    '"A kite line fluttering taut in the wind"], "BGM":"Bright ukulele strumming with '
    'handclaps, glockenspiel accents and a cheerful whistled melody"}',
    '{"idea":"City Sparks", "SFX":["Fireworks popping and crackling in the distance",'
    '"A crowd gasping and cheering together"], "BGM":"Triumphant brass and rolling timpani '
    'over soaring strings with a festive pulse"}',
)

_NOISY_SCHEMES = {
    "noisy-sfx1":
        '{"idea":"Stress Test", "SFX":["NOISEBURST harsh static wall of sound",'
        '"Waves crashing and receding on wet sand"], "BGM":"Calm acoustic guitar '
        'fingerpicking over light hand percussion and warm ambient pads"}',
    "noisy-both":
        '{"idea":"Double Stress Test", "SFX":["NOISEBURST harsh static wall of sound",'
        '"NOISEBURST crackling broadband interference"], "BGM":"Calm acoustic guitar '
        'fingerpicking over light hand percussion and warm ambient pads"}',
}

_KEYWORD_REPLIES = {
    "melancholic atmosphere": "Melancholy, Sadness, Somber, Wistful, Quiet",
    "creating a melancholic atmosphere": "Melancholy, Sadness, Somber, Wistful, Quiet",
    "an electronic music style solution":
        "Electronic, Avant-garde, Technology, Experimental, Innovative",
    "electronic music style": "Electronic, Avant-garde, Technology, Experimental, Innovative",
}

_EXAMPLE_REPLIES = {
    "melancholy": (
        '{"idea":"Fading Photographs", "SFX":["Soft rain tapping on a window pane",'
        '"A distant train horn fading slowly"], "BGM":"A slow solo piano piece with sparse '
        'minor chords and long silences, wrapped in gentle vinyl crackle"}',
        '{"idea":"Empty Harbor", "SFX":["Water lapping against a wooden hull",'
        '"A lone gull crying overhead"], "BGM":"Muted cello and soft felt piano drifting '
        'through a wistful, rainy-day melody"}',
    ),
    "electronic": (
        '{"idea":"Neon Circuitry", "SFX":["Rapid keyboard clicks in a quiet room",'
        '"A camera shutter snapping twice"], "BGM":"Driving synthwave with arpeggiated '
        'basslines, crisp electronic drums and shimmering pads"}',
        '{"idea":"Server Room Pulse", "SFX":["Cooling fans whirring steady and low",'
        '"A hard drive clicking intermittently"], "BGM":"Minimal techno with a '
        'four-on-the-floor kick, glitchy percussion and deep sub bass"}',
    ),
}

_GENERIC_EXAMPLES = (
    '{"idea":"Open Road", "SFX":["Tires humming steadily on warm asphalt",'
    '"Wind whipping past a half-open window"], "BGM":"Laid-back road-trip rock with '
    'jangly guitars, steady drums and an easy tempo"}',
    '{"idea":"Night Market", "SFX":["Oil sizzling in a street-food wok",'
    '"Vendors calling out over a murmuring crowd"], "BGM":"Upbeat folk tune with plucked '
    'strings, hand drums and a playful flute line"}',
)


def _digest(*parts: str | bytes) -> int:
    h = hashlib.sha256(_INTERNAL_SEED)
    for part in parts:
        h.update(part.encode("utf-8") if isinstance(part, str) else part)
    return int.from_bytes(h.digest()[:8], "big")


def _match_theme(text: str) -> tuple[str, ...] | None:
    lowered = text.lower()
    if "melanchol" in lowered or "sad" in lowered:
        return _EXAMPLE_REPLIES["melancholy"]
    if "electronic" in lowered or "techno" in lowered:
        return _EXAMPLE_REPLIES["electronic"]
    return None


class MockMllmClient:
    def __init__(self, cfg: BackendConfig):
        if cfg.kind != "mllm":
            raise ValueError(f"mock MLLM needs kind 'mllm', got {cfg.kind!r}")
        self.cfg = cfg
        self.profile = cfg.mock_profile
        self.calls: list[CallInfo] = []

    def describe_image(self, image: bytes, prompt: str) -> str:
        if not (image.startswith(_PNG_MAGIC) or image.startswith(_JPEG_MAGIC)):
            raise ValueError("image is not a decodable PNG or JPEG")
        reply = _DESCRIPTIONS[_digest(image) % len(_DESCRIPTIONS)]
        self.calls.append(CallInfo("describe_image", 0))
        return reply

    def complete_text(self, prompt: str) -> str:
        self.calls.append(CallInfo("complete_text", 0))
        if "extract the key word" in prompt:
            return self._keywords_for(prompt)
        if "create more samples" in prompt:
            return self._examples_for(prompt)
        if "Output the idea following the examples below in json" in prompt:
            return self._scheme_for(prompt)
        return "Acknowledged."

    def _keywords_for(self, prompt: str) -> str:
        user_input = _first_group(r"Here is what the user said: (.+)", prompt)
        canned = _KEYWORD_REPLIES.get(user_input.strip().strip(".").lower())
        if canned:
            return canned
        words = [w.capitalize() for w in re.findall(r"[A-Za-z]+", user_input)
                 if len(w) > 2][:5]
        return ", ".join(words) if words else "Neutral, Balanced"

    def _examples_for(self, prompt: str) -> str:
        user_input = _first_group(r"satisfy the requirements: (.+)", prompt)
        examples = _match_theme(user_input) or _GENERIC_EXAMPLES
        return "\n".join(examples)

    def _scheme_for(self, prompt: str) -> str:
        if self.profile in _NOISY_SCHEMES:
            scheme = _NOISY_SCHEMES[self.profile]
        else:
            scheme = _SCHEMES[_digest(prompt) % len(_SCHEMES)]
        return f"Here is the idea:\n```json\n{scheme}\n```"


class MockAudioClient:
    def __init__(self, cfg: BackendConfig):
        if cfg.kind not in AUDIO_KINDS:
            raise ValueError(f"mock audio backend needs an audio kind, got {cfg.kind!r}")
        self.cfg = cfg
        self.calls: list[CallInfo] = []

    def generate_audio(self, prompt: str, duration_s: float) -> Waveform:
        if not 0 < duration_s <= MAX_GENERATION_DURATION_S:
            raise ValueError(
                f"duration_s must be in (0, {MAX_GENERATION_DURATION_S}], got {duration_s}")
        rate = self.cfg.target_sample_rate_hz
        n = round(duration_s * rate)
        rng = np.random.default_rng(_digest(prompt))
        if MAGIC_SILENCE in prompt:
            samples = np.zeros(n)
        elif MAGIC_NOISEBURST in prompt:
            samples = rng.uniform(-1.0, 1.0, n)
        else:
            n_tones = int(rng.integers(2, 5))
            freqs = rng.uniform(220.0, 2800.0, n_tones)
            phases = rng.uniform(0.0, 2.0 * math.pi, n_tones)
            amp = math.sqrt(0.02 / n_tones)  # RMS of the tone mixture ~= 0.1
            t = np.arange(n) / rate
            samples = np.zeros(n)
            for f, ph in zip(freqs, phases):
                samples += amp * np.sin(2.0 * math.pi * f * t + ph)
            if self.cfg.kind == "bgm-audio":
                # Percussive noise bursts; the on/off gaps let a spectral
                # gate estimate its floor without eating the bursts.
                rhythm_hz = rng.uniform(2.0, 4.0)
                env = (np.sin(2.0 * math.pi * rhythm_hz * t + rng.uniform(0, 2 * math.pi))
                       > 0).astype(float)
                samples += 0.1 * env * rng.uniform(-1.0, 1.0, n)
            samples += 0.002 * rng.uniform(-1.0, 1.0, n)
        self.calls.append(CallInfo("generate_audio", 0))
        return Waveform(samples, rate)


def _first_group(pattern: str, text: str) -> str:
    match = re.search(pattern, text)
    return match.group(1) if match else ""
