"""Turn a silent video into a video with matching sound effects and background music.

The flow: probe the video, pick a random key frame, ask a multimodal
language model for a content description and an audio scheme (two SFX
descriptions plus one BGM description), synthesize each description with a
text-to-audio backend, clean the tracks up (energy gate, band filters,
spectral denoise, gains), mix them, and mux the result back into the video.
"""

__version__ = "0.1.0"
