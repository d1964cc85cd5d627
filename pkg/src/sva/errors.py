"""Exception taxonomy shared across the package."""


class SvaError(Exception):
    """Base class for every error this package raises on purpose."""


# --- video probing / key frame extraction ---------------------------------

class NotAVideoError(SvaError):
    """Input has no video stream (or no usable duration)."""


class ProbeToolError(SvaError):
    """ffprobe exited non-zero or produced unparseable output."""

    def __init__(self, message: str, stderr: str = ""):
        super().__init__(message)
        self.stderr = stderr


class ExtractToolError(SvaError):
    """ffmpeg key-frame extraction failed."""

    def __init__(self, message: str, stderr: str = ""):
        super().__init__(message)
        self.stderr = stderr


class NoKeyFramesError(SvaError):
    """Extraction produced no frames (defensive; every valid video has >= 1 I-frame)."""


class EmptyFrameListError(SvaError):
    """select_keyframe called with no frames."""


# --- prompt engine ----------------------------------------------------------

class PromptError(SvaError):
    """Base class for template rendering problems."""


class EmptyDescriptionError(PromptError):
    pass


class EmptyUserInputError(PromptError):
    pass


class UnboundPlaceholderError(PromptError):
    """A placeholder survived rendering, or a required one is missing from the body."""


class EmptyKeywordsError(PromptError):
    pass


class EmptyExamplesError(PromptError):
    pass


class SchemeParseError(SvaError):
    """Base class for failures turning a model reply into a Scheme."""


class NoJsonFoundError(SchemeParseError):
    pass


class MissingKeyError(SchemeParseError):
    def __init__(self, key: str):
        super().__init__(f"scheme reply is missing the {key!r} key")
        self.key = key


class WrongSfxCountError(SchemeParseError):
    def __init__(self, count: int):
        super().__init__(f"scheme must contain exactly 2 SFX descriptions, got {count}")
        self.count = count


class EmptyFieldError(SchemeParseError):
    pass


class NoKeywordsError(SchemeParseError):
    """No usable keywords survived filtering."""


# --- backend gateway --------------------------------------------------------

class BackendError(SvaError):
    """Base class for model/audio backend failures."""


class BackendTimeoutError(BackendError):
    pass


class HttpStatusError(BackendError):
    def __init__(self, status: int, detail: str = ""):
        super().__init__(f"backend returned HTTP {status}" + (f": {detail}" if detail else ""))
        self.status = status


class AuthError(BackendError):
    """401/403 from the backend; never retried."""


class EmptyReplyError(BackendError):
    pass


class BadAudioPayloadError(BackendError):
    """Audio response body was undecodable or zero-length."""


# --- DSP --------------------------------------------------------------------

class UnsupportedFormatError(SvaError):
    """WAV flavour we do not read (codec, bit depth, or channel count)."""


class CorruptHeaderError(SvaError):
    """WAV file too short or structurally broken."""


class WavIoError(SvaError):
    """OS-level read/write failure."""


class CutoffOutOfRangeError(SvaError, ValueError):
    pass


class TooShortError(SvaError, ValueError):
    """Signal shorter than one analysis frame."""


class EmptyWaveformError(SvaError, ValueError):
    pass


class NegativeFactorError(SvaError, ValueError):
    pass


class EmptyTrackListError(SvaError, ValueError):
    pass


class RateMismatchError(SvaError, ValueError):
    pass


class LengthMismatchError(SvaError, ValueError):
    pass


# --- muxing -----------------------------------------------------------------

class MissingInputError(SvaError):
    pass


class OutputUnwritableError(SvaError):
    pass


class MuxToolError(SvaError):
    def __init__(self, message: str, stderr: str = ""):
        super().__init__(message)
        self.stderr = stderr


# --- pipeline ---------------------------------------------------------------

class StageError(SvaError):
    """Wraps any error with the pipeline stage it happened in."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
