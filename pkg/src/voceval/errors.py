"""Exception taxonomy shared by all voceval modules."""


class VocevalError(Exception):
    """Base class for all errors raised by this package."""


# --- audio I/O ---------------------------------------------------------------

class UnsupportedFormatError(VocevalError):
    """WAV file uses a codec or sample layout we do not decode."""


class CorruptHeaderError(VocevalError):
    """File is not a well-formed RIFF/WAVE container."""


class EmptyAudioError(VocevalError):
    """Decoded audio contains zero frames."""


class IoFailureError(VocevalError):
    """Underlying read/write failed."""


# --- spectral ----------------------------------------------------------------

class ConfigError(VocevalError):
    """SpectralConfig violates its own invariants."""


class RateMismatchError(VocevalError):
    """Waveform sample rate differs from the configured analysis rate."""


class TooShortError(VocevalError):
    """Input shorter than one analysis window (or embedding window)."""


class DegenerateRangeError(VocevalError):
    """Min-max normalization impossible: constant spectrogram."""


class MissingNormStatsError(VocevalError):
    """Normalized mel spectrogram lacks usable norm_min/norm_max."""


# --- metrics -----------------------------------------------------------------

class ConfigMismatchError(VocevalError):
    """Reference and candidate spectrograms disagree on analysis settings."""


class LengthMismatchError(VocevalError):
    """Frame counts differ by more than the alignment tolerance."""


class TooSmallError(VocevalError):
    """Spectrogram smaller than the SSIM window."""


class UnknownProviderError(VocevalError):
    """No embedding provider registered under that id."""


class TooFewEmbeddingsError(VocevalError):
    """Gaussian fitting needs at least two embedding vectors."""


class DimensionMismatchError(VocevalError):
    """Embedding sets have different dimensionality."""


class ProviderMismatchError(VocevalError):
    """Embedding sets come from different providers."""


# --- corpus ------------------------------------------------------------------

class EmptyCorpusError(VocevalError):
    """No audio found under the corpus root."""


class MissingFilesError(VocevalError):
    """Corpus too small to satisfy the split rule."""


class UnknownLayoutError(VocevalError):
    """Directory tree does not match any known corpus layout."""


# --- bench -------------------------------------------------------------------

class CommandFailedError(VocevalError):
    """Vocoder command exited nonzero."""


class CommandTimeoutError(VocevalError):
    """Vocoder command exceeded its timeout."""


class NoOutputError(VocevalError):
    """Vocoder command exited 0 but produced no usable output file."""


class BadOutputRateWarning(UserWarning):
    """Synthesized audio arrived at the wrong rate and was resampled in place."""


# --- MOS service -------------------------------------------------------------

class MissingAudioError(VocevalError):
    """Test definition references an audio file that does not exist."""


class DuplicateEntryError(VocevalError):
    """Test definition lists the same (system, utterance) twice."""


class NoTestLoadedError(VocevalError):
    """Session requested before a test definition was loaded."""


class UnknownSessionError(VocevalError):
    """Rating references a session id the service never issued."""


class UnknownStimulusError(VocevalError):
    """Rating references a stimulus id the service never issued."""


class ScoreOutOfRangeError(VocevalError):
    """MOS score outside the integer range 1..5."""


class NoRatingsError(VocevalError):
    """Summary requested before any rating was stored."""


# --- reporting / CLI ---------------------------------------------------------

class MissingSynthError(VocevalError):
    """Synthesized wav absent for one or more manifest utterances."""


class SchemaMismatchError(VocevalError):
    """Input file does not match the expected schema."""


class ConsistencyError(VocevalError):
    """Report-time cross-check failed (e.g. PSNR vs LS-MSE identity)."""
