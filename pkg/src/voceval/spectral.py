"""Log-mel feature pipeline and the Griffin-Lim baseline vocoder.

Pipeline: hop-strided frames, periodic Hann window, zero-padded FFT,
magnitude -> power -> triangular mel filterbank (HTK scale, peak-normalized)
-> log10 with floor -> per-utterance min-max scaling to [0, 1].

Griffin-Lim inverts that pipeline: de-normalize, undo the log, map mel power
back to linear frequency through a regularized pseudo-inverse, then estimate
phase by alternating STFT-domain magnitude replacement with a least-squares
inverse STFT (synthesis Hann window, window-sum-square normalization).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels
from .audio import Waveform
from .errors import (
    ConfigError,
    DegenerateRangeError,
    MissingNormStatsError,
    RateMismatchError,
    TooShortError,
)

_WSS_FLOOR = 1e-8  # overlap-add positions with window power below this emit 0


@dataclass(frozen=True)
class SpectralConfig:
    """Analysis settings; defaults are the toolkit's reference values."""

    sample_rate: int = 24000
    win_length_ms: float = 40.0
    hop_length_ms: float = 12.5
    fft_size: int = 1024
    n_mels: int = 80
    fmin: float = 0.0
    fmax: float = 12000.0
    log_floor: float = 1e-10
    griffin_lim_iters: int = 60

    def __post_init__(self):
        if self.win_length < 1 or self.hop_length < 1:
            raise ConfigError("window and hop must be at least one sample")
        if self.win_length > self.fft_size:
            raise ConfigError(
                f"win_length {self.win_length} exceeds fft_size {self.fft_size}"
            )
        if self.n_mels < 1:
            raise ConfigError("n_mels must be at least 1")
        if not (0 <= self.fmin < self.fmax):
            raise ConfigError("need 0 <= fmin < fmax")
        if self.fmax > self.sample_rate / 2:
            raise ConfigError("fmax above Nyquist")
        if self.log_floor <= 0:
            raise ConfigError("log_floor must be positive")
        if self.griffin_lim_iters < 1:
            raise ConfigError("griffin_lim_iters must be at least 1")

    @property
    def win_length(self) -> int:
        return round(self.win_length_ms * self.sample_rate / 1000.0)

    @property
    def hop_length(self) -> int:
        return round(self.hop_length_ms * self.sample_rate / 1000.0)

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1

    def feature_key(self) -> tuple:
        """Fields that determine feature values (iteration count excluded)."""
        return (
            self.sample_rate,
            self.win_length_ms,
            self.hop_length_ms,
            self.fft_size,
            self.n_mels,
            self.fmin,
            self.fmax,
            self.log_floor,
        )

    def n_frames(self, n_samples: int) -> int:
        if n_samples < self.win_length:
            return 0
        return 1 + (n_samples - self.win_length) // self.hop_length


@dataclass(frozen=True)
class MagnitudeSpectrogram:
    """STFT magnitudes, one row per frame, fft_size/2+1 bins."""

    values: np.ndarray
    config: SpectralConfig


@dataclass(frozen=True)
class MelSpectrogram:
    """Log-mel features; norm_min/norm_max are the pre-scaling extrema."""

    values: np.ndarray
    normalized: bool
    norm_min: float
    norm_max: float
    config: Optional[SpectralConfig]

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_mels(self) -> int:
        return self.values.shape[1]


def hann_periodic(length: int) -> np.ndarray:
    n = np.arange(length, dtype=np.float64)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / length)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (np.power(10.0, np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


_fb_cache: dict = {}


def mel_filterbank(cfg: SpectralConfig) -> np.ndarray:
    """Triangular mel filterbank, shape (n_mels, fft_size/2+1), peak 1 per row.

    Centers are n_mels+2 points equally spaced on the HTK mel scale between
    fmin and fmax. The returned array is cached and read-only.
    """
    key = cfg.feature_key()
    cached = _fb_cache.get(key)
    if cached is not None:
        return cached

    grid = mel_to_hz(np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax), cfg.n_mels + 2))
    bin_freqs = np.arange(cfg.n_bins, dtype=np.float64) * cfg.sample_rate / cfg.fft_size

    fdiff = np.diff(grid)
    ramps = grid[:, None] - bin_freqs[None, :]
    lower = -ramps[:-2] / fdiff[:-1][:, None]
    upper = ramps[2:] / fdiff[1:][:, None]
    fb = np.maximum(0.0, np.minimum(lower, upper))

    peaks = fb.max(axis=1)
    if np.any(peaks <= 0):
        raise ConfigError(
            "mel spacing finer than FFT resolution: some filters cover no bin"
        )
    fb /= peaks[:, None]
    fb.setflags(write=False)
    _fb_cache[key] = fb
    return fb


_pinv_cache: dict = {}


def _mel_pseudo_inverse(cfg: SpectralConfig) -> np.ndarray:
    key = cfg.feature_key()
    cached = _pinv_cache.get(key)
    if cached is None:
        cached = np.linalg.pinv(mel_filterbank(cfg), rcond=1e-8)
        cached.setflags(write=False)
        _pinv_cache[key] = cached
    return cached


def _check_input(w: Waveform, cfg: SpectralConfig) -> None:
    if w.sample_rate != cfg.sample_rate:
        raise RateMismatchError(
            f"waveform at {w.sample_rate} Hz, config expects {cfg.sample_rate} Hz"
        )
    if len(w.samples) < cfg.win_length:
        raise TooShortError(
            f"need at least {cfg.win_length} samples, got {len(w.samples)}"
        )


def _stft_complex(samples: np.ndarray, cfg: SpectralConfig) -> np.ndarray:
    frames = kernels.frame_signal(
        samples, hann_periodic(cfg.win_length), cfg.hop_length, cfg.fft_size
    )
    return np.fft.rfft(frames, axis=1)


def stft_magnitude(w: Waveform, cfg: SpectralConfig) -> MagnitudeSpectrogram:
    """Magnitude STFT; frame t covers samples [t*hop, t*hop + win)."""
    _check_input(w, cfg)
    return MagnitudeSpectrogram(np.abs(_stft_complex(w.samples, cfg)), cfg)


def mel_spectrogram(w: Waveform, cfg: SpectralConfig, normalize: bool = True) -> MelSpectrogram:
    """Full feature pipeline; normalized output attains 0.0 and 1.0 exactly."""
    mag = stft_magnitude(w, cfg)
    mel_power = (mag.values ** 2) @ mel_filterbank(cfg).T
    log_mel = np.log10(np.maximum(mel_power, cfg.log_floor))
    lo = float(log_mel.min())
    hi = float(log_mel.max())
    if not normalize:
        return MelSpectrogram(log_mel, False, lo, hi, cfg)
    if hi <= lo:
        raise DegenerateRangeError(
            "constant log-mel spectrogram: min-max normalization undefined"
        )
    return MelSpectrogram((log_mel - lo) / (hi - lo), True, lo, hi, cfg)


def _istft_lse(spec: np.ndarray, cfg: SpectralConfig, length: int) -> np.ndarray:
    """Least-squares inverse STFT (synthesis window + window-sum-square)."""
    window = hann_periodic(cfg.win_length)
    frames = np.fft.irfft(spec, n=cfg.fft_size, axis=1)[:, : cfg.win_length]
    frames = np.ascontiguousarray(frames)
    num, wss = kernels.overlap_add(frames, window, cfg.hop_length, length)
    return np.where(wss < _WSS_FLOOR, 0.0, num / np.maximum(wss, _WSS_FLOOR))


def phase_reconstruct(
    magnitude: np.ndarray,
    cfg: SpectralConfig,
    callback: Optional[Callable[[int, float], None]] = None,
) -> Waveform:
    """Griffin-Lim phase estimation from a linear-frequency magnitude STFT.

    Starts from zero phase; each iteration reports the spectral convergence
    error ||(|STFT(y)| - M)||_F / ||M||_F to `callback` before updating.
    Output is peak-normalized to 0.95 (skipped for silent output).
    """
    magnitude = np.asarray(magnitude, dtype=np.float64)
    n_frames = magnitude.shape[0]
    length = (n_frames - 1) * cfg.hop_length + cfg.win_length

    target_norm = float(np.linalg.norm(magnitude))
    if target_norm == 0.0:
        return Waveform(np.zeros(length), cfg.sample_rate)

    y = _istft_lse(magnitude.astype(np.complex128), cfg, length)
    for i in range(cfg.griffin_lim_iters):
        spec = _stft_complex(y, cfg)
        mag_y = np.abs(spec)
        if callback is not None:
            err = float(np.linalg.norm(mag_y - magnitude)) / target_norm
            callback(i, err)
        phase = spec / np.maximum(mag_y, 1e-16)
        y = _istft_lse(magnitude * phase, cfg, length)

    # Edge samples covered only by a window tail divide by a near-zero
    # window-sum-square and can leave physical range by orders of magnitude;
    # bound them before they dictate the normalization gain.
    np.clip(y, -1.0, 1.0, out=y)
    peak = float(np.max(np.abs(y)))
    if peak > 0.0:
        y *= 0.95 / peak
    return Waveform(y, cfg.sample_rate)


def griffin_lim(
    m: MelSpectrogram,
    cfg: SpectralConfig,
    callback: Optional[Callable[[int, float], None]] = None,
) -> Waveform:
    """Invert a mel spectrogram to audio via the Griffin-Lim baseline."""
    if m.normalized:
        if not (np.isfinite(m.norm_min) and np.isfinite(m.norm_max)) or m.norm_max <= m.norm_min:
            raise MissingNormStatsError(
                "normalized mel spectrogram lacks usable norm_min/norm_max"
            )
        log_mel = m.values * (m.norm_max - m.norm_min) + m.norm_min
    else:
        log_mel = m.values

    mel_power = np.power(10.0, log_mel)
    lin_power = np.maximum(mel_power @ _mel_pseudo_inverse(cfg).T, 0.0)
    return phase_reconstruct(np.sqrt(lin_power), cfg, callback)
