"""Spectrogram-domain quality metrics: alignment, SSIM, LS-MSE, PSNR."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    ConfigMismatchError,
    LengthMismatchError,
    MissingNormStatsError,
    TooSmallError,
)
from .spectral import MelSpectrogram

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_C1 = (0.01 * 1.0) ** 2  # dynamic range L = 1 (normalized spectrograms)
_SSIM_C2 = (0.03 * 1.0) ** 2

LENGTH_TOLERANCE = 0.05  # max frame-count mismatch, fraction of reference


@dataclass(frozen=True)
class AlignedSpecPair:
    """Reference/candidate spectrograms trimmed to a common frame count and
    normalized with the reference utterance's min/max."""

    reference: MelSpectrogram
    candidate: MelSpectrogram
    n_frames: int


@dataclass(frozen=True)
class MetricValues:
    ssim: float
    ls_mse: float
    psnr: float
    fad: Optional[float] = None


def align(reference: MelSpectrogram, candidate: MelSpectrogram) -> AlignedSpecPair:
    """Trim to the shorter member and renormalize the candidate with the
    reference's norm stats (values clamped to [0, 1])."""
    if reference.n_mels != candidate.n_mels:
        raise ConfigMismatchError(
            f"n_mels differ: {reference.n_mels} vs {candidate.n_mels}"
        )
    if (
        reference.config is not None
        and candidate.config is not None
        and reference.config.feature_key() != candidate.config.feature_key()
    ):
        raise ConfigMismatchError("spectrograms computed with different settings")
    if not (reference.normalized and candidate.normalized):
        raise MissingNormStatsError("align requires normalized mel spectrograms")

    diff = abs(reference.n_frames - candidate.n_frames)
    if diff > LENGTH_TOLERANCE * reference.n_frames:
        raise LengthMismatchError(
            f"frame counts {reference.n_frames} vs {candidate.n_frames} "
            f"differ by more than {LENGTH_TOLERANCE:.0%}"
        )

    n = min(reference.n_frames, candidate.n_frames)
    ref_vals = reference.values[:n]
    cand_vals = candidate.values[:n]
    same_stats = (
        candidate.norm_min == reference.norm_min
        and candidate.norm_max == reference.norm_max
    )
    if not same_stats:
        log_mel = cand_vals * (candidate.norm_max - candidate.norm_min) + candidate.norm_min
        cand_vals = np.clip(
            (log_mel - reference.norm_min) / (reference.norm_max - reference.norm_min),
            0.0,
            1.0,
        )

    ref = MelSpectrogram(ref_vals, True, reference.norm_min, reference.norm_max, reference.config)
    cand = MelSpectrogram(cand_vals, True, reference.norm_min, reference.norm_max, reference.config)
    return AlignedSpecPair(ref, cand, n)


def _gaussian_kernel() -> np.ndarray:
    half = (_SSIM_WINDOW - 1) // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(x ** 2) / (2.0 * _SSIM_SIGMA ** 2))
    return g / g.sum()


def _filter_valid(a: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Separable valid-mode correlation with the 2-D window outer(g, g)."""
    w = len(g)
    out = np.einsum(
        "ijk,k->ij", np.lib.stride_tricks.sliding_window_view(a, w, axis=0), g
    )
    return np.einsum(
        "ijk,k->ij", np.lib.stride_tricks.sliding_window_view(out, w, axis=1), g
    )


def ssim(pair: AlignedSpecPair) -> float:
    """Mean local SSIM over the spectrogram treated as a 2-D image.

    11x11 Gaussian window (sigma 1.5), C1=(0.01*L)^2, C2=(0.03*L)^2, L=1;
    boundary handled by valid-mode windowing, as in the canonical definition.
    """
    x = pair.reference.values
    y = pair.candidate.values
    if x.shape[0] < _SSIM_WINDOW or x.shape[1] < _SSIM_WINDOW:
        raise TooSmallError(
            f"spectrogram {x.shape} smaller than the {_SSIM_WINDOW}x{_SSIM_WINDOW} SSIM window"
        )
    g = _gaussian_kernel()
    mu_x = _filter_valid(x, g)
    mu_y = _filter_valid(y, g)
    var_x = _filter_valid(x * x, g) - mu_x * mu_x
    var_y = _filter_valid(y * y, g) - mu_y * mu_y
    cov_xy = _filter_valid(x * y, g) - mu_x * mu_y

    ssim_map = ((2.0 * mu_x * mu_y + _SSIM_C1) * (2.0 * cov_xy + _SSIM_C2)) / (
        (mu_x * mu_x + mu_y * mu_y + _SSIM_C1) * (var_x + var_y + _SSIM_C2)
    )
    return float(ssim_map.mean())


def ls_mse(pair: AlignedSpecPair) -> float:
    """Mean squared difference of normalized log-mel values."""
    diff = pair.reference.values - pair.candidate.values
    return float(np.mean(diff * diff))


def psnr(pair: AlignedSpecPair) -> float:
    """10*log10(1/LS-MSE) in dB; +inf for identical inputs (peak fixed at 1)."""
    return psnr_from_ls_mse(ls_mse(pair))


def psnr_from_ls_mse(mse: float) -> float:
    if mse < 0:
        raise ValueError("mean squared error cannot be negative")
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def compute_pair_metrics(pair: AlignedSpecPair, fad: Optional[float] = None) -> MetricValues:
    mse = ls_mse(pair)
    return MetricValues(ssim=ssim(pair), ls_mse=mse, psnr=psnr_from_ls_mse(mse), fad=fad)
