"""Audio embeddings and the Fréchet distance between embedding Gaussians.

The built-in "melstat-v1" provider is a deterministic surrogate for a trained
audio classifier: per non-overlapping 1-second window it emits per-band mean
and standard deviation of the unnormalized log-mel frames (D = 2 * n_mels).
Externally computed embeddings can be imported via voceval.formats instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import Waveform
from .errors import (
    DimensionMismatchError,
    ProviderMismatchError,
    TooFewEmbeddingsError,
    TooShortError,
    UnknownProviderError,
)
from .spectral import SpectralConfig, mel_spectrogram

COVARIANCE_EPS = 1e-6


@dataclass(frozen=True)
class EmbeddingSet:
    """Embedding vectors with fitted Gaussian statistics."""

    vectors: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    provider_id: str

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def _melstat_v1(w: Waveform, cfg: SpectralConfig) -> np.ndarray:
    window = cfg.sample_rate  # 1.0 s
    n_windows = len(w.samples) // window
    if n_windows < 1:
        raise TooShortError(
            f"melstat-v1 needs at least 1.0 s of audio, got {w.duration_seconds:.3f} s"
        )
    rows = np.empty((n_windows, 2 * cfg.n_mels), dtype=np.float64)
    for k in range(n_windows):
        chunk = Waveform(w.samples[k * window : (k + 1) * window], w.sample_rate)
        log_mel = mel_spectrogram(chunk, cfg, normalize=False).values
        rows[k, : cfg.n_mels] = log_mel.mean(axis=0)
        rows[k, cfg.n_mels :] = log_mel.std(axis=0)
    return rows


PROVIDERS = {"melstat-v1": _melstat_v1}


def embed(w: Waveform, provider: str, cfg: SpectralConfig) -> np.ndarray:
    """One embedding row per 1-second window (trailing partial dropped)."""
    fn = PROVIDERS.get(provider)
    if fn is None:
        raise UnknownProviderError(
            f"unknown embedding provider {provider!r}; have {sorted(PROVIDERS)}"
        )
    return fn(w, cfg)


def fit_gaussian(vectors: np.ndarray, provider_id: str = "unspecified") -> EmbeddingSet:
    """Column mean and unbiased covariance, regularized with eps*I."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] < 2:
        raise TooFewEmbeddingsError("Gaussian fit needs at least 2 embedding vectors")
    mu = vectors.mean(axis=0)
    centered = vectors - mu
    sigma = centered.T @ centered / (vectors.shape[0] - 1)
    sigma = 0.5 * (sigma + sigma.T)
    sigma[np.diag_indices_from(sigma)] += COVARIANCE_EPS
    return EmbeddingSet(vectors, mu, sigma, provider_id)


def _sqrtm_psd(a: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition, negatives clamped."""
    vals, vecs = np.linalg.eigh(a)
    vals = np.sqrt(np.maximum(vals, 0.0))
    return (vecs * vals) @ vecs.T


def fad(background: EmbeddingSet, evaluation: EmbeddingSet) -> float:
    """Fréchet distance between the two fitted Gaussians, clamped to >= 0."""
    if background.dim != evaluation.dim:
        raise DimensionMismatchError(
            f"embedding dims differ: {background.dim} vs {evaluation.dim}"
        )
    if background.provider_id != evaluation.provider_id:
        raise ProviderMismatchError(
            f"providers differ: {background.provider_id!r} vs {evaluation.provider_id!r}"
        )
    mu_diff = background.mu - evaluation.mu
    s1h = _sqrtm_psd(background.sigma)
    inner = s1h @ evaluation.sigma @ s1h
    inner = 0.5 * (inner + inner.T)
    trace_sqrt = float(np.sum(np.sqrt(np.maximum(np.linalg.eigvalsh(inner), 0.0))))
    value = (
        float(mu_diff @ mu_diff)
        + float(np.trace(background.sigma))
        + float(np.trace(evaluation.sigma))
        - 2.0 * trace_sqrt
    )
    return max(value, 0.0)


def fad_symmetric_check(a: EmbeddingSet, b: EmbeddingSet) -> bool:
    """Self-test: FAD must not depend on argument order."""
    ab = fad(a, b)
    ba = fad(b, a)
    return abs(ab - ba) <= 1e-6 * (1.0 + ab)
