"""Deterministic synthetic speech clips for self-contained pipeline runs.

Each clip is additive harmonic synthesis: a wandering pitch contour, static
formant bumps shaping the harmonic amplitudes, a voiced/pause segment
envelope with syllabic modulation, and a little noise. Not speech, but close
enough in spectral structure that mel analysis, phase reconstruction, and the
metrics all have something real to chew on. Same seed, same samples.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np

from .audio import Waveform, save_wav
from .corpus import Manifest, ManifestItem, save_manifest

PathLike = Union[str, Path]

DEFAULT_CLIP_COUNT = 20
DEFAULT_SEED = 7310
_HARMONIC_CUTOFF_HZ = 8000.0
_EDGE_RAMP_S = 0.012


def _pitch_contour(rng: np.random.Generator, n: int, sample_rate: int) -> np.ndarray:
    base = rng.uniform(95.0, 220.0)
    knot_hop = sample_rate // 50  # one knot per 20 ms
    n_knots = n // knot_hop + 2
    walk = np.cumsum(rng.standard_normal(n_knots)) * 0.03
    walk -= walk.mean()
    knots = base * np.exp2(np.clip(walk, -0.4, 0.4))
    x = np.arange(n) / knot_hop
    return np.interp(x, np.arange(n_knots), knots)


def _segment_envelope(rng: np.random.Generator, n: int, sample_rate: int) -> np.ndarray:
    """Alternating voiced stretches and short pauses with soft edges."""
    env = np.zeros(n)
    ramp = int(_EDGE_RAMP_S * sample_rate)
    pos = 0
    voiced = True
    while pos < n:
        dur = rng.uniform(0.25, 0.6) if voiced else rng.uniform(0.05, 0.15)
        seg = min(int(dur * sample_rate), n - pos)
        if voiced and seg > 2 * ramp:
            env[pos : pos + seg] = 1.0
            fade = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp) / ramp)
            env[pos : pos + ramp] = fade
            env[pos + seg - ramp : pos + seg] = fade[::-1]
        elif voiced:
            env[pos : pos + seg] = 0.5
        pos += seg
        voiced = not voiced
    return env


def synth_clip(seed: int, duration_s: float, sample_rate: int = 24000) -> Waveform:
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))
    f0 = _pitch_contour(rng, n, sample_rate)
    phase = 2.0 * np.pi * np.cumsum(f0) / sample_rate

    formants = np.array(
        [
            rng.uniform(320.0, 780.0),
            rng.uniform(950.0, 2100.0),
            rng.uniform(2300.0, 3200.0),
        ]
    )
    bandwidths = np.array([90.0, 130.0, 180.0])
    gains = np.array([1.0, 0.7, 0.35])

    sig = np.zeros(n)
    max_h = int(_HARMONIC_CUTOFF_HZ / f0.min())
    for h in range(1, min(max_h, 60) + 1):
        freq = h * f0
        active = freq < _HARMONIC_CUTOFF_HZ
        if not active.any():
            break
        bumps = (gains * np.exp(-0.5 * ((freq[:, None] - formants) / bandwidths) ** 2)).sum(axis=1)
        amp = (bumps + 0.04) / h
        sig += np.where(active, amp, 0.0) * np.sin(h * phase)

    env = _segment_envelope(rng, n, sample_rate)
    syllabic = 0.65 + 0.35 * np.sin(
        2.0 * np.pi * rng.uniform(2.5, 5.0) * np.arange(n) / sample_rate
        + rng.uniform(0.0, 2.0 * np.pi)
    )
    noise = rng.standard_normal(n)
    breath = 0.015 * noise
    frication = 0.08 * np.diff(noise, prepend=0.0) * (1.0 - env)

    x = env * syllabic * sig + breath + frication
    peak = np.abs(x).max()
    if peak > 0:
        x = x * (rng.uniform(0.6, 0.85) / peak)
    return Waveform(samples=x, sample_rate=sample_rate)


def write_fixture_corpus(
    root: PathLike,
    n_clips: int = DEFAULT_CLIP_COUNT,
    seed: int = DEFAULT_SEED,
    sample_rate: int = 24000,
) -> Manifest:
    """Write n deterministic clips plus a manifest assigning all to test."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    master = np.random.default_rng(seed)
    durations = master.uniform(1.2, 2.8, size=n_clips)
    clip_seeds = master.integers(0, 2**63 - 1, size=n_clips)

    items = []
    for i in range(n_clips):
        uid = f"fx_{i:03d}"
        wav = synth_clip(int(clip_seeds[i]), float(durations[i]), sample_rate)
        save_wav(wav, root / f"{uid}.wav")
        items.append(ManifestItem(uid, f"{uid}.wav", f"spk{i % 4}", "test"))

    manifest = Manifest("fixture", items, seed=seed)
    save_manifest(manifest, root / "fixture.json")
    return manifest
