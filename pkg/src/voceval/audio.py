"""Waveform type, RIFF/WAVE codec, and the polyphase resampler.

Everything downstream sees mono float64 audio in [-1, 1]. WAV reading
accepts PCM-16/24/32 and IEEE float-32; writing is always PCM-16.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import kernels
from .errors import (
    CorruptHeaderError,
    EmptyAudioError,
    IoFailureError,
    UnsupportedFormatError,
)

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE

# Resampler design constants: windowed-sinc polyphase low-pass,
# Kaiser window, 64 sinc zero-crossings per side.
_KAISER_BETA = 8.6
_ZERO_CROSSINGS = 64


@dataclass(frozen=True)
class Waveform:
    """Immutable mono audio: float64 samples in [-1, 1] at a known rate."""

    samples: np.ndarray
    sample_rate: int
    source_path: Optional[str] = None

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("Waveform samples must be one-dimensional")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if arr is self.samples and arr.flags.writeable:
            arr = arr.copy()  # never flip a caller's array to read-only
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise CorruptHeaderError(f"truncated WAV file while reading {what}")
    return data


def load_wav(path: Union[str, Path]) -> Waveform:
    """Decode a RIFF/WAVE file to a mono Waveform.

    Multi-channel audio is averaged to mono; integer PCM is scaled by
    1/2^(bits-1); values are clamped to [-1, 1].
    """
    path = Path(path)
    try:
        f = open(path, "rb")
    except OSError as exc:
        raise IoFailureError(f"cannot open {path}: {exc}") from exc
    with f:
        riff = f.read(12)
        if len(riff) < 12 or riff[:4] != b"RIFF" or riff[8:12] != b"WAVE":
            raise CorruptHeaderError(f"{path} is not a RIFF/WAVE file")

        fmt = None
        data = None
        while True:
            header = f.read(8)
            if len(header) == 0:
                break
            if len(header) < 8:
                raise CorruptHeaderError(f"truncated chunk header in {path}")
            chunk_id, size = struct.unpack("<4sI", header)
            if chunk_id == b"fmt ":
                fmt = _read_exact(f, size, "fmt chunk")
            elif chunk_id == b"data":
                data = _read_exact(f, size, "data chunk")
            else:
                f.seek(size + (size & 1), 1)
                continue
            if size & 1:
                f.seek(1, 1)
            if fmt is not None and data is not None:
                break

    if fmt is None or len(fmt) < 16:
        raise CorruptHeaderError(f"{path} has no usable fmt chunk")
    if data is None:
        raise CorruptHeaderError(f"{path} has no data chunk")

    audio_format, channels, sample_rate, _, block_align, bits = struct.unpack(
        "<HHIIHH", fmt[:16]
    )
    if audio_format == _WAVE_FORMAT_EXTENSIBLE:
        if len(fmt) < 40:
            raise CorruptHeaderError(f"{path}: extensible fmt chunk too short")
        audio_format = struct.unpack("<H", fmt[24:26])[0]

    if channels < 1 or sample_rate <= 0:
        raise CorruptHeaderError(f"{path}: invalid channel count or sample rate")
    if audio_format not in (_WAVE_FORMAT_PCM, _WAVE_FORMAT_IEEE_FLOAT):
        raise UnsupportedFormatError(
            f"{path}: unsupported codec 0x{audio_format:04x} (PCM or float only)"
        )

    if audio_format == _WAVE_FORMAT_IEEE_FLOAT:
        if bits != 32:
            raise UnsupportedFormatError(f"{path}: float WAV must be 32-bit, got {bits}")
        raw = np.frombuffer(data[: len(data) - len(data) % 4], dtype="<f4")
        samples = raw.astype(np.float64)
    elif bits == 16:
        raw = np.frombuffer(data[: len(data) - len(data) % 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif bits == 24:
        usable = len(data) - len(data) % 3
        b = np.frombuffer(data[:usable], dtype=np.uint8).reshape(-1, 3)
        ints = (
            b[:, 0].astype(np.int32)
            | (b[:, 1].astype(np.int32) << 8)
            | (b[:, 2].astype(np.int32) << 16)
        )
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        samples = ints.astype(np.float64) / float(1 << 23)
    elif bits == 32:
        raw = np.frombuffer(data[: len(data) - len(data) % 4], dtype="<i4")
        samples = raw.astype(np.float64) / float(1 << 31)
    else:
        raise UnsupportedFormatError(f"{path}: unsupported PCM bit depth {bits}")

    if channels > 1:
        usable = len(samples) - len(samples) % channels
        samples = samples[:usable].reshape(-1, channels).mean(axis=1)
    if len(samples) == 0:
        raise EmptyAudioError(f"{path} contains zero audio frames")

    samples = np.clip(samples, -1.0, 1.0)
    return Waveform(samples=samples, sample_rate=int(sample_rate), source_path=str(path))


def save_wav(w: Waveform, path: Union[str, Path]) -> None:
    """Write a Waveform as 16-bit PCM little-endian WAV."""
    scaled = np.clip(np.round(w.samples * 32768.0), -32768, 32767).astype("<i2")
    payload = scaled.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH", 16, _WAVE_FORMAT_PCM, 1, w.sample_rate, w.sample_rate * 2, 2, 16
    )
    header += b"data" + struct.pack("<I", len(payload))
    try:
        Path(path).write_bytes(header + payload)
    except OSError as exc:
        raise IoFailureError(f"cannot write {path}: {exc}") from exc


def _design_lowpass(up: int, down: int) -> np.ndarray:
    """Kaiser-windowed sinc on the up-sampled grid.

    Sampling the unity-passband prototype at spacing 1/up already gives each
    polyphase branch a DC gain of one, which is what the gather-style kernel
    needs; no extra gain fold.
    """
    cutoff = 0.5 * min(1.0, up / down)  # cycles per input sample
    half = int(_ZERO_CROSSINGS * up / (2.0 * cutoff))
    m = np.arange(-half, half + 1, dtype=np.float64)
    t = m / up
    h = 2.0 * cutoff * np.sinc(2.0 * cutoff * t)
    window = np.i0(_KAISER_BETA * np.sqrt(np.maximum(0.0, 1.0 - (m / half) ** 2)))
    h *= window / np.i0(_KAISER_BETA)
    return h


def resample(w: Waveform, target_rate: int) -> Waveform:
    """Polyphase resample to target_rate; identity pass-through on equal rates.

    Output length is round(len(samples) * target_rate / sample_rate).
    """
    if target_rate < 8000:
        raise ValueError("target_rate must be at least 8000 Hz")
    if target_rate == w.sample_rate:
        return Waveform(w.samples, w.sample_rate, w.source_path)

    g = np.gcd(w.sample_rate, target_rate)
    up = target_rate // g
    down = w.sample_rate // g

    h = _design_lowpass(up, down)
    tpp = -(-len(h) // up)  # taps per phase
    hpoly = np.zeros((up, tpp), dtype=np.float64)
    for p in range(up):
        taps = h[p::up]
        hpoly[p, : len(taps)] = taps

    n = len(w.samples)
    num = n * target_rate
    n_out = num // w.sample_rate + (1 if 2 * (num % w.sample_rate) >= w.sample_rate else 0)

    center = len(h) // 2
    pad_left = tpp
    pad_right = tpp + center // up + 2
    x_padded = np.concatenate(
        [np.zeros(pad_left), w.samples, np.zeros(pad_right)]
    )
    base = center + up * pad_left
    y = kernels.resample_apply(x_padded, hpoly, up, down, n_out, base)
    np.clip(y, -1.0, 1.0, out=y)
    return Waveform(y, target_rate, w.source_path)
