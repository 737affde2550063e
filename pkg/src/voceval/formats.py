"""Binary and CSV interchange formats for mel features and embeddings.

Mel feature file (.mel): magic "VBMEL\\0", u32 version=1, u32 n_frames,
u32 n_mels, f32 norm_min, f32 norm_max, u8 normalized flag, then
n_frames*n_mels f32 values row-major. Everything little-endian.

Embedding file (.emb): magic "VBEMB\\0", u32 version=1, u32 N, u32 D,
u16-length-prefixed UTF-8 provider id, then N*D f32 values row-major.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .errors import SchemaMismatchError
from .spectral import MelSpectrogram

_MEL_MAGIC = b"VBMEL\0"
_EMB_MAGIC = b"VBEMB\0"
_VERSION = 1

PathLike = Union[str, Path]


def save_mel(m: MelSpectrogram, path: PathLike) -> None:
    header = _MEL_MAGIC + struct.pack(
        "<IIIffB",
        _VERSION,
        m.values.shape[0],
        m.values.shape[1],
        m.norm_min,
        m.norm_max,
        1 if m.normalized else 0,
    )
    body = np.ascontiguousarray(m.values, dtype="<f4").tobytes()
    Path(path).write_bytes(header + body)


def load_mel(path: PathLike) -> MelSpectrogram:
    """Read a .mel file; the result carries no SpectralConfig."""
    blob = Path(path).read_bytes()
    if len(blob) < len(_MEL_MAGIC) + 21 or blob[: len(_MEL_MAGIC)] != _MEL_MAGIC:
        raise SchemaMismatchError(f"{path}: not a mel feature file")
    version, n_frames, n_mels, norm_min, norm_max, normalized = struct.unpack_from(
        "<IIIffB", blob, len(_MEL_MAGIC)
    )
    if version != _VERSION:
        raise SchemaMismatchError(f"{path}: unsupported mel file version {version}")
    offset = len(_MEL_MAGIC) + 21
    expected = n_frames * n_mels * 4
    if len(blob) - offset != expected:
        raise SchemaMismatchError(f"{path}: mel payload size mismatch")
    values = (
        np.frombuffer(blob, dtype="<f4", count=n_frames * n_mels, offset=offset)
        .astype(np.float64)
        .reshape(n_frames, n_mels)
    )
    return MelSpectrogram(values, bool(normalized), float(norm_min), float(norm_max), None)


def mel_to_csv(m: MelSpectrogram, path: PathLike) -> None:
    """Debug export: one frame per line, comma-separated."""
    np.savetxt(path, m.values, fmt="%.9g", delimiter=",")


def save_embeddings(vectors: np.ndarray, provider_id: str, path: PathLike) -> None:
    vectors = np.asarray(vectors, dtype=np.float64)
    pid = provider_id.encode("utf-8")
    header = _EMB_MAGIC + struct.pack(
        "<III", _VERSION, vectors.shape[0], vectors.shape[1]
    ) + struct.pack("<H", len(pid)) + pid
    Path(path).write_bytes(header + np.ascontiguousarray(vectors, dtype="<f4").tobytes())


def load_embeddings(path: PathLike) -> Tuple[np.ndarray, str]:
    blob = Path(path).read_bytes()
    if len(blob) < len(_EMB_MAGIC) + 14 or blob[: len(_EMB_MAGIC)] != _EMB_MAGIC:
        raise SchemaMismatchError(f"{path}: not an embedding file")
    version, n, d = struct.unpack_from("<III", blob, len(_EMB_MAGIC))
    if version != _VERSION:
        raise SchemaMismatchError(f"{path}: unsupported embedding file version {version}")
    off = len(_EMB_MAGIC) + 12
    (pid_len,) = struct.unpack_from("<H", blob, off)
    off += 2
    provider_id = blob[off : off + pid_len].decode("utf-8")
    off += pid_len
    if len(blob) - off != n * d * 4:
        raise SchemaMismatchError(f"{path}: embedding payload size mismatch")
    vectors = (
        np.frombuffer(blob, dtype="<f4", count=n * d, offset=off)
        .astype(np.float64)
        .reshape(n, d)
    )
    return vectors, provider_id


def load_embeddings_csv(path: PathLike, provider_id: str) -> Tuple[np.ndarray, str]:
    """CSV import: one vector per line."""
    vectors = np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=np.float64))
    return vectors, provider_id
