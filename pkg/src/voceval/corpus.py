"""Dataset manifests and split rules for LJ Speech, VCTK, and LibriTTS."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

from .errors import EmptyCorpusError, MissingFilesError, SchemaMismatchError, UnknownLayoutError

PathLike = Union[str, Path]

SPLITS = ("train", "validation", "test")

LJ_TEST_COUNT = 20
LJ_VALIDATION_COUNT = 10

VCTK_TRAIN_FRACTION = 0.85
VCTK_VALIDATION_FRACTION = 0.10

DEFAULT_SEED = 42

_LIBRITTS_SUBSETS = {
    "train-clean-100": "train",
    "train-clean-360": "train",
    "dev-clean": "validation",
    "test-clean": "test",
}


@dataclass(frozen=True)
class ManifestItem:
    utterance_id: str
    relative_path: str
    speaker_id: str
    split: str


@dataclass(frozen=True)
class Manifest:
    corpus_name: str
    items: List[ManifestItem]
    seed: Optional[int] = None

    def select(self, split: str) -> List[ManifestItem]:
        return [it for it in self.items if it.split == split]

    def counts(self) -> dict:
        out = {s: 0 for s in SPLITS}
        for it in self.items:
            out[it.split] += 1
        return out


@dataclass(frozen=True)
class ManifestCheck:
    missing: List[str]
    extra: List[str]

    @property
    def ok(self) -> bool:
        return not self.missing and not self.extra


class SplitMix64:
    """Tiny portable PRNG for reproducible shuffles (64-bit SplitMix)."""

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self._state = seed & self._MASK

    def next(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & self._MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)

    def shuffle(self, seq: list) -> None:
        for i in range(len(seq) - 1, 0, -1):
            j = self.next() % (i + 1)
            seq[i], seq[j] = seq[j], seq[i]


def _scan_wavs(root: Path) -> List[Path]:
    """All .wav files under root, sorted by (filename, relative path)."""
    found = [p for p in root.rglob("*.wav") if p.is_file()]
    return sorted(found, key=lambda p: (p.name, str(p.relative_to(root))))


def build_lj_manifest(root: PathLike) -> Manifest:
    """First 20 clips (lexicographic) -> test, next 10 -> validation, rest train."""
    root = Path(root)
    wavs = _scan_wavs(root)
    if not wavs:
        raise EmptyCorpusError(f"no .wav files under {root}")
    if len(wavs) < LJ_TEST_COUNT + LJ_VALIDATION_COUNT:
        raise MissingFilesError(
            f"LJ split rule needs at least {LJ_TEST_COUNT + LJ_VALIDATION_COUNT} "
            f"clips, found {len(wavs)}"
        )
    items = []
    for i, p in enumerate(wavs):
        if i < LJ_TEST_COUNT:
            split = "test"
        elif i < LJ_TEST_COUNT + LJ_VALIDATION_COUNT:
            split = "validation"
        else:
            split = "train"
        items.append(
            ManifestItem(p.stem, str(p.relative_to(root)), "LJ", split)
        )
    return Manifest("lj", items)


def _vctk_speaker(root: Path, p: Path) -> str:
    if p.parent != root:
        return p.parent.name
    return p.stem.split("_")[0]


def build_vctk_manifest(root: PathLike, seed: int = DEFAULT_SEED) -> Manifest:
    """Seed-deterministic 85/10/5 split by count over the pooled file list.

    Train and validation counts are floored; the remainder goes to test.
    """
    root = Path(root)
    wavs = _scan_wavs(root)
    if not wavs:
        raise EmptyCorpusError(f"no .wav files under {root}")

    order = list(range(len(wavs)))
    SplitMix64(seed).shuffle(order)
    n = len(wavs)
    n_train = int(VCTK_TRAIN_FRACTION * n)
    n_val = int(VCTK_VALIDATION_FRACTION * n)
    split_of = {}
    for rank, idx in enumerate(order):
        if rank < n_train:
            split_of[idx] = "train"
        elif rank < n_train + n_val:
            split_of[idx] = "validation"
        else:
            split_of[idx] = "test"

    items = [
        ManifestItem(p.stem, str(p.relative_to(root)), _vctk_speaker(root, p), split_of[i])
        for i, p in enumerate(wavs)
    ]
    return Manifest("vctk", items, seed=seed)


def build_libritts_manifest(root: PathLike) -> Manifest:
    """Map LibriTTS subset directories to splits; speaker from the path."""
    root = Path(root)
    present = [name for name in _LIBRITTS_SUBSETS if (root / name).is_dir()]
    if not present:
        raise UnknownLayoutError(
            f"{root} contains none of the LibriTTS subset directories "
            f"({', '.join(_LIBRITTS_SUBSETS)})"
        )
    items = []
    for name in present:
        split = _LIBRITTS_SUBSETS[name]
        for p in _scan_wavs(root / name):
            rel = p.relative_to(root / name)
            speaker = rel.parts[0] if len(rel.parts) > 1 else "unknown"
            items.append(
                ManifestItem(p.stem, str(p.relative_to(root)), speaker, split)
            )
    if not items:
        raise EmptyCorpusError(f"LibriTTS subset directories under {root} hold no .wav files")
    return Manifest("libritts", items)


def speakers_disjoint(m: Manifest, split_a: str, split_b: str) -> bool:
    a = {it.speaker_id for it in m.items if it.split == split_a}
    b = {it.speaker_id for it in m.items if it.split == split_b}
    return not (a & b)


def verify_manifest(m: Manifest, root: PathLike) -> ManifestCheck:
    """Report manifest paths absent on disk and on-disk wavs absent from it."""
    root = Path(root)
    listed = {it.relative_path for it in m.items}
    on_disk = {str(p.relative_to(root)) for p in _scan_wavs(root)}
    return ManifestCheck(
        missing=sorted(listed - on_disk),
        extra=sorted(on_disk - listed),
    )


def save_manifest(m: Manifest, path: PathLike) -> None:
    doc = {
        "corpus": m.corpus_name,
        "seed": m.seed,
        "items": [
            {
                "id": it.utterance_id,
                "path": it.relative_path,
                "speaker": it.speaker_id,
                "split": it.split,
            }
            for it in m.items
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def load_manifest(path: PathLike) -> Manifest:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        items = [
            ManifestItem(e["id"], e["path"], e["speaker"], e["split"])
            for e in doc["items"]
        ]
        manifest = Manifest(doc["corpus"], items, seed=doc.get("seed"))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatchError(f"{path}: not a manifest file ({exc})") from exc
    for it in manifest.items:
        if it.split not in SPLITS:
            raise SchemaMismatchError(f"{path}: unknown split label {it.split!r}")
    return manifest
