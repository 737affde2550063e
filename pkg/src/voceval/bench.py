"""Real-time-factor benchmark harness for external vocoder commands.

A vocoder is any command that turns a mel feature file into a wav. The
harness times it per utterance, derives rtf = synthesis wall-clock seconds
over produced audio seconds, and keeps the synthesized wavs for metric
evaluation afterwards.
"""

from __future__ import annotations

import json
import select
import shlex
import statistics
import subprocess
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from . import audio
from .corpus import ManifestItem
from .errors import (
    BadOutputRateWarning,
    CommandFailedError,
    CommandTimeoutError,
    ConfigError,
    EmptyAudioError,
    MissingFilesError,
    NoOutputError,
    VocevalError,
)
from .spectral import SpectralConfig

PathLike = Union[str, Path]

FEATURE_SUFFIX = ".mel"

DEFAULT_WARMUP = 1
DEFAULT_REPETITIONS = 3


@dataclass(frozen=True)
class VocoderAdapter:
    """External vocoder invocation: a command template plus timing policy.

    One-shot mode substitutes {in} and {out} into the template per item.
    Persistent mode launches the command once; the harness then writes
    "<in>\\t<out>" lines to its stdin and waits for "DONE <out>" replies,
    so model-load time stays outside the timed region.
    """

    system_name: str
    command_template: str
    timeout_s: float = 300.0
    device_label: str = "cpu"
    persistent: bool = False
    metadata: Dict[str, Optional[float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ConfigError(f"timeout_s must be positive, got {self.timeout_s}")
        if not self.persistent:
            for ph in ("{in}", "{out}"):
                n = self.command_template.count(ph)
                if n != 1:
                    raise ConfigError(
                        f"command template must contain {ph} exactly once, found {n}: "
                        f"{self.command_template!r}"
                    )

    def argv_for(self, in_path: Path, out_path: Path) -> List[str]:
        tokens = shlex.split(self.command_template)
        return [
            t.replace("{in}", str(in_path)).replace("{out}", str(out_path))
            for t in tokens
        ]


@dataclass(frozen=True)
class ItemTiming:
    utterance_id: str
    synth_seconds: float
    audio_seconds: float
    rtf: float


@dataclass(frozen=True)
class ItemFailure:
    utterance_id: str
    kind: str
    message: str


@dataclass(frozen=True)
class RtfResult:
    system_name: str
    device_label: str
    per_item: List[ItemTiming]
    failures: List[ItemFailure]
    median_rtf: float
    mean_rtf: float
    warmup_count: int
    repetitions: int
    timing_mode: str  # "spawn" or "persistent"

    @property
    def excluded_count(self) -> int:
        return len(self.failures)


class _PersistentRunner:
    """Drives one long-lived vocoder process over the line protocol."""

    def __init__(self, argv: List[str]):
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                bufsize=0,
            )
        except OSError as exc:
            raise CommandFailedError(f"could not launch {argv[0]!r}: {exc}") from exc
        self._buf = b""

    def run_item(self, in_path: Path, out_path: Path, timeout_s: float) -> None:
        proc = self._proc
        if proc.poll() is not None:
            raise CommandFailedError(
                f"persistent vocoder exited early with code {proc.returncode}"
            )
        try:
            proc.stdin.write(f"{in_path}\t{out_path}\n".encode())
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise CommandFailedError(f"persistent vocoder pipe closed: {exc}") from exc

        deadline = time.monotonic() + timeout_s
        while b"\n" not in self._buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self.close()
                raise CommandTimeoutError(
                    f"no reply within {timeout_s:.1f}s for {in_path.name}"
                )
            ready, _, _ = select.select([proc.stdout], [], [], remaining)
            if not ready:
                continue
            chunk = proc.stdout.read(4096)
            if not chunk:
                raise CommandFailedError("persistent vocoder closed stdout")
            self._buf += chunk
        line, _, self._buf = self._buf.partition(b"\n")
        reply = line.decode("utf-8", errors="replace").strip()
        if reply != f"DONE {out_path}":
            raise CommandFailedError(f"unexpected reply {reply!r}")

    def close(self) -> None:
        proc = self._proc
        if proc.poll() is None:
            try:
                proc.stdin.close()
            except OSError:
                pass
            try:
                proc.wait(timeout=5.0)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()


def _run_once(adapter: VocoderAdapter, in_path: Path, out_path: Path) -> None:
    argv = adapter.argv_for(in_path, out_path)
    try:
        done = subprocess.run(
            argv,
            stdout=subprocess.DEVNULL,
            stderr=subprocess.PIPE,
            timeout=adapter.timeout_s,
        )
    except subprocess.TimeoutExpired:
        raise CommandTimeoutError(
            f"{adapter.system_name} exceeded {adapter.timeout_s:.1f}s on {in_path.name}"
        ) from None
    except OSError as exc:
        raise CommandFailedError(f"could not launch {argv[0]!r}: {exc}") from exc
    if done.returncode != 0:
        tail = done.stderr.decode("utf-8", errors="replace").strip()[-200:]
        raise CommandFailedError(
            f"{adapter.system_name} exited {done.returncode} on {in_path.name}"
            + (f": {tail}" if tail else "")
        )


def _measure_output(out_path: Path, cfg: SpectralConfig) -> float:
    """Seconds of audio in the produced file; rewrites it if at the wrong rate."""
    if not out_path.exists() or out_path.stat().st_size == 0:
        raise NoOutputError(f"command exited 0 but {out_path} is missing or empty")
    try:
        wav = audio.load_wav(out_path)
    except EmptyAudioError:
        raise NoOutputError(f"command produced an empty wav at {out_path}") from None
    if wav.sample_rate != cfg.sample_rate:
        warnings.warn(
            f"{out_path.name}: produced at {wav.sample_rate} Hz, "
            f"expected {cfg.sample_rate} Hz; resampled in place",
            BadOutputRateWarning,
            stacklevel=3,
        )
        wav = audio.resample(wav, cfg.sample_rate)
        audio.save_wav(wav, out_path)
    return wav.duration_seconds


def run_rtf(
    adapter: VocoderAdapter,
    items: Sequence[ManifestItem],
    features_dir: PathLike,
    cfg: SpectralConfig,
    warmup: int = DEFAULT_WARMUP,
    repetitions: int = DEFAULT_REPETITIONS,
    out_dir: Optional[PathLike] = None,
) -> RtfResult:
    """Time the adapter over every item, serially, and aggregate rtf values.

    Per item the command runs `warmup` times untimed, then `repetitions`
    times timed; synth_seconds is the median of the timed runs. Failures are
    recorded per item and excluded from the aggregates. Synthesized wavs are
    kept in out_dir (a fresh temporary directory when not given).
    """
    if warmup < 0:
        raise ConfigError(f"warmup must be >= 0, got {warmup}")
    if repetitions < 1:
        raise ConfigError(f"repetitions must be >= 1, got {repetitions}")

    features_dir = Path(features_dir)
    feature_paths = {it.utterance_id: features_dir / (it.utterance_id + FEATURE_SUFFIX) for it in items}
    absent = sorted(uid for uid, p in feature_paths.items() if not p.exists())
    if absent:
        raise MissingFilesError(
            f"no feature file for {len(absent)} utterance(s): {', '.join(absent[:5])}"
        )

    if out_dir is None:
        import tempfile

        out_dir = Path(tempfile.mkdtemp(prefix=f"voceval-{adapter.system_name}-"))
    else:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

    runner = _PersistentRunner(shlex.split(adapter.command_template)) if adapter.persistent else None

    per_item: List[ItemTiming] = []
    failures: List[ItemFailure] = []
    try:
        for it in items:
            in_path = feature_paths[it.utterance_id]
            out_path = out_dir / (it.utterance_id + ".wav")
            try:
                times = []
                for rep in range(warmup + repetitions):
                    start = time.perf_counter()
                    if runner is not None:
                        runner.run_item(in_path, out_path, adapter.timeout_s)
                    else:
                        _run_once(adapter, in_path, out_path)
                    elapsed = time.perf_counter() - start
                    if rep >= warmup:
                        times.append(elapsed)
                synth_seconds = statistics.median(times)
                audio_seconds = _measure_output(out_path, cfg)
            except (CommandFailedError, CommandTimeoutError, NoOutputError) as exc:
                failures.append(ItemFailure(it.utterance_id, type(exc).__name__, str(exc)))
                if runner is not None and runner._proc.poll() is not None:
                    # dead persistent process cannot serve later items
                    runner = _PersistentRunner(shlex.split(adapter.command_template))
                continue
            per_item.append(
                ItemTiming(it.utterance_id, synth_seconds, audio_seconds, synth_seconds / audio_seconds)
            )
    finally:
        if runner is not None:
            runner.close()

    rtfs = [t.rtf for t in per_item]
    return RtfResult(
        system_name=adapter.system_name,
        device_label=adapter.device_label,
        per_item=per_item,
        failures=failures,
        median_rtf=statistics.median(rtfs) if rtfs else float("nan"),
        mean_rtf=statistics.fmean(rtfs) if rtfs else float("nan"),
        warmup_count=warmup,
        repetitions=repetitions,
        timing_mode="persistent" if adapter.persistent else "spawn",
    )


def compare_rtf(results: Sequence[RtfResult]) -> List[RtfResult]:
    """Rank results ascending by median rtf within each device label."""
    if not results:
        raise ConfigError("compare_rtf needs at least one result")
    return sorted(results, key=lambda r: (r.device_label, r.median_rtf, r.system_name))


def rtf_to_csv(results: Sequence[RtfResult]) -> str:
    lines = ["system,device,utterance,synth_s,audio_s,rtf"]
    for r in results:
        for t in r.per_item:
            lines.append(
                f"{r.system_name},{r.device_label},{t.utterance_id},"
                f"{t.synth_seconds:.6f},{t.audio_seconds:.6f},{t.rtf:.6f}"
            )
    return "\n".join(lines) + "\n"


def load_adapter(path: PathLike) -> VocoderAdapter:
    """Read an adapter config JSON written by hand or by tooling."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return VocoderAdapter(
            system_name=doc["name"],
            command_template=doc["command"],
            timeout_s=float(doc.get("timeout_s", 300.0)),
            device_label=doc.get("device", "cpu"),
            persistent=bool(doc.get("persistent", False)),
            metadata=doc.get("metadata", {}),
        )
    except VocevalError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: not an adapter config ({exc})") from exc
