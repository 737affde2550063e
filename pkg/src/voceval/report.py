"""Evaluation-report assembly and rendering (Markdown, CSV, JSON).

The quality table carries one row per system with SSIM / LS-MSE / PSNR /
FAD / MOS columns; a complexity table merges user-supplied parameter and
GFLOPS metadata with measured real-time factors. PSNR and LS-MSE are
cross-checked at render time so an inconsistent report can never be emitted.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import ConsistencyError, SchemaMismatchError
from .metrics import psnr_from_ls_mse
from .mos.stats import format_mos

PathLike = Union[str, Path]

PSNR_CONSISTENCY_DB = 0.01


@dataclass(frozen=True)
class ReportRow:
    system_name: str
    ssim: float
    ls_mse: float
    psnr: float
    n_utterances: int
    fad: Optional[float] = None
    fad_background: Optional[str] = None
    mos: Optional[Tuple[float, Optional[float]]] = None


@dataclass(frozen=True)
class MetricReport:
    corpus_name: str
    rows: List[ReportRow]
    metadata: Dict[str, dict] = field(default_factory=dict)


# -- eval JSON --------------------------------------------------------------
# {"corpus": str, "system": str, "per_utterance": [{"id", "ssim", "ls_mse",
#  "psnr"}], "aggregate": {"ssim", "ls_mse", "psnr", "fad", "fad_background",
#  "n_utterances"}}. PSNR serializes as the string "inf" when infinite, since
# JSON has no infinity literal.


def _encode_psnr(x: float):
    return "inf" if math.isinf(x) else x


def _decode_psnr(x) -> float:
    if x == "inf":
        return math.inf
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return float(x)
    raise SchemaMismatchError(f"bad psnr value {x!r}")


def write_eval_json(path: PathLike, doc: dict) -> None:
    enc = json.loads(json.dumps(doc))  # deep copy, also rejects non-JSON types
    enc["aggregate"]["psnr"] = _encode_psnr(doc["aggregate"]["psnr"])
    for row in enc["per_utterance"]:
        row["psnr"] = _encode_psnr(row["psnr"])
    Path(path).write_text(json.dumps(enc, indent=2) + "\n", encoding="utf-8")


def load_eval_json(path: PathLike) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        doc["aggregate"]["psnr"] = _decode_psnr(doc["aggregate"]["psnr"])
        for row in doc["per_utterance"]:
            row["psnr"] = _decode_psnr(row["psnr"])
        for key in ("corpus", "system"):
            if not isinstance(doc[key], str):
                raise SchemaMismatchError(f"{path}: field {key!r} is not a string")
        float(doc["aggregate"]["ssim"])
        float(doc["aggregate"]["ls_mse"])
        int(doc["aggregate"]["n_utterances"])
    except SchemaMismatchError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatchError(f"{path}: not an eval document ({exc})") from exc
    return doc


def build_report(
    eval_docs: Sequence[dict],
    mos_by_system: Optional[Dict[str, Tuple[float, Optional[float]]]] = None,
    metadata: Optional[Dict[str, dict]] = None,
) -> MetricReport:
    if not eval_docs:
        raise SchemaMismatchError("need at least one eval document")
    corpora = {doc["corpus"] for doc in eval_docs}
    if len(corpora) > 1:
        raise SchemaMismatchError(
            f"eval documents span multiple corpora: {sorted(corpora)}"
        )
    mos_by_system = mos_by_system or {}
    rows = []
    for doc in sorted(eval_docs, key=lambda d: d["system"]):
        agg = doc["aggregate"]
        rows.append(
            ReportRow(
                system_name=doc["system"],
                ssim=float(agg["ssim"]),
                ls_mse=float(agg["ls_mse"]),
                psnr=float(agg["psnr"]),
                n_utterances=int(agg["n_utterances"]),
                fad=None if agg.get("fad") is None else float(agg["fad"]),
                fad_background=agg.get("fad_background"),
                mos=mos_by_system.get(doc["system"]),
            )
        )
    return MetricReport(doc["corpus"], rows, metadata or {})


def check_report(report: MetricReport) -> None:
    """Fail loudly on internal inconsistency; rendering calls this first."""
    counts = {r.n_utterances for r in report.rows}
    if len(counts) > 1:
        raise ConsistencyError(
            f"rows disagree on utterance count: {sorted(counts)}"
        )
    for r in report.rows:
        expected = psnr_from_ls_mse(r.ls_mse)
        if math.isinf(expected) or math.isinf(r.psnr):
            if expected != r.psnr:
                raise ConsistencyError(
                    f"{r.system_name}: psnr {r.psnr} vs ls_mse-implied {expected}"
                )
        elif abs(r.psnr - expected) > PSNR_CONSISTENCY_DB:
            raise ConsistencyError(
                f"{r.system_name}: psnr {r.psnr:.4f} dB inconsistent with "
                f"ls_mse {r.ls_mse:.6g} (implies {expected:.4f} dB)"
            )


# -- RTF CSV ------------------------------------------------------------------


def parse_rtf_csv(text: str) -> List[dict]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "system,device,utterance,synth_s,audio_s,rtf":
        raise SchemaMismatchError("not an rtf csv (bad header)")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 6:
            raise SchemaMismatchError(f"bad rtf csv row: {ln!r}")
        rows.append(
            {
                "system": parts[0],
                "device": parts[1],
                "utterance": parts[2],
                "synth_s": float(parts[3]),
                "audio_s": float(parts[4]),
                "rtf": float(parts[5]),
            }
        )
    return rows


def _median_rtf_by_system(rtf_rows: Sequence[dict]) -> Dict[Tuple[str, str], float]:
    grouped: Dict[Tuple[str, str], List[float]] = {}
    for row in rtf_rows:
        grouped.setdefault((row["system"], row["device"]), []).append(row["rtf"])
    return {key: statistics.median(vals) for key, vals in grouped.items()}


# -- rendering ------------------------------------------------------------------


def _fmt(x: Optional[float], spec: str) -> str:
    if x is None:
        return "-"
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return format(x, spec)


def render_markdown(report: MetricReport, rtf_rows: Sequence[dict] = ()) -> str:
    check_report(report)
    out = [f"# Evaluation — {report.corpus_name}", ""]
    out.append("| System | SSIM (↑) | LS-MSE (↓) | PSNR (↑) | FAD (↓) | MOS (↑) | N |")
    out.append("| --- | --- | --- | --- | --- | --- | --- |")
    for r in report.rows:
        mos_cell = "-" if r.mos is None else format_mos(*r.mos)
        out.append(
            f"| {r.system_name} | {_fmt(r.ssim, '.4f')} | {_fmt(r.ls_mse, '.5f')} "
            f"| {_fmt(r.psnr, '.2f')} | {_fmt(r.fad, '.4f')} | {mos_cell} "
            f"| {r.n_utterances} |"
        )
    backgrounds = {r.fad_background for r in report.rows if r.fad_background}
    if backgrounds:
        out.append("")
        out.append(f"FAD background: {', '.join(sorted(backgrounds))}.")

    medians = _median_rtf_by_system(rtf_rows)
    if medians or report.metadata:
        out.append("")
        out.append("## Complexity")
        out.append("")
        out.append("| System | Device | Median RTF | Params (M) | GFLOPS |")
        out.append("| --- | --- | --- | --- | --- |")
        systems = {s for s, _ in medians} | set(report.metadata)
        entries = []
        for system in systems:
            meta = report.metadata.get(system, {})
            devices = sorted(d for s, d in medians if s == system) or [None]
            for device in devices:
                rtf = medians.get((system, device)) if device else None
                entries.append((device or "-", rtf, system, meta))
        # ascending by median rtf within each device, ties by name
        entries.sort(key=lambda e: (e[0], e[1] if e[1] is not None else math.inf, e[2]))
        for device, rtf, system, meta in entries:
            out.append(
                f"| {system} | {device} | {_fmt(rtf, '.4f')} "
                f"| {_fmt(meta.get('params_m'), '.2f')} "
                f"| {_fmt(meta.get('gflops'), '.2f')} |"
            )
    return "\n".join(out) + "\n"


def render_csv(report: MetricReport) -> str:
    check_report(report)
    lines = ["system,n,ssim,ls_mse,psnr,fad,mos,mos_ci95"]
    for r in report.rows:
        mos_mean = "" if r.mos is None else f"{r.mos[0]:.6g}"
        mos_ci = "" if r.mos is None or r.mos[1] is None else f"{r.mos[1]:.6g}"
        fad = "" if r.fad is None else f"{r.fad:.6g}"
        psnr = "inf" if math.isinf(r.psnr) else f"{r.psnr:.6g}"
        lines.append(
            f"{r.system_name},{r.n_utterances},{r.ssim:.6g},{r.ls_mse:.6g},"
            f"{psnr},{fad},{mos_mean},{mos_ci}"
        )
    return "\n".join(lines) + "\n"
