"""Command-line entry point: split, extract, glim, eval, bench, report,
mos-serve, plus a fixture generator for self-contained runs.

Exit codes: 0 success, 1 when any per-item failure occurred, 2 for
usage or configuration errors.
"""

from __future__ import annotations

import json
import secrets
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import click
import numpy as np

from . import audio, bench, corpus, embeddings, fixtures, formats, metrics, report, spectral
from .config import ToolConfig, default_config, load_config
from .errors import VocevalError


def _fail_items(failures: Sequence[Tuple[str, str]]) -> None:
    """Echo per-item failures and exit 1 if there were any."""
    for uid, msg in failures:
        click.echo(f"FAIL {uid}: {msg}", err=True)
    if failures:
        raise SystemExit(1)


def _run_items(jobs: int, worker, tasks: list) -> list:
    if jobs <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks))


def _load_resampled(path: Path, cfg: spectral.SpectralConfig) -> audio.Waveform:
    return audio.resample(audio.load_wav(path), cfg.sample_rate)


# module-level workers so ProcessPoolExecutor can pickle them


def _extract_worker(task) -> Tuple[str, Optional[str]]:
    cfg, wav_path, uid, out_dir = task
    try:
        wav = _load_resampled(Path(wav_path), cfg)
        mel = spectral.mel_spectrogram(wav, cfg)
        formats.save_mel(mel, Path(out_dir) / f"{uid}{bench.FEATURE_SUFFIX}")
        return uid, None
    except VocevalError as exc:
        return uid, f"{type(exc).__name__}: {exc}"


def _glim_worker(task) -> Tuple[str, Optional[str]]:
    cfg, wav_path, uid, out_dir = task
    try:
        wav = _load_resampled(Path(wav_path), cfg)
        mel = spectral.mel_spectrogram(wav, cfg)
        rec = spectral.griffin_lim(mel, cfg)
        audio.save_wav(rec, Path(out_dir) / f"{uid}.wav")
        return uid, None
    except VocevalError as exc:
        return uid, f"{type(exc).__name__}: {exc}"


def _eval_worker(task):
    """Per-utterance metrics plus embedding windows for both sides."""
    cfg, provider, ref_path, synth_path, uid = task
    try:
        ref_wav = _load_resampled(Path(ref_path), cfg)
        syn_wav = _load_resampled(Path(synth_path), cfg)
        ref_mel = spectral.mel_spectrogram(ref_wav, cfg)
        syn_mel = spectral.mel_spectrogram(syn_wav, cfg)
        pair = metrics.align(ref_mel, syn_mel)
        vals = metrics.compute_pair_metrics(pair)
        ref_vecs = embeddings.embed(ref_wav, provider, cfg)
        syn_vecs = embeddings.embed(syn_wav, provider, cfg)
        row = {"id": uid, "ssim": vals.ssim, "ls_mse": vals.ls_mse, "psnr": vals.psnr}
        return uid, None, row, ref_vecs, syn_vecs
    except VocevalError as exc:
        return uid, f"{type(exc).__name__}: {exc}", None, None, None


def _embed_worker(task):
    cfg, provider, wav_path = task
    try:
        wav = _load_resampled(Path(wav_path), cfg)
        return str(wav_path), None, embeddings.embed(wav, provider, cfg)
    except VocevalError as exc:
        return str(wav_path), f"{type(exc).__name__}: {exc}", None


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON config file.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Parallel workers for per-utterance stages.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.pass_context
def cli(ctx, config_path, jobs, seed):
    """Vocoder evaluation toolkit: features, baseline synthesis, metrics,
    timing, and listening tests."""
    cfg = load_config(config_path) if config_path else default_config()
    if seed is not None:
        cfg = ToolConfig(spectral=cfg.spectral, provider=cfg.provider, seed=seed)
    ctx.obj = {"config": cfg, "jobs": max(1, jobs), "seed_explicit": seed is not None}


@cli.command()
@click.argument("corpus_kind", type=click.Choice(["lj", "vctk", "libritts"]))
@click.option("--root", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.pass_obj
def split(obj, corpus_kind, root, out_path):
    """Build a train/validation/test manifest for a corpus directory."""
    if corpus_kind == "lj":
        manifest = corpus.build_lj_manifest(root)
    elif corpus_kind == "vctk":
        manifest = corpus.build_vctk_manifest(root, seed=obj["config"].seed)
    else:
        manifest = corpus.build_libritts_manifest(root)
    corpus.save_manifest(manifest, out_path)
    counts = manifest.counts()
    click.echo(
        f"{corpus_kind}: {len(manifest.items)} items "
        f"(train {counts['train']}, validation {counts['validation']}, test {counts['test']}) -> {out_path}"
    )


def _selected_items(manifest_path: str, root: str, split_name: str):
    manifest = corpus.load_manifest(manifest_path)
    items = manifest.select(split_name)
    if not items:
        raise click.UsageError(f"manifest has no items in split {split_name!r}")
    return manifest, [(it.utterance_id, str(Path(root) / it.relative_path)) for it in items]


@cli.command()
@click.option("--manifest", "manifest_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--root", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--split", "split_name", default="test", show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@click.pass_obj
def extract(obj, manifest_path, root, split_name, out_dir):
    """Write one mel feature file per selected utterance."""
    _, pairs = _selected_items(manifest_path, root, split_name)
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    cfg = obj["config"].spectral
    tasks = [(cfg, path, uid, out_dir) for uid, path in pairs]
    results = _run_items(obj["jobs"], _extract_worker, tasks)
    done = sum(1 for _, err in results if err is None)
    click.echo(f"extracted {done}/{len(tasks)} feature files -> {out_dir}")
    _fail_items([(uid, err) for uid, err in results if err])


@cli.command()
@click.option("--manifest", "manifest_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--root", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--split", "split_name", default="test", show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@click.pass_obj
def glim(obj, manifest_path, root, split_name, out_dir):
    """Synthesize the built-in baseline: mel extraction + phase reconstruction."""
    _, pairs = _selected_items(manifest_path, root, split_name)
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    cfg = obj["config"].spectral
    tasks = [(cfg, path, uid, out_dir) for uid, path in pairs]
    results = _run_items(obj["jobs"], _glim_worker, tasks)
    done = sum(1 for _, err in results if err is None)
    click.echo(f"synthesized {done}/{len(tasks)} wavs -> {out_dir}")
    _fail_items([(uid, err) for uid, err in results if err])


def _pool_embeddings(rows: List[np.ndarray]) -> Optional[np.ndarray]:
    rows = [r for r in rows if r is not None and len(r)]
    if not rows:
        return None
    return np.concatenate(rows, axis=0)


@cli.command("eval")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--root", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--split", "split_name", default="test", show_default=True)
@click.option("--synth-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--system", "system_name", default=None, help="System label; defaults to the synth dir name.")
@click.option("--background-dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="FAD background audio; reference split audio when omitted.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.pass_obj
def eval_cmd(obj, manifest_path, root, split_name, synth_dir, system_name, background_dir, out_path):
    """Score one system's synthesized wavs against the reference split."""
    manifest, pairs = _selected_items(manifest_path, root, split_name)
    cfg = obj["config"].spectral
    provider = obj["config"].provider
    system_name = system_name or Path(synth_dir).name

    synth_paths = {uid: Path(synth_dir) / f"{uid}.wav" for uid, _ in pairs}
    absent = sorted(uid for uid, p in synth_paths.items() if not p.exists())
    if absent:
        click.echo(
            f"MissingSynth: no wav for {', '.join(absent[:10])}"
            + (f" (+{len(absent) - 10} more)" if len(absent) > 10 else ""),
            err=True,
        )
        raise SystemExit(1)

    tasks = [
        (cfg, provider, ref_path, str(synth_paths[uid]), uid) for uid, ref_path in pairs
    ]
    results = _run_items(obj["jobs"], _eval_worker, tasks)

    failures = [(uid, err) for uid, err, *_ in results if err]
    rows = [row for _, err, row, _, _ in results if err is None]
    ref_vecs = _pool_embeddings([rv for _, err, _, rv, _ in results if err is None])
    syn_vecs = _pool_embeddings([sv for _, err, _, _, sv in results if err is None])

    if not rows:
        _fail_items(failures)
        raise SystemExit(1)

    if background_dir is not None:
        bg_wavs = sorted(Path(background_dir).glob("*.wav"))
        bg_results = _run_items(
            obj["jobs"], _embed_worker, [(cfg, provider, str(p)) for p in bg_wavs]
        )
        failures += [(path, err) for path, err, _ in bg_results if err]
        ref_vecs = _pool_embeddings([v for _, err, v in bg_results if err is None])
        background_label = str(background_dir)
    else:
        background_label = "reference"

    fad_value = None
    if ref_vecs is not None and syn_vecs is not None:
        try:
            bg = embeddings.fit_gaussian(ref_vecs, provider)
            ev = embeddings.fit_gaussian(syn_vecs, provider)
            fad_value = embeddings.fad(bg, ev)
        except VocevalError as exc:
            failures.append(("fad", f"{type(exc).__name__}: {exc}"))

    mean_mse = float(np.mean([r["ls_mse"] for r in rows]))
    aggregate = {
        "ssim": float(np.mean([r["ssim"] for r in rows])),
        "ls_mse": mean_mse,
        # dB of the mean error, so the psnr/ls_mse identity holds row-wise
        "psnr": metrics.psnr_from_ls_mse(mean_mse),
        "fad": fad_value,
        "fad_background": background_label,
        "n_utterances": len(rows),
    }
    doc = {
        "corpus": manifest.corpus_name,
        "system": system_name,
        "per_utterance": rows,
        "aggregate": aggregate,
    }
    report.write_eval_json(out_path, doc)
    click.echo(report.render_markdown(report.build_report([doc])))
    _fail_items(failures)


@cli.command("bench")
@click.option("--adapter", "adapter_paths", type=click.Path(exists=True, dir_okay=False), multiple=True, required=True)
@click.option("--manifest", "manifest_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--split", "split_name", default="test", show_default=True)
@click.option("--features-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out-csv", type=click.Path(dir_okay=False), required=True)
@click.option("--warmup", type=int, default=bench.DEFAULT_WARMUP, show_default=True)
@click.option("--repetitions", type=int, default=bench.DEFAULT_REPETITIONS, show_default=True)
@click.option("--synth-root", type=click.Path(file_okay=False), default=None,
              help="Keep synthesized wavs under this directory, one subdir per system.")
@click.pass_obj
def bench_cmd(obj, adapter_paths, manifest_path, split_name, features_dir, out_csv, warmup, repetitions, synth_root):
    """Time external vocoder commands and write per-item rtf rows."""
    manifest = corpus.load_manifest(manifest_path)
    items = manifest.select(split_name)
    if not items:
        raise click.UsageError(f"manifest has no items in split {split_name!r}")
    cfg = obj["config"].spectral

    results = []
    any_failures = False
    for adapter_path in adapter_paths:
        adapter = bench.load_adapter(adapter_path)
        out_dir = Path(synth_root) / adapter.system_name if synth_root else None
        res = bench.run_rtf(
            adapter, items, features_dir, cfg,
            warmup=warmup, repetitions=repetitions, out_dir=out_dir,
        )
        results.append(res)
        any_failures = any_failures or bool(res.failures)
        for f in res.failures:
            click.echo(f"FAIL {adapter.system_name}/{f.utterance_id}: {f.kind}: {f.message}", err=True)

    Path(out_csv).write_text(bench.rtf_to_csv(results), encoding="utf-8")
    click.echo("| System | Device | Median RTF | Mean RTF | Items | Excluded | Mode |")
    click.echo("| --- | --- | --- | --- | --- | --- | --- |")
    for res in bench.compare_rtf(results):
        click.echo(
            f"| {res.system_name} | {res.device_label} | {res.median_rtf:.4f} "
            f"| {res.mean_rtf:.4f} | {len(res.per_item)} | {res.excluded_count} "
            f"| {res.timing_mode} |"
        )
    if any_failures:
        raise SystemExit(1)


@cli.command("report")
@click.option("--eval", "eval_paths", type=click.Path(exists=True, dir_okay=False), multiple=True, required=True)
@click.option("--mos-summary", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Admin summary JSON from the listening-test service.")
@click.option("--metadata", type=click.Path(exists=True, dir_okay=False), default=None,
              help='JSON {"system": {"params_m": x, "gflops": y}}.')
@click.option("--rtf-csv", "rtf_csvs", type=click.Path(exists=True, dir_okay=False), multiple=True)
@click.option("--out-md", type=click.Path(dir_okay=False), required=True)
@click.option("--out-csv", type=click.Path(dir_okay=False), default=None)
def report_cmd(eval_paths, mos_summary, metadata, rtf_csvs, out_md, out_csv):
    """Combine eval documents (plus optional MOS/RTF/metadata) into tables."""
    docs = [report.load_eval_json(p) for p in eval_paths]

    mos_by_system: Optional[Dict[str, Tuple[float, Optional[float]]]] = None
    if mos_summary:
        entries = json.loads(Path(mos_summary).read_text(encoding="utf-8"))
        mos_by_system = {e["system"]: (e["mos"], e.get("ci95")) for e in entries}

    meta = json.loads(Path(metadata).read_text(encoding="utf-8")) if metadata else None
    rtf_rows: list = []
    for p in rtf_csvs:
        rtf_rows += report.parse_rtf_csv(Path(p).read_text(encoding="utf-8"))

    rep = report.build_report(docs, mos_by_system, meta)
    markdown = report.render_markdown(rep, rtf_rows)
    Path(out_md).write_text(markdown, encoding="utf-8")
    if out_csv:
        Path(out_csv).write_text(report.render_csv(rep), encoding="utf-8")
    click.echo(markdown)


@cli.command("mos-serve")
@click.option("--test", "test_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Test definition JSON; optional when the state dir is already populated.")
@click.option("--state", "state_dir", type=click.Path(file_okay=False), required=True)
@click.option("--admin-token", default=None, help="Defaults to a fresh random token, printed once.")
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None,
              help="Static rater interface to serve at /.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8400, show_default=True)
def mos_serve(test_path, state_dir, admin_token, ui_dir, host, port):
    """Host the listening-test HTTP service."""
    from .mos.service import MosStore, create_app, load_test_definition

    store = MosStore(state_dir)
    if not store.has_test:
        if test_path is None:
            raise click.UsageError("--test is required for a fresh state directory")
        store.install(load_test_definition(test_path))
    elif test_path is not None:
        click.echo("state directory already holds a test definition; --test ignored", err=True)

    if admin_token is None:
        admin_token = secrets.token_urlsafe(16)
        click.echo(f"admin token: {admin_token}")

    app = create_app(store, admin_token, ui_dir)
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")


@cli.command("fixture")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--clips", type=int, default=fixtures.DEFAULT_CLIP_COUNT, show_default=True)
@click.pass_obj
def fixture_cmd(obj, out_dir, clips):
    """Generate the bundled synthetic-speech corpus plus its manifest."""
    seed = obj["config"].seed if obj["seed_explicit"] else fixtures.DEFAULT_SEED
    manifest = fixtures.write_fixture_corpus(out_dir, n_clips=clips, seed=seed)
    click.echo(f"wrote {len(manifest.items)} clips and fixture.json -> {out_dir}")


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except click.Abort:
        sys.exit(130)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except VocevalError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
