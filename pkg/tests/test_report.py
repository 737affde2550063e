"""Eval documents, consistency checks, rendering."""

import json
import math

import pytest

from voceval import report
from voceval.errors import ConsistencyError, SchemaMismatchError


def _doc(system="glim", corpus="fixture", ls_mse=0.004, n=20, fad=0.31):
    psnr = report.psnr_from_ls_mse(ls_mse)
    return {
        "corpus": corpus,
        "system": system,
        "per_utterance": [
            {"id": f"u{i}", "ssim": 0.92, "ls_mse": ls_mse, "psnr": psnr}
            for i in range(n)
        ],
        "aggregate": {
            "ssim": 0.92,
            "ls_mse": ls_mse,
            "psnr": psnr,
            "fad": fad,
            "fad_background": "reference",
            "n_utterances": n,
        },
    }


class TestEvalJson:
    def test_round_trip(self, tmp_path):
        doc = _doc()
        p = tmp_path / "eval.json"
        report.write_eval_json(p, doc)
        back = report.load_eval_json(p)
        assert back["aggregate"]["psnr"] == pytest.approx(doc["aggregate"]["psnr"])
        assert back["system"] == "glim"
        assert len(back["per_utterance"]) == 20

    def test_infinite_psnr_serialized_as_string(self, tmp_path):
        doc = _doc(ls_mse=0.0)
        assert math.isinf(doc["aggregate"]["psnr"])
        p = tmp_path / "ident.json"
        report.write_eval_json(p, doc)
        raw = json.loads(p.read_text())
        assert raw["aggregate"]["psnr"] == "inf"
        assert raw["per_utterance"][0]["psnr"] == "inf"
        back = report.load_eval_json(p)
        assert back["aggregate"]["psnr"] == math.inf

    def test_bad_document(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"corpus": "x"}')
        with pytest.raises(SchemaMismatchError):
            report.load_eval_json(p)

    def test_bad_psnr_value(self, tmp_path):
        doc = _doc()
        p = tmp_path / "e.json"
        report.write_eval_json(p, doc)
        raw = json.loads(p.read_text())
        raw["aggregate"]["psnr"] = "huge"
        p.write_text(json.dumps(raw))
        with pytest.raises(SchemaMismatchError):
            report.load_eval_json(p)


class TestBuildAndCheck:
    def test_rows_sorted_by_system(self):
        rep = report.build_report([_doc("zeta"), _doc("alpha")])
        assert [r.system_name for r in rep.rows] == ["alpha", "zeta"]

    def test_needs_documents(self):
        with pytest.raises(SchemaMismatchError):
            report.build_report([])

    def test_single_corpus_enforced(self):
        with pytest.raises(SchemaMismatchError):
            report.build_report([_doc(corpus="a"), _doc("other", corpus="b")])

    def test_mos_attached(self):
        rep = report.build_report(
            [_doc("glim")], mos_by_system={"glim": (4.1, 0.059)}
        )
        assert rep.rows[0].mos == (4.1, 0.059)

    def test_consistency_trip(self):
        rep = report.build_report([_doc()])
        bad = report.ReportRow(
            "cheat", ssim=0.99, ls_mse=0.004, psnr=40.0, n_utterances=20
        )
        with pytest.raises(ConsistencyError, match="cheat"):
            report.check_report(report.MetricReport("fixture", [bad]))
        report.check_report(rep)  # the honest one passes

    def test_consistency_tolerance_is_one_hundredth_db(self):
        psnr = report.psnr_from_ls_mse(0.004)
        ok = report.ReportRow("a", 0.9, 0.004, psnr + 0.009, 5)
        report.check_report(report.MetricReport("c", [ok]))
        bad = report.ReportRow("a", 0.9, 0.004, psnr + 0.011, 5)
        with pytest.raises(ConsistencyError):
            report.check_report(report.MetricReport("c", [bad]))

    def test_infinite_psnr_must_pair_with_zero_mse(self):
        good = report.ReportRow("ident", 1.0, 0.0, math.inf, 5)
        report.check_report(report.MetricReport("c", [good]))
        bad = report.ReportRow("ident", 1.0, 0.004, math.inf, 5)
        with pytest.raises(ConsistencyError):
            report.check_report(report.MetricReport("c", [bad]))

    def test_utterance_count_mismatch(self):
        rows = [
            report.ReportRow("a", 0.9, 0.004, report.psnr_from_ls_mse(0.004), 5),
            report.ReportRow("b", 0.9, 0.004, report.psnr_from_ls_mse(0.004), 6),
        ]
        with pytest.raises(ConsistencyError):
            report.check_report(report.MetricReport("c", rows))


class TestRtfCsv:
    CSV = (
        "system,device,utterance,synth_s,audio_s,rtf\n"
        "fast,cpu,u0,0.5,2.0,0.25\n"
        "fast,cpu,u1,0.9,2.0,0.45\n"
        "slow,cpu,u0,1.8,2.0,0.9\n"
    )

    def test_parse(self):
        rows = report.parse_rtf_csv(self.CSV)
        assert len(rows) == 3
        assert rows[0] == {
            "system": "fast", "device": "cpu", "utterance": "u0",
            "synth_s": 0.5, "audio_s": 2.0, "rtf": 0.25,
        }

    def test_bad_header(self):
        with pytest.raises(SchemaMismatchError):
            report.parse_rtf_csv("nope\n1,2,3\n")

    def test_bad_row(self):
        with pytest.raises(SchemaMismatchError):
            report.parse_rtf_csv(
                "system,device,utterance,synth_s,audio_s,rtf\nonly,three,cols\n"
            )


class TestRendering:
    def test_markdown_quality_table(self):
        rep = report.build_report(
            [_doc("glim", ls_mse=0.004)], mos_by_system={"glim": (4.1, 0.059)}
        )
        md = report.render_markdown(rep)
        assert "| System | SSIM (↑) | LS-MSE (↓) | PSNR (↑) | FAD (↓) | MOS (↑) | N |" in md
        assert "| glim | 0.9200 | 0.00400 | 23.98 | 0.3100 | 4.10±0.059 | 20 |" in md
        assert "FAD background: reference." in md

    def test_markdown_missing_optionals_dashed(self):
        doc = _doc("bare", fad=None)
        doc["aggregate"]["fad_background"] = None
        md = report.render_markdown(report.build_report([doc]))
        assert "| bare | 0.9200 | 0.00400 | 23.98 | - | - | 20 |" in md
        assert "FAD background" not in md

    def test_markdown_infinite_psnr(self):
        md = report.render_markdown(report.build_report([_doc(ls_mse=0.0)]))
        assert "| inf |" in md

    def test_markdown_complexity_table(self):
        rep = report.build_report(
            [_doc("fast"), _doc("slow")],
            metadata={"fast": {"params_m": 13.9, "gflops": 2.5}},
        )
        md = report.render_markdown(rep, report.parse_rtf_csv(TestRtfCsv.CSV))
        assert "## Complexity" in md
        lines = md.splitlines()
        fast_line = next(i for i, ln in enumerate(lines) if ln.startswith("| fast | cpu"))
        slow_line = next(i for i, ln in enumerate(lines) if ln.startswith("| slow | cpu"))
        assert fast_line < slow_line  # ascending median rtf
        assert "| fast | cpu | 0.3500 | 13.90 | 2.50 |" in md
        assert "| slow | cpu | 0.9000 | - | - |" in md

    def test_render_checks_consistency(self):
        bad = report.MetricReport(
            "c", [report.ReportRow("x", 0.9, 0.004, 40.0, 5)]
        )
        with pytest.raises(ConsistencyError):
            report.render_markdown(bad)

    def test_csv(self):
        rep = report.build_report(
            [_doc("glim", ls_mse=0.004)], mos_by_system={"glim": (4.1, 0.059)}
        )
        text = report.render_csv(rep)
        lines = text.strip().splitlines()
        assert lines[0] == "system,n,ssim,ls_mse,psnr,fad,mos,mos_ci95"
        assert lines[1].startswith("glim,20,0.92,0.004,")
        assert lines[1].endswith(",0.31,4.1,0.059")

    def test_csv_identity_row(self):
        text = report.render_csv(report.build_report([_doc(ls_mse=0.0)]))
        assert ",inf," in text.splitlines()[1]
