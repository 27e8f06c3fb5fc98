import csv
import io
import json
import math
import os
import shutil
import subprocess

import pytest
from scipy.optimize import brentq

from qrefrig import cli
from qrefrig.io import ConfigError, ResultTable, format_number, parse_config, write_atomic
from qrefrig.model import RefrigeratorSpec

from conftest import FIG2, QRCN_WORK

QRC_CONFIG = {"model": "qrc", **FIG2, "beta_c": 2.0, "beta_w": 0.09}
QRCN_CONFIG = {"model": "qrcn", **{k: v for k, v in FIG2.items() if k != "beta_w"}, "beta_c": 2.0, **QRCN_WORK}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg, indent=1) if isinstance(cfg, dict) else cfg)
    return str(p)


def _run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestReport:
    def test_qrc(self, tmp_path, capsys):
        code, out, _ = _run(["report", "--config", _write(tmp_path, QRC_CONFIG)], capsys)
        assert code == 0
        (row,) = _rows(out)
        assert float(row["cop"]) == pytest.approx(0.0989, abs=1e-4)
        assert row["in_window"] == "1"

    def test_equilibrium_exit_2(self, tmp_path, capsys):
        cfg = {**QRC_CONFIG, "beta_c": 1.0, "beta_w": 1.0}
        code, out, _ = _run(["report", "--config", _write(tmp_path, cfg)], capsys)
        assert code == 2
        (row,) = _rows(out)
        assert row["J_c"] == "0" and row["entropy_rate"] == "0"
        assert row["nsr"] == "nan" and row["cop"] == "nan" and row["in_window"] == "0"

    def test_missing_omega_h(self, tmp_path, capsys):
        cfg = {k: v for k, v in QRC_CONFIG.items() if k != "omega_h"}
        code, _, err = _run(["report", "--config", _write(tmp_path, cfg)], capsys)
        assert code == 1 and "omega_h" in err

    def test_line_referenced_error(self, tmp_path, capsys):
        text = ('{\n  "model": "qrc",\n  "beta_h": 1.0,\n  "beta_c": "cold",\n  "beta_w": 0.09,\n'
                '  "omega_h": 10, "omega_c": 0.9, "gamma0": 0.01\n}\n')
        code, _, err = _run(["report", "--config", _write(tmp_path, text)], capsys)
        assert code == 1 and "line 4" in err

    def test_invalid_json(self, tmp_path, capsys):
        code, _, err = _run(["report", "--config", _write(tmp_path, '{\n "model": "qrc",\n oops\n}')], capsys)
        assert code == 1 and "line 3" in err

    def test_report_rejects_axes(self, tmp_path, capsys):
        cfg = {**QRC_CONFIG, "sweep": [{"param": "beta_c", "from": 1.5, "to": 2.5, "points": 3}]}
        code, _, err = _run(["report", "--config", _write(tmp_path, cfg)], capsys)
        assert code == 1 and "sweep" in err

    def test_usage_error_exit_1(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["frobnicate"])
        assert exc.value.code == 1

    def test_round_trip_metadata(self, tmp_path, capsys):
        for cfg in (QRC_CONFIG, QRCN_CONFIG):
            out_dir = tmp_path / cfg["model"]
            code, _, _ = _run(["report", "--config", _write(tmp_path, cfg), "--out", str(out_dir)], capsys)
            assert code == 0
            doc = json.loads((out_dir / "report.json").read_text())
            spec = RefrigeratorSpec.from_params(doc["metadata"]["spec"])
            assert spec == parse_config(json.dumps(cfg)).spec()
            assert len(doc["rows"]) == 1 and len(doc["rows"][0]) == len(doc["columns"])


class TestSweep:
    def test_three_points(self, tmp_path, capsys):
        cfg = {**QRC_CONFIG, "sweep": [{"param": "beta_c", "from": 1.5, "to": 2.5, "points": 3}]}
        code, out, _ = _run(["sweep", "--config", _write(tmp_path, cfg)], capsys)
        assert code == 0
        rows = _rows(out)
        assert [r["beta_c"] for r in rows] == ["1.5", "2", "2.5"]
        header = out.splitlines()[0].split(",")
        assert header[0] == "beta_c"
        assert header[1:] == sorted(header[1:], key=str.casefold)

    def test_fig2_ratios(self, tmp_path, capsys):
        cfg = {**QRC_CONFIG, "models": ["qri", "qrc"],
               "sweep": [{"param": "beta_c", "from": 1.05, "to": 10.15, "points": 100}]}
        code, out, _ = _run(["sweep", "--config", _write(tmp_path, cfg)], capsys)
        rows = _rows(out)
        assert code == 0 and len(rows) == 100
        assert all(float(r["power_ratio_qrc_qri"]) > 2 and float(r["nsr_ratio_qrc_qri"]) > 2 for r in rows)

    def test_two_axis(self, tmp_path, capsys):
        cfg = {**QRCN_CONFIG, "sweep": [{"param": "beta_c", "from": 1.5, "to": 5, "points": 4},
                                        {"param": "omega_prime", "from": 1, "to": 10, "points": 3}]}
        code, out, _ = _run(["sweep", "--config", _write(tmp_path, cfg), "--out", str(tmp_path / "o"), "--svg"], capsys)
        assert code == 0
        rows = _rows((tmp_path / "o" / "sweep.csv").read_text())
        assert len(rows) == 12
        svg = (tmp_path / "o" / "sweep.svg").read_text()
        assert svg.startswith("<svg") and svg.count("<rect") >= 12

    def test_derived_axis_rejected(self, tmp_path, capsys):
        cfg = {**QRC_CONFIG, "sweep": [{"param": "beta_s", "from": 1, "to": 2, "points": 3}]}
        code, _, err = _run(["sweep", "--config", _write(tmp_path, cfg)], capsys)
        assert code == 1 and "beta_s" in err

    @pytest.mark.parametrize("points", [1, 2.5, "3"])
    def test_bad_points(self, tmp_path, capsys, points):
        cfg = {**QRC_CONFIG, "sweep": [{"param": "beta_c", "from": 1, "to": 2, "points": points}]}
        code, _, _ = _run(["sweep", "--config", _write(tmp_path, cfg)], capsys)
        assert code == 1

    def test_byte_identical_and_jobs_independent(self, tmp_path, capsys, monkeypatch):
        cfg = {**QRC_CONFIG, "models": ["qri", "qrc"],
               "sweep": [{"param": "beta_c", "from": 1.1, "to": 9, "points": 9}]}
        path = _write(tmp_path, cfg)
        outs = []
        for jobs in ("1", "2"):
            monkeypatch.setenv("REFRIG_JOBS", jobs)
            outs.append(_run(["sweep", "--config", path], capsys)[1])
        outs.append(_run(["sweep", "--config", path, "--jobs", "1"], capsys)[1])
        assert outs[0].encode() == outs[1].encode() == outs[2].encode()
        assert "\r" not in outs[0]

    def test_bad_refrig_jobs(self, tmp_path, capsys, monkeypatch):
        cfg = {**QRC_CONFIG, "sweep": [{"param": "beta_c", "from": 1.5, "to": 2.5, "points": 2}]}
        monkeypatch.setenv("REFRIG_JOBS", "many")
        code, _, err = _run(["sweep", "--config", _write(tmp_path, cfg)], capsys)
        assert code == 1 and "REFRIG_JOBS" in err


class TestFigure:
    def test_fig2(self, capsys):
        code, out, _ = _run(["figure", "fig2"], capsys)
        rows = _rows(out)
        assert code == 0 and len(rows) == 100
        assert list(rows[0]) == ["beta_c", "nsr_ratio", "power_ratio"]
        assert min(float(r["power_ratio"]) for r in rows) > 2

    def test_fig4a_sign_change(self, capsys):
        code, out, _ = _run(["figure", "fig4a"], capsys)
        rows = _rows(out)
        assert code == 0 and list(rows[0]) == ["omega_prime", "minus_beta_sw"]
        xs = [float(r["omega_prime"]) for r in rows]
        ys = [float(r["minus_beta_sw"]) for r in rows]
        i = next(k for k in range(len(ys) - 1) if ys[k] * ys[k + 1] < 0)
        from qrefrig.figures import _qrcn
        from qrefrig.model import synthetic_inverse_temperature

        root = brentq(lambda w: synthetic_inverse_temperature(_qrcn(2.0, w)), xs[i], xs[i + 1])
        assert root == pytest.approx(0.9, abs=0.01)

    def test_fig5_svg(self, tmp_path, capsys):
        code, _, _ = _run(["figure", "fig5", "--out", str(tmp_path), "--svg"], capsys)
        assert code == 0
        rows = _rows((tmp_path / "fig5.csv").read_text())
        assert list(rows[0]) == ["beta_c", "Q_qrc", "Q_qrcn", "Q_qri"]
        assert all(float(v) >= 2 for r in rows for k, v in r.items() if k != "beta_c" and v != "nan")
        svg = (tmp_path / "fig5.svg").read_text()
        assert svg.count("<polyline") == 3

    def test_unknown(self, capsys):
        code, _, err = _run(["figure", "fig9"], capsys)
        assert code == 1 and "fig2" in err and "fig5" in err


class TestValidate:
    def test_qrc_passes(self, tmp_path, capsys):
        code, out, _ = _run(["validate", "--config", _write(tmp_path, QRC_CONFIG)], capsys)
        assert code == 0, out
        assert "fail " not in out

    def test_qrcn_positive_synthetic_temperature(self, tmp_path, capsys):
        cfg = {**QRCN_CONFIG, "omega_prime": 0.5}
        code, out, _ = _run(["validate", "--config", _write(tmp_path, cfg)], capsys)
        assert code == 0, out

    def test_corrupted_tolerance(self, tmp_path, capsys):
        cfg = {**QRC_CONFIG, "tolerances": {"fcs_rel": 1e-300, "oracle_rel": 1e-300}}
        code, out, _ = _run(["validate", "--config", _write(tmp_path, cfg)], capsys)
        assert code == 3 and "FAILED" in out


class TestIO:
    def test_format_number(self):
        assert format_number(-0.0) == "0"
        assert format_number(None) == "nan"
        assert format_number(math.nan) == "nan"
        assert format_number(1 / 3) == "0.333333333333"

    def test_atomic_write_leaves_no_temp_files(self, tmp_path):
        target = tmp_path / "sub" / "x.csv"
        write_atomic(target, "a\n")
        write_atomic(target, "b\n")
        assert target.read_text() == "b\n"
        assert sorted(p.name for p in target.parent.iterdir()) == ["x.csv"]

    def test_ragged_table_rejected(self):
        with pytest.raises(ValueError):
            ResultTable(["a", "b"], [[1.0]])

    def test_config_error_line(self):
        with pytest.raises(ConfigError) as exc:
            parse_config('{\n "model": "qrx"\n}')
        assert exc.value.line == 2

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown"):
            parse_config(json.dumps({**QRC_CONFIG, "beta_q": 1}))


@pytest.mark.skipif(shutil.which("refrig") is None, reason="console script not installed")
def test_console_script(tmp_path):
    res = subprocess.run(["refrig", "--help"], capture_output=True, text=True, env={**os.environ})
    assert res.returncode == 0 and "Exit codes" in res.stdout
