"""Tests for the config parser, experiment runner, and CLI commands."""
import json

import numpy as np
import pytest

import quasarprox as qp
from quasarprox.cli import (
    OUTPUT_ENV_VAR,
    TRACE_COLUMNS,
    ExperimentConfig,
    _method_slug,
    _parse_method_spec,
    _read_trace_csv,
    _write_trace_csv,
    main,
    parse_config_file,
    run_experiment,
)


@pytest.fixture(autouse=True)
def _no_output_env(monkeypatch):
    monkeypatch.delenv(OUTPUT_ENV_VAR, raising=False)


def _write_cfg(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestParseConfig:
    def test_comments_and_blanks(self, tmp_path):
        path = _write_cfg(
            tmp_path,
            "# a comment\n\nentry = spiky  # trailing\nmethods = pgd\n",
        )
        raw = parse_config_file(path)
        assert raw == {"entry": "spiky", "methods": "pgd"}

    def test_duplicate_keys_rejected(self, tmp_path):
        path = _write_cfg(tmp_path, "entry = spiky\nentry = rmtr\n")
        with pytest.raises(qp.ConfigParseError, match="duplicate"):
            parse_config_file(path)

    def test_malformed_line_rejected(self, tmp_path):
        path = _write_cfg(tmp_path, "entry spiky\n")
        with pytest.raises(qp.ConfigParseError, match="key = value"):
            parse_config_file(path)

    def test_required_keys(self, tmp_path):
        path = _write_cfg(tmp_path, "methods = pgd\n")
        with pytest.raises(qp.ConfigParseError, match="missing required"):
            ExperimentConfig.from_file(path)

    def test_defaults(self, tmp_path):
        path = _write_cfg(tmp_path, "entry = spiky\nmethods = pgd, psg\n")
        cfg = ExperimentConfig.from_file(path)
        assert cfg.entry_id == "spiky"
        assert cfg.methods == ["pgd", "psg"]
        assert cfg.seeds == [0]
        assert cfg.eps_step == 1e-8
        assert cfg.rel_err_tol is None
        assert cfg.max_iters == 2000
        assert str(cfg.output_dir) == "out"
        assert cfg.entry_overrides == {}

    def test_entry_overrides_are_literals(self, tmp_path):
        path = _write_cfg(
            tmp_path,
            "entry = dist_disk\nentry.alpha = 0.25\nmethods = pgd\nseeds = 0,2\n",
        )
        cfg = ExperimentConfig.from_file(path)
        assert cfg.entry_overrides == {"alpha": 0.25}
        assert cfg.seeds == [0, 2]

    def test_output_dir_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_ENV_VAR, str(tmp_path / "elsewhere"))
        path = _write_cfg(tmp_path, "entry = spiky\nmethods = pgd\noutput_dir = x\n")
        cfg = ExperimentConfig.from_file(path)
        assert cfg.output_dir == tmp_path / "elsewhere"


class TestMethodSpecs:
    def test_parse(self):
        name, kw = _parse_method_spec("hippa:p=3:beta=1e6")
        assert name == "hippa"
        assert kw == {"p": 3, "beta": 1e6}

    def test_bad_option(self):
        with pytest.raises(qp.ConfigParseError, match="bad method option"):
            _parse_method_spec("hippa:p")

    def test_slug(self):
        assert _method_slug("hippa:p=1.5:beta=0.5") == "hippa_p1p5_beta0p5"
        assert _method_slug("psg") == "psg"
        assert _method_slug("hippa:beta=5e-6") == "hippa_beta5e-6"


class TestRunExperiment:
    def _spiky_cfg(self, tmp_path, methods=("hippa:p=2:beta=1", "pgd"), seeds=(0,)):
        return ExperimentConfig(
            entry_id="spiky",
            methods=list(methods),
            seeds=list(seeds),
            eps_step=1e-10,
            rel_err_tol=None,
            max_iters=25,
            output_dir=tmp_path / "out",
        )

    def test_artifact_set(self, tmp_path):
        cfg = self._spiky_cfg(tmp_path)
        paths = run_experiment(cfg)
        # one CSV per (method, seed), one rates JSON per method, one summary
        assert len(paths) == 5
        assert all(p.exists() for p in paths)
        assert {p.name for p in paths} == {
            "spiky_hippa_p2_beta1_seed0.csv",
            "spiky_hippa_p2_beta1_rates.json",
            "spiky_pgd_seed0.csv",
            "spiky_pgd_rates.json",
            "spiky_summary.csv",
        }

    def test_trace_csv_shape(self, tmp_path):
        cfg = self._spiky_cfg(tmp_path, methods=("hippa:p=2:beta=1",))
        paths = run_experiment(cfg)
        csv_path = next(p for p in paths if p.suffix == ".csv" and "summary" not in p.name)
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == ",".join(TRACE_COLUMNS)
        first = lines[1].split(",")
        assert first[0] == "0"
        assert float(first[3]) == pytest.approx(0.5)  # default start is (0.5, 0)
        # the minimizer is the origin, so rel_err falls back to the distance
        assert first[4] == first[3]

    def test_summary_matches_trace_tail(self, tmp_path):
        cfg = self._spiky_cfg(tmp_path)
        paths = run_experiment(cfg)
        summary = next(p for p in paths if p.name == "spiky_summary.csv")
        lines = summary.read_text().strip().splitlines()
        assert lines[0] == "method,iteration_to_stop,time_s,relative_error,objective_value"
        assert len(lines) == 3
        by_method = {row.split(",")[0]: row.split(",") for row in lines[1:]}
        for slug in ("hippa_p2_beta1_seed0", "pgd_seed0"):
            csv_path = cfg.output_dir / f"spiky_{slug}.csv"
            last = csv_path.read_text().strip().splitlines()[-1].split(",")
            row = by_method[slug]
            assert row[1] == last[0]
            assert row[3] == last[4]
            assert row[4] == last[1]

    def test_rates_report_contents(self, tmp_path):
        cfg = self._spiky_cfg(tmp_path)
        run_experiment(cfg)
        hippa_report = json.loads(
            (cfg.output_dir / "spiky_hippa_p2_beta1_rates.json").read_text()
        )
        assert hippa_report["regime"] == "p_eq_2"
        assert hippa_report["theorem_checks"]
        assert all(c["pass"] for c in hippa_report["theorem_checks"])
        pgd_report = json.loads((cfg.output_dir / "spiky_pgd_rates.json").read_text())
        assert pgd_report["theorem_checks"] == []
        assert "linear_ratio" in pgd_report["fitted"]

    def test_multi_seed_counts(self, tmp_path):
        cfg = self._spiky_cfg(tmp_path, methods=("pgd",), seeds=(0, 1))
        paths = run_experiment(cfg)
        csvs = [p for p in paths if p.suffix == ".csv" and "summary" not in p.name]
        assert len(csvs) == 2
        assert len([p for p in paths if p.suffix == ".json"]) == 1

    def test_reruns_reproduce_bitwise_outside_timing_columns(self, tmp_path):
        cfg_a = self._spiky_cfg(tmp_path / "a")
        cfg_b = self._spiky_cfg(tmp_path / "b")
        paths_a = run_experiment(cfg_a)
        paths_b = run_experiment(cfg_b)

        def strip_timing(path, col):
            rows = []
            for line in path.read_text().strip().splitlines():
                parts = line.split(",")
                del parts[col]
                rows.append(",".join(parts))
            return "\n".join(rows)

        for a, b in zip(sorted(paths_a), sorted(paths_b)):
            assert a.name == b.name
            if a.name.endswith("summary.csv"):
                assert strip_timing(a, 2) == strip_timing(b, 2)
            elif a.suffix == ".csv":
                col = TRACE_COLUMNS.index("elapsed_s")
                assert strip_timing(a, col) == strip_timing(b, col)
            else:
                assert a.read_text() == b.read_text()

    def test_unknown_method_fails_the_run(self, tmp_path):
        cfg = self._spiky_cfg(tmp_path, methods=("newton",))
        with pytest.raises(qp.ConfigParseError, match="unknown method"):
            run_experiment(cfg)


class TestTraceRoundTrip:
    def test_write_then_read(self, tmp_path):
        oracle = qp.make_square_1d()
        trace = qp.run_hippa(
            oracle, np.array([1.0]), qp.HippaConfig(prox=qp.ProxConfig(p=2.0, beta=1.0))
        )
        path = tmp_path / "trace.csv"
        _write_trace_csv(path, trace, oracle)
        back = _read_trace_csv(path)
        assert len(back.records) == len(trace.records)
        for a, b in zip(trace.records, back.records):
            assert a.k == b.k
            assert a.value == b.value
            assert a.step_norm == b.step_norm
            assert a.dist_to_min == b.dist_to_min

    def test_rejects_a_foreign_csv(self, tmp_path):
        path = tmp_path / "other.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(qp.ConfigParseError, match="not a trace"):
            _read_trace_csv(path)


class TestCommands:
    def test_list_zoo(self, capsys):
        assert main(["list-zoo"]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert tuple(out) == qp.zoo_ids()

    def test_verify_spiky(self, capsys):
        assert main(["verify", "spiky", "--samples", "200"]) == 0
        out = capsys.readouterr().out
        assert "definition: pass" in out
        assert "refuted" in out and "NOT refuted" not in out

    def test_verify_unknown_entry(self, capsys):
        assert main(["verify", "nothere"]) == 1
        assert "unknown zoo id" in capsys.readouterr().err

    def test_run_command_prints_artifacts(self, tmp_path, capsys):
        cfg_path = _write_cfg(
            tmp_path,
            "entry = spiky\nmethods = pgd\nmax_iters = 10\n"
            f"output_dir = {tmp_path / 'out'}\n",
        )
        assert main(["run", str(cfg_path)]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 3
        assert all(line.startswith(str(tmp_path / "out")) for line in out)

    def test_run_command_missing_file(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "nope.cfg")]) == 1
        assert "io error" in capsys.readouterr().err

    def test_rates_command_pass_and_fail(self, tmp_path, capsys):
        cert_path = tmp_path / "cert.json"
        cert = qp.certificate(1.0, 2.0, np.zeros(1))
        cert_path.write_text(json.dumps(cert.to_json()))
        header = ",".join(TRACE_COLUMNS)

        def rows(ratio):
            lines = [header]
            for k in range(8):
                d = ratio**k
                lines.append(f"{k},{d * d!r},{0.1!r},{d!r},{d!r},0,0.0")
            return "\n".join(lines) + "\n"

        good = tmp_path / "good.csv"
        good.write_text(rows(1.0 / 3.0))
        assert main(["rates", str(good), "--cert", str(cert_path)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["regime"] == "p_eq_2"
        bad = tmp_path / "bad.csv"
        bad.write_text(rows(0.9))
        assert main(["rates", str(bad), "--cert", str(cert_path)]) == 2
