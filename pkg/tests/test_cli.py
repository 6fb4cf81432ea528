"""Command-line frontend: flags, config files, outputs, exit codes."""

import csv
import io
import json
import shutil
import subprocess

BASE = ["--W", "16", "--m", "2", "--C", "1", "--a", "0.5", "--pd", "0.5",
        "--pf", "0.01"]


def table_value(output, key):
    for line in output.splitlines():
        name, _, value = line.partition("=")
        if name.strip() == key:
            return value.split()[0]
    raise AssertionError(f"{key} not in output:\n{output}")


def test_analyze_single_station_closed_form(run_cli):
    code, out, _ = run_cli("analyze", "--n", "1", "--W", "32", "--m", "3",
                           "--C", "1", "--a", "0.5", "--pd", "0.9", "--pf", "0.0")
    assert code == 0
    assert abs(float(table_value(out, "tau")) - (2 / 33) * 0.55) <= 1e-12
    assert float(table_value(out, "p_c")) == 0.0
    assert float(table_value(out, "q")) == 0.45


def test_analyze_derived_detection_reports_false_alarm(run_cli):
    code, out, _ = run_cli("analyze", "--n", "10", "--W", "32", "--m", "3",
                           "--C", "1", "--a", "0.5", "--pd", "0.5",
                           "--snr-db", "-15", "--ts", "2e-3", "--fs", "6e6")
    assert code == 0
    assert "(derived)" in out
    assert abs(float(table_value(out, "P_f")) - 2.66e-4) <= 1e-6


def test_analyze_rejects_out_of_range_flag(run_cli):
    code, _, err = run_cli("analyze", "--n", "2", "--W", "32", "--m", "3",
                           "--C", "1", "--a", "0.5", "--pd", "1.5", "--pf", "0.0")
    assert code == 2
    assert "pd" in err


def test_analyze_requires_all_core_parameters(run_cli):
    code, _, err = run_cli("analyze", "--n", "2", "--m", "3", "--C", "1",
                           "--a", "0.5", "--pd", "0.5", "--pf", "0.0")
    assert code == 2
    assert "W" in err


def test_analyze_matches_single_row_sweep(run_cli):
    for fmt in ("csv", "json"):
        code_a, out_a, _ = run_cli("analyze", "--n", "10", "--format", fmt, *BASE)
        code_s, out_s, _ = run_cli("sweep", "--axis", "n", "--values", "10",
                                   "--n", "10", "--format", fmt, *BASE)
        assert code_a == 0 and code_s == 0
        assert out_a == out_s


def test_sweep_range_matches_explicit_values(run_cli):
    code_r, out_r, _ = run_cli("sweep", "--axis", "n", "--from", "5", "--to", "5",
                               "--n", "5", "--format", "csv", *BASE)
    code_v, out_v, _ = run_cli("analyze", "--n", "5", "--format", "csv", *BASE)
    assert code_r == 0 and out_r == out_v


def test_sweep_channel_ordering(run_cli):
    code, out, _ = run_cli("sweep", "--axis", "C", "--values", "1,3,6",
                           "--n", "20", "--W", "32", "--m", "3", "--C", "1",
                           "--a", "0.5", "--pd", "0.5", "--pf", "0.0")
    assert code == 0
    taus = [float(rec["tau"]) for rec in csv.DictReader(io.StringIO(out))]
    assert taus[0] < taus[1] < taus[2]


def test_sweep_partial_failure_keeps_going(run_cli):
    code, out, err = run_cli("sweep", "--axis", "W", "--values", "1,32",
                             "--n", "5", *BASE)
    assert code == 0
    assert "warning" in err
    rows = out.splitlines()
    assert rows[1].split(",")[2] == "nan"
    assert rows[2].split(",")[2] != "nan"


def test_sweep_total_failure_exits_nonzero(run_cli):
    code, _, err = run_cli("sweep", "--axis", "W", "--values", "1",
                           "--n", "5", *BASE)
    assert code == 1
    assert "warning" in err


def test_sweep_unknown_axis_is_usage_error(run_cli):
    code, _, err = run_cli("sweep", "--axis", "bogus", "--values", "1",
                           "--n", "5", *BASE)
    assert code == 2


def test_sweep_requires_axis_or_preset(run_cli):
    code, _, err = run_cli("sweep", "--n", "5", *BASE)
    assert code == 2
    assert "axis" in err


def test_sweep_preset_table(run_cli, tmp_path):
    out_file = tmp_path / "curves.csv"
    code, out, _ = run_cli("sweep", "--preset", "fig3", "--out", str(out_file))
    assert code == 0
    assert "wrote 25 rows" in out
    lines = out_file.read_text().splitlines()
    header = lines[0].split(",")
    assert header[0] == "n"
    assert header[1] == "tau_pd0.1_w32"
    assert len(header) == 7
    assert len(lines) == 26
    first = [float(v) for v in lines[1].split(",")]
    assert first[0] == 2.0


def test_sweep_preset_plot(run_cli, tmp_path):
    out_file = tmp_path / "curves.csv"
    code, out, _ = run_cli("sweep", "--preset", "fig7", "--out", str(out_file),
                           "--plot")
    assert code == 0
    png = out_file.with_suffix(".png")
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_plot_requires_out(run_cli):
    code, _, err = run_cli("sweep", "--preset", "fig3", "--plot")
    assert code == 2
    assert "plot" in err


def test_simulate_deterministic_files(run_cli, tmp_path):
    f1, f2 = tmp_path / "one.json", tmp_path / "two.json"
    argv = ["simulate", "--n", "5", "--slots", "20000", "--seed", "5", *BASE]
    code1, out1, _ = run_cli(*argv, "--out", str(f1))
    code2, _, _ = run_cli(*argv, "--out", str(f2))
    assert code1 == 0 and code2 == 0
    assert f1.read_bytes() == f2.read_bytes()
    assert "seed=5 rng=pcg64" in out1


def test_simulate_stdout_payload(run_cli):
    code, out, err = run_cli("simulate", "--n", "1", "--slots", "5000",
                             "--seed", "2", "--warmup", "1000", *BASE)
    assert code == 0
    payload = json.loads(out)
    assert payload["stats"]["pc_hat_any"] == 0.0
    assert payload["stats"]["pc_hat_same_channel"] == 0.0
    assert "seed=2 rng=pcg64" in err  # echo kept off the data stream


def test_simulate_rejects_bad_warmup(run_cli):
    code, _, err = run_cli("simulate", "--n", "5", "--slots", "1000",
                           "--warmup", "1000", *BASE)
    assert code == 2
    assert "warmup" in err


def test_config_file_supplies_parameters(run_cli, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# scenario\nn=5\nW=16\nm=2\nC=1\na=0.5\npd=0.5\npf=0.01\n"
                   "slots=8000\nseed=3\nwarmup=1000\n")
    code_file, out_file, _ = run_cli("analyze", "--config", str(cfg),
                                     "--format", "csv")
    code_flag, out_flag, _ = run_cli("analyze", "--n", "5", "--format", "csv",
                                     *BASE)
    assert code_file == 0
    assert out_file == out_flag

    # flags override file values
    code_n9, out_n9, _ = run_cli("analyze", "--config", str(cfg), "--n", "9",
                                 "--format", "csv")
    assert code_n9 == 0
    assert out_n9.splitlines()[1].split(",")[1] == "9"

    # sim options flow from the same file
    code_sim, out_sim, _ = run_cli("simulate", "--config", str(cfg))
    payload = json.loads(out_sim)
    assert code_sim == 0
    assert payload["config"]["slots"] == 8000
    assert payload["meta"]["seed"] == 3


def test_config_file_rejects_unknown_key(run_cli, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n=5\nbogus=1\n")
    code, _, err = run_cli("analyze", "--config", str(cfg))
    assert code == 2
    assert "bogus" in err


def test_config_file_rejects_malformed_line(run_cli, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n=5\njust words\n")
    code, _, err = run_cli("analyze", "--config", str(cfg))
    assert code == 2
    assert "line 2" in err


def test_config_file_missing(run_cli, tmp_path):
    code, _, err = run_cli("analyze", "--config", str(tmp_path / "nope.cfg"))
    assert code == 2


def test_validate_report(run_cli, tmp_path):
    report = tmp_path / "report.csv"
    code, out, _ = run_cli("validate", "--n", "5", "--slots", "30000",
                           "--seed", "4", "--warmup", "2000",
                           "--out", str(report), *BASE)
    assert code == 0
    assert "passed 2/2" in out
    recs = list(csv.DictReader(report.open()))
    assert [r["metric"] for r in recs] == ["tau", "pc_any", "pc_same_channel"]
    assert recs[0]["pass"] == "true"
    assert recs[2]["pass"] == ""


def test_validate_tight_threshold_fails(run_cli, tmp_path):
    report = tmp_path / "report.csv"
    code, _, _ = run_cli("validate", "--n", "5", "--slots", "30000",
                         "--seed", "4", "--warmup", "2000",
                         "--threshold", "1e-9", "--out", str(report), *BASE)
    assert code == 3
    assert report.exists()  # report still written on failure


def test_validate_preset_parallel_matches_serial(run_cli, tmp_path):
    serial, parallel = tmp_path / "serial.csv", tmp_path / "parallel.csv"
    argv = ["validate", "--preset", "fig5", "--slots", "10000", "--seed", "1",
            "--warmup", "2000"]
    code_s, _, _ = run_cli(*argv, "--out", str(serial))
    code_p, _, _ = run_cli(*argv, "--out", str(parallel),
                           env={"COGMAC_THREADS": "2"})
    assert code_s == code_p
    assert serial.read_bytes() == parallel.read_bytes()
    # six curves at three station counts, three metric rows each
    assert len(serial.read_text().splitlines()) == 1 + 18 * 3


def test_worker_env_validation(run_cli):
    for bad in ("abc", "0"):
        code, _, err = run_cli("validate", "--n", "2", "--slots", "4000",
                               "--warmup", "500", *BASE,
                               env={"COGMAC_THREADS": bad})
        assert code == 2
        assert "COGMAC_THREADS" in err


def test_console_script_installed():
    exe = shutil.which("cogmac")
    assert exe, "console script should be on PATH after editable install"
    proc = subprocess.run([exe, "analyze", "--n", "2", *BASE],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "tau" in proc.stdout
