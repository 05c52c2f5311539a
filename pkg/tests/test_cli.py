import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from kerrsqueeze.cli import main

CONFIGS = [
    ("sweep", "config_sweep.json"),
    ("spectrum", "config_spectrum_locking.json"),
    ("spectrum", "config_spectrum_optimized.json"),
    ("spectrum", "config_spectrum_detuning.json"),
    ("locking", "config_locking.json"),
    ("threshold", "config_threshold.json"),
    ("report", "config_report.json"),
    ("fit-transmission", "config_fit_transmission.json"),
    ("fit-dispersion", "config_fit_dispersion.json"),
    ("reduce-trace", "config_reduce_trace.json"),
    ("losses", "config_losses.json"),
]


def run(sample_dir, cmd, config, tmp_path, name="out.txt", extra=()):
    out = tmp_path / name
    rc = main([cmd, "--config", str(sample_dir / config), "--out", str(out), *extra])
    return rc, out


@pytest.mark.parametrize("cmd,config", CONFIGS)
def test_all_sample_configs_run_clean(cmd, config, sample_dir, tmp_path):
    rc, out = run(sample_dir, cmd, config, tmp_path)
    assert rc == 0
    assert out.stat().st_size > 0


def test_stdout_when_no_out_flag(sample_dir, capsys):
    rc = main(["losses", "--config", str(sample_dir / "config_losses.json")])
    assert rc == 0
    body = json.loads(capsys.readouterr().out)
    assert body["eta"] == pytest.approx(0.29127284648349827, rel=1e-14)
    assert body["total_db"] == pytest.approx(-5.357, abs=1e-12)


def test_missing_config_is_runtime_error(tmp_path, capsys):
    rc = main(["sweep", "--config", str(tmp_path / "nope.json")])
    assert rc == 1
    assert "not found" in capsys.readouterr().err


def test_bad_json_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "resonator": {,}\n}\n')
    rc = main(["sweep", "--config", str(bad)])
    assert rc == 1
    assert "line 2" in capsys.readouterr().err


def test_missing_key_is_named(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"resonator": {"kappa_rad_s": 5e8, "gamma_rad_s": 5e7}}))
    rc = main(["sweep", "--config", str(cfg)])
    assert rc == 1
    assert "pump" in capsys.readouterr().err


def test_unknown_subcommand_is_usage_error(sample_dir):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate", "--config", "x.json"])
    assert e.value.code == 2


def test_rerun_is_byte_identical(sample_dir, tmp_path):
    for cmd, config in (("sweep", "config_sweep.json"),
                        ("report", "config_report.json")):
        _, a = run(sample_dir, cmd, config, tmp_path, name="a.txt")
        _, b = run(sample_dir, cmd, config, tmp_path, name="b.txt")
        assert a.read_bytes() == b.read_bytes()


def test_threads_do_not_change_output(sample_dir, tmp_path):
    _, a = run(sample_dir, "spectrum", "config_spectrum_optimized.json", tmp_path,
               name="t1.csv")
    _, b = run(sample_dir, "spectrum", "config_spectrum_optimized.json", tmp_path,
               name="t4.csv", extra=("--threads", "4"))
    assert a.read_bytes() == b.read_bytes()


def test_json_format_matches_csv_values(sample_dir, tmp_path):
    _, c = run(sample_dir, "locking", "config_locking.json", tmp_path, name="x.csv")
    _, j = run(sample_dir, "locking", "config_locking.json", tmp_path, name="x.json",
               extra=("--format", "json"))
    body = json.loads(j.read_text())
    lines = [l for l in c.read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    assert body["columns"] == header
    for row, line in zip(body["rows"], lines[1:]):
        for got, text in zip(row, line.split(",")):
            assert got == float(text)


def test_report_csv_flattening(sample_dir, tmp_path):
    _, out = run(sample_dir, "report", "config_report.json", tmp_path,
                 name="r.csv", extra=("--format", "csv"))
    lines = out.read_text().splitlines()
    assert lines[0] == "key,value"
    keys = {l.split(",", 1)[0] for l in lines[1:]}
    assert "drive.sigma_tilde" in keys
    assert "measured.v_as_db" in keys


def test_sweep_zero_power_block_is_dark(sample_dir, tmp_path):
    _, out = run(sample_dir, "sweep", "config_sweep.json", tmp_path)
    lines = out.read_text().splitlines()
    header = lines[0].split(",")
    n_col = header.index("n_photons")
    t_col = header.index("transmission")
    # rows of the first power block (p_in = 0)
    block = [l for l in lines[1:] if not l.startswith("#")][:352]
    for line in block:
        cells = line.split(",")
        assert float(cells[n_col]) == 0.0
        assert 0.0 <= float(cells[t_col]) <= 1.0


def test_sweep_csv_columns_exact(sample_dir, tmp_path):
    _, out = run(sample_dir, "sweep", "config_sweep.json", tmp_path)
    header = out.read_text().splitlines()[0]
    assert header == (
        "delta_p_rad_s,n_photons,energy_j,delta_cl_rad_s,transmission,"
        "stable,direction,circulating_power_w"
    )


def test_fit_digest_matches_input(sample_dir, tmp_path):
    _, out = run(sample_dir, "fit-transmission", "config_fit_transmission.json",
                 tmp_path)
    body = json.loads(out.read_text())
    digest = hashlib.sha256(
        (sample_dir / "transmission_trace.csv").read_bytes()
    ).hexdigest()
    assert body["input_sha256"] == digest
    assert body["parameters"]["kappa_rad_s"]["value"] == pytest.approx(515e6, rel=1e-6)
    assert body["parameters"]["gamma_rad_s"]["value"] == pytest.approx(192e6, rel=1e-6)


def test_reduce_trace_matches_library_call(sample_dir, tmp_path):
    from kerrsqueeze.cli import read_zero_span_csv
    from kerrsqueeze import reduce_homodyne_trace

    _, out = run(sample_dir, "reduce-trace", "config_reduce_trace.json", tmp_path)
    body = json.loads(out.read_text())
    trace = read_zero_span_csv(sample_dir / "zero_span_trace.csv")
    ref = read_zero_span_csv(sample_dir / "zero_span_reference.csv")
    v_s_db, v_as_db = reduce_homodyne_trace(trace, ref)
    assert body["v_s_db"] == v_s_db
    assert body["v_as_db"] == v_as_db
    assert body["v_s_db"] == pytest.approx(-1.219, abs=0.05)
    assert body["v_as_db"] == pytest.approx(6.89, abs=0.05)


def test_spectrum_locking_grid_matches_closed_forms(sample_dir, tmp_path):
    _, out = run(sample_dir, "spectrum", "config_spectrum_locking.json", tmp_path)
    lines = out.read_text().splitlines()
    header = lines[0].split(",")
    iv = header.index("v_ratio")
    il = header.index("v_locked_ratio")
    worst = 0.0
    for line in lines[1:]:
        cells = line.split(",")
        v, locked = float(cells[iv]), float(cells[il])
        worst = max(worst, abs(v - locked) / max(locked, 1e-300))
    assert worst < 1e-9


def test_module_invocation_smoke(sample_dir, tmp_path):
    out = tmp_path / "s.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "kerrsqueeze", "locking",
         "--config", str(sample_dir / "config_locking.json"), "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().startswith("p_in_w,")


def test_missing_input_file_named_in_error(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"fit": {"input": "ghost.csv"}}))
    rc = main(["fit-transmission", "--config", str(cfg)])
    assert rc == 1
    assert "ghost.csv" in capsys.readouterr().err


def test_malformed_csv_cell_reports_line(sample_dir, tmp_path, capsys):
    bad = tmp_path / "t.csv"
    bad.write_text("delta_p_rad_s,transmission\n0.0,0.5\n1.0,oops\n")
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"fit": {"input": "t.csv"}}))
    rc = main(["fit-transmission", "--config", str(cfg)])
    assert rc == 1
    err = capsys.readouterr().err
    assert "line 3" in err and "oops" in err
