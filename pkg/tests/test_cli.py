import json
import subprocess
import sys

import pytest

from mdslab.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main, read_config_file


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_direct(capsys):
    code, out, _ = run(capsys, "eval", "--s", "3", "--w", "3", "--pair", "psi1,psi1")
    assert code == EXIT_OK
    row = json.loads(out)
    assert row["component"] == "psi1,psi1" and row["rep"] == "direct"
    assert row["re"] == pytest.approx(1.10302247688786, abs=1e-12)
    assert abs(row["im"]) < 1e-15 and 0 <= row["tail"] <= 1e-4


def test_eval_polar_line(capsys):
    code, _, err = run(capsys, "eval", "--s", "1", "--w", "2", "--pair", "psi1,psi1")
    assert code == EXIT_FAIL
    assert "polar line s=1" in err


def test_eval_continued_csv(capsys):
    code, out, _ = run(capsys, "eval", "--s", "-1", "--w", "3", "--pair", "psi2,psi-1",
                       "--format", "csv")
    assert code == EXIT_OK
    head, row = out.strip().splitlines()
    fields = dict(zip(head.split(","), row.split(",")))
    assert fields["rep"] == "continued" and fields["word"] == "b"


def test_group_check(capsys):
    code, out, _ = run(capsys, "group-check")
    assert code == EXIT_OK
    assert out.startswith("orbit size 12; A^2=I; B(s)B(1-s)=I")


def test_config_errors(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("d-max = 100\nbogus = 1\n")
    assert run(capsys, "group-check", "--config", str(bad))[0] == EXIT_CONFIG
    assert run(capsys, "eval", "--s", "3", "--w", "3", "--contour-c", "3.0")[0] == EXIT_CONFIG
    assert run(capsys, "nosuchcommand")[0] == EXIT_CONFIG
    assert run(capsys, "selftest", "--criteria", "12")[0] == EXIT_CONFIG


def test_config_file_parsing(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nd-max = 3000\n\ntail_bound = 1e-3  # trailing\n")
    assert read_config_file(cfg) == {"d_max": "3000", "tail_bound": "1e-3"}


def test_flags_override_config(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("d-max = 100\ntail-bound = 1e-12\n")
    # the file alone asks for the impossible; the flags win
    code, _, _ = run(capsys, "eval", "--s", "3", "--w", "3", "--pair", "psi1,psi1",
                     "--config", str(cfg), "--d-max", "2000", "--tail-bound", "1e-3")
    assert code == EXIT_OK


def test_cache_roundtrip(capsys, tmp_path, monkeypatch):
    path = tmp_path / "l.mdsl"
    monkeypatch.setenv("MDS_CACHE", str(path))
    code, out1, _ = run(capsys, "eval-critical", "--t", "1", "--u", "2", "--pair", "psi1,psi1",
                        "--d-max", "2000", "--tail-bound", "1e-2")
    assert code == EXIT_OK and path.exists() and path.read_bytes()[:5] == b"MDSL1"
    code, out2, _ = run(capsys, "eval-critical", "--t", "1", "--u", "2", "--pair", "psi1,psi1",
                        "--d-max", "2000", "--tail-bound", "1e-2")
    a, b = json.loads(out1), json.loads(out2)
    assert a["re"] == b["re"] and a["im"] == b["im"]


def test_sieve_and_output_file(capsys, tmp_path):
    out = tmp_path / "sieve.json"
    code, _, _ = run(capsys, "sieve-check", "--M", "256", "--N", "256", "--trials", "3",
                     "--output", str(out))
    assert code == EXIT_OK
    data = json.loads(out.read_text())
    assert len(data["rows"]) == 3 and data["summary"]["pass"]


def test_selftest_reports_identical(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.json"
        proc = subprocess.run([sys.executable, "-m", "mdslab.cli", "selftest", "--criteria",
                               "1,2,3,4", "--output", str(path)],
                              capture_output=True, text=True, timeout=600)
        assert proc.returncode == EXIT_OK, proc.stderr
        assert "[PASS] criterion 3" in proc.stderr
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
