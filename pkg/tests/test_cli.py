import json
import subprocess
import sys


from nsreg.cli import main

SMALL = ["-n", "16", "--end-time", "0.25", "--dt", "0.0625"]


def test_generate_then_quantities(tmp_path, capsys):
    assert main(["generate", "--kind", "taylor_green_2d", *SMALL, "--out", str(tmp_path / "tg")]) == 0
    out = tmp_path / "q"
    assert main(["quantities", "--field", str(tmp_path / "tg"), "-p", "3", "-q", "3", "--count", "2",
                 "--out", str(out)]) == 0
    lines = (out / "quantities.csv").read_text().splitlines()
    assert lines[0] == "kind,p,q,r,geometry,value,field_id,n,param_hash"
    assert len(lines) > 1


def test_evolve_and_pressure(tmp_path):
    assert main(["evolve", "--kind", "taylor_green_2d", *SMALL, "--evolve-time", "0.05",
                 "--evolve-dt", "0.01", "--out", str(tmp_path / "ev")]) == 0
    assert (tmp_path / "ev" / "velocity" / "manifest.json").exists()
    assert main(["pressure", "--field", str(tmp_path / "ev" / "velocity"), "--out", str(tmp_path / "p")]) == 0
    doc = json.loads((tmp_path / "p" / "pressure.json").read_text())
    assert doc


def test_exponent_error_exits_one(tmp_path, capsys):
    code = main(["criteria", "--theorem", "1.1", "--case", "1", "-p", "3", "-q", "3", "--kind", "zero",
                 "--out", str(tmp_path)])
    assert code == 1
    err = capsys.readouterr().err
    assert "status=1 error=ExponentError" in err and "3/p + 2/q = 1" in err


def test_missing_input_and_bad_arguments(tmp_path):
    assert main(["quantities", "-p", "3", "-q", "3", "--out", str(tmp_path)]) == 1
    assert main(["trace", "--kind", "zero", "--variant", "nope", "--out", str(tmp_path)]) == 1
    assert main(["generate", "--kind", "zero", "-n", "24", "--out", str(tmp_path)]) == 1


def test_corrupt_field_exits_one(tmp_path):
    (tmp_path / "bad").mkdir()
    (tmp_path / "bad" / "manifest.json").write_text("{")
    assert main(["pressure", "--field", str(tmp_path / "bad"), "--out", str(tmp_path / "o")]) == 1


def test_criteria_verdict_written(tmp_path):
    out = tmp_path / "c"
    assert main(["criteria", "--theorem", "1.2", "-p", "3", "-q", "inf", "--kind", "axis_heat", *SMALL,
                 "--count", "2", "--out", str(out)]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["verdicts"][0]["verdict"] == "satisfied"
    assert (out / "verdicts.csv").read_text().startswith("criterion,p,q,scale")


def test_verify_harmonic_and_trace_then_report(tmp_path):
    assert main(["verify", "--lemma", "4.3", "--family", "degree<=2", "--resolution", "8",
                 "--out", str(tmp_path / "v")]) == 0
    assert main(["trace", "--kind", "taylor_green_2d", *SMALL, "--amplitude", "0.1", "--variant", "cylinder",
                 "--count", "3", "--z0", "0.3,0.2,0.1", "--out", str(tmp_path / "t")]) == 0
    assert main(["report", str(tmp_path / "v"), str(tmp_path / "t"), "--out", str(tmp_path / "r")]) == 0
    doc = json.loads((tmp_path / "r" / "report.json").read_text())
    assert doc["checks"] and doc["traces"]


def test_verify_unknown_lemma(tmp_path):
    assert main(["verify", "--lemma", "9.9", "--kind", "zero", "--out", str(tmp_path)]) == 1


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "nsreg.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "nsreg" in res.stdout
