import json

import pytest

from uwoc_track.cli import EXIT_DIVERGED, EXIT_INVALID, EXIT_OK, improvement, main


def test_cone_solve(capsys):
    assert main(["cone-solve"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert 4.2 <= out["slant_height"] <= 4.6


def test_run_and_compare(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('preset = "case1"\nscenario.duration = 35.0\n')
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["run", str(cfg), "--controller", "pd", "--metrics", str(a)]) == EXIT_OK
    assert main(["run", f"{cfg}:nlpd", "--metrics", str(b),
                 "--timeseries", str(tmp_path / "b.csv")]) == EXIT_OK
    assert (tmp_path / "b.csv").exists()
    capsys.readouterr()
    assert main(["compare", str(a), str(b)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "rmse_x" in out and "improvement" in out


def test_run_to_stdout(capsys):
    assert main(["run", "nominal:nlpd"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["runs"][0]["controller"] == "nlpd"


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("optics.receiver.area = -1.0\n")
    assert main(["run", str(bad)]) == EXIT_INVALID
    assert main(["run", str(tmp_path / "missing.toml")]) == EXIT_INVALID
    div = tmp_path / "div.toml"
    div.write_text("scenario.duration = 1.0\ncontroller.kp = 1e300\ncontroller.kv = 1e300\n")
    assert main(["run", str(div)]) == EXIT_DIVERGED
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == EXIT_INVALID


def test_contour(tmp_path):
    out = tmp_path / "grid.csv"
    assert main(["contour", "--out", str(out)]) == EXIT_OK
    assert out.read_text().startswith("# log10 bit rate")


def test_improvement():
    assert improvement(0.4, 0.1) == pytest.approx(75.0)
    assert improvement(None, 0.1) is None
    assert improvement(0.0, 0.1) is None
