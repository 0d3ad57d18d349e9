import csv
import json
import math

import pytest

from hypwalk.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("argv,code", [
    (["--family", "reflection", "-n", "4", "-m", "8"], 0),
    (["--family", "reflection", "-n", "5", "-m", "4"], 1),
    (["--family", "fuchsian", "-n", "8", "-m", "3"], 1),
    (["--family", "fuchsian", "-n", "12", "-m", "3"], 0),
])
def test_check_exit_codes(capsys, argv, code):
    rc, out, _ = run(capsys, "check", *argv)
    assert rc == code
    rep = json.loads(out)
    assert rep["verdict"] is (code == 0)
    assert rep["gap"] == rep["L"] - rep["weight_cost"]


def test_check_invalid_pair(capsys):
    rc, out, err = run(capsys, "check", "-n", "4", "-m", "4")
    assert rc == 2 and out == ""
    assert "m(n-2) > 2n" in err
    rc, _, err = run(capsys, "check", "--family", "fuchsian", "-n", "5", "-m", "4")
    assert rc == 2 and "even n" in err


def test_check_missing_args(capsys):
    rc, _, err = run(capsys, "check")
    assert rc == 2 and "-n" in err


def test_check_bad_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["check", "--family", "cubic"])
    assert exc.value.code == 2


def test_check_custom_measure_and_word(capsys):
    rc, out, _ = run(capsys, "check", "-n", "4", "-m", "8", "--mu", "1,3,1,3", "--word", "r2,r4")
    rep = json.loads(out)
    assert rc == 0 and rep["word"] == ["r2", "r4"]
    assert rep["weight_cost"] == pytest.approx(-2 * math.log(3 / 8))


def test_check_elliptic_word(capsys):
    rc, _, err = run(capsys, "check", "-n", "4", "-m", "8", "--word", "r1,r2")
    assert rc == 2 and "elliptic" in err


def test_check_text_format(capsys):
    rc, out, _ = run(capsys, "check", "-n", "6", "-m", "4", "--format", "text")
    assert rc == 1 and "verdict=false" in out


def test_sweep_even(capsys, tmp_path):
    csv_path, svg_path = tmp_path / "even.csv", tmp_path / "even.svg"
    rc, out, _ = run(capsys, "sweep", "--n-range", "4:50:2", "--m-range", "4:50:2",
                     "--out-csv", str(csv_path), "--out-svg", str(svg_path))
    assert rc == 0 and out.strip() == "{(4,6),(6,4)}"
    rows = list(csv.DictReader(csv_path.open(encoding="utf-8")))
    assert list(rows[0]) == ["n", "m", "margin", "verdict"]
    assert {(int(r["n"]), int(r["m"])) for r in rows if r["verdict"] == "false"} == {(4, 6), (6, 4)}
    svg = svg_path.read_text()
    assert svg.startswith("<svg") and "not hyperbolic" in svg and "n horizontal" in svg
    for p in (csv_path, svg_path):
        manifest = json.loads((tmp_path / (p.name + ".manifest.json")).read_text())
        assert manifest["command"] == "sweep" and manifest["parameters"]["n_range"] == "4:50:2"


def test_sweep_odd_json(capsys):
    rc, out, _ = run(capsys, "sweep", "--n-range", "5:49:2", "--m-range", "4:50:2", "--format", "json")
    assert rc == 0 and json.loads(out)["exceptional"] == [[5, 4]]


def test_sweep_fuchsian(capsys):
    rc, out, _ = run(capsys, "sweep", "--family", "fuchsian")
    assert rc == 0
    assert out.strip() == "{(4,5),(4,6),(6,4),(8,3),(10,3)}"


def test_sweep_empty_range(capsys):
    with pytest.warns(UserWarning, match="no valid"):
        rc, out, _ = run(capsys, "sweep", "--n-range", "3:3", "--m-range", "3:3")
    assert rc == 0 and out.strip() == "{}"


def test_sweep_unwritable(capsys, tmp_path):
    rc, _, err = run(capsys, "sweep", "--n-range", "4:6", "--out-csv", str(tmp_path / "no" / "x.csv"))
    assert rc == 2 and "error" in err


def test_simulate_deterministic(capsys, tmp_path):
    args = ["simulate", "-n", "4", "-m", "8", "--steps", "20", "--trials", "400", "--seed", "3"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, *args, "--out-json", str(a))
    run(capsys, *args, "--out-json", str(b), "--threads", "3")
    assert a.read_bytes() == b.read_bytes()
    stats = json.loads(a.read_text())
    assert stats["fi_gap"] >= -3 * stats["fi_stderr"]
    manifest = json.loads((tmp_path / "a.json.manifest.json").read_text())
    assert manifest["seed"] == 3 and manifest["deterministic"] is True


def test_simulate_zero_steps(capsys):
    rc, out, err = run(capsys, "simulate", "-n", "4", "-m", "8", "--steps", "0")
    assert rc == 2 and out == "" and "steps" in err


def test_manifest_replay(capsys, tmp_path):
    a = tmp_path / "a.json"
    run(capsys, "simulate", "--family", "fuchsian", "-n", "4", "-m", "8", "--steps", "10",
        "--trials", "300", "--seed", "8", "--out-json", str(a))
    b = tmp_path / "b.json"
    rc, _, _ = run(capsys, "simulate", "--config", str(tmp_path / "a.json.manifest.json"), "--out-json", str(b))
    assert rc == 0 and a.read_bytes() == b.read_bytes()


def test_toml_config_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('family = "reflection"\nn = 4\nm = 6\nformat = "json"\n')
    rc, out, _ = run(capsys, "check", "--config", str(cfg))
    assert rc == 1 and json.loads(out)["verdict"] is False
    rc, out, _ = run(capsys, "check", "--config", str(cfg), "-m", "8")
    assert rc == 0


def test_manifest_flag(capsys, tmp_path):
    path = tmp_path / "m.json"
    rc, _, err = run(capsys, "check", "-n", "4", "-m", "8", "--manifest", str(path))
    assert rc == 0 and "manifest" not in err
    assert json.loads(path.read_text())["parameters"]["n"] == 4


def test_ball(capsys, tmp_path):
    out_csv = tmp_path / "ball.csv"
    rc, out, _ = run(capsys, "ball", "-n", "4", "-m", "8", "--rmax", "10", "--out-csv", str(out_csv),
                     "--format", "json")
    res = json.loads(out)
    assert rc == 0 and 0.8 <= res["slope"] <= 1.2
    rows = list(csv.DictReader(out_csv.open()))
    assert list(rows[0]) == ["R", "count", "log_count"] and rows[0]["count"] == "1"


def test_ball_small_and_cap(capsys):
    rc, out, _ = run(capsys, "ball", "-n", "4", "-m", "8", "--rmax", "1.0", "--format", "json")
    assert rc == 0 and set(json.loads(out)["counts"]) == {1}
    rc, _, err = run(capsys, "ball", "-n", "4", "-m", "8", "--rmax", "13")
    assert rc == 2 and "cap" in err


def test_boundary(capsys, tmp_path):
    out_csv = tmp_path / "h.csv"
    rc, out, _ = run(capsys, "boundary", "-n", "4", "-m", "8", "--trials", "2000", "--seed", "2",
                     "--out-csv", str(out_csv), "--format", "json")
    res = json.loads(out)
    assert rc == 0 and sum(res["histogram"]) == res["converged"]
    rows = list(csv.DictReader(out_csv.open()))
    assert list(rows[0]) == ["bin_center", "count"] and len(rows) == 64
    first = out_csv.read_bytes()
    run(capsys, "boundary", "-n", "4", "-m", "8", "--trials", "2000", "--seed", "2", "--out-csv", str(out_csv))
    assert out_csv.read_bytes() == first


@pytest.mark.parametrize("argv", [
    ["check", "-n", "4", "-m", "8"],
    ["sweep", "--n-range", "4:8"],
    ["simulate", "-n", "4", "-m", "8", "--steps", "5", "--trials", "50"],
    ["ball", "-n", "4", "-m", "8", "--rmax", "3"],
    ["boundary", "-n", "4", "-m", "8", "--trials", "200"],
])
def test_json_format_is_pure_json(capsys, argv):
    rc, out, _ = run(capsys, *argv, "--format", "json")
    assert rc in (0, 1)
    json.loads(out)
