import csv
import json
import math

import pytest

from floydlab.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_growth_csv_and_json(tmp_path, capsys):
    out = tmp_path / "growth.csv"
    code, _, err = run_cli(capsys, "growth", "--group", "F2", "--out", str(out))
    assert code == 0, err
    rows = list(csv.DictReader(out.open()))
    assert rows[0].keys() == {"n", "sphere", "ball", "log_ball_over_n"}
    report = json.loads((tmp_path / "growth.json").read_text())
    assert abs(report["results"]["estimate"] - math.log(3)) < 1e-6
    for key in ("command", "config", "versions", "timings", "results"):
        assert key in report
    assert report["config"]["group"] == "F2"


def test_global_flags_before_subcommand(capsys):
    code, out, _ = run_cli(capsys, "--group", "G3", "growth", "--n-max", "20")
    assert code == 0
    report = json.loads(out)
    assert report["config"]["group"] == "G3"
    assert abs(report["results"]["estimate"] - math.log(2) / 2) < 1e-6


def test_unknown_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_no_subcommand(capsys):
    code, _, err = run_cli(capsys)
    assert code == 2 and "usage" in err


def test_bad_group_file_is_line_anchored(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('factors = [ {type="free_abelian", rank=2} ]\nbogus = 1\n')
    code, _, err = run_cli(capsys, "growth", "--group", str(bad))
    assert code == 1
    assert "bad.toml:2:" in err and "error" in err


def test_bad_path_file_is_line_anchored(tmp_path, capsys):
    paths = tmp_path / "paths.txt"
    paths.write_text("# comment\nx y t\nx q\n")
    code, _, err = run_cli(capsys, "transitional", "--group", "G2", "--path", str(paths))
    assert code == 1
    assert "paths.txt:3:" in err


def test_resource_cap_named(tmp_path, capsys):
    pairs = tmp_path / "pairs.json"
    pairs.write_text('[["a", "b"]]')
    code, _, err = run_cli(capsys, "floyd-dist", "--pairs", str(pairs), "--method", "ball",
                           "--radius", "40")
    assert code == 1 and "cap" in err


def test_visual_compare_ratio(capsys):
    code, out, _ = run_cli(capsys, "visual-compare", "--group", "F2", "--pairs", "30",
                           "--a", str(math.log(2)))
    assert code == 0
    res = json.loads(out)["results"]
    assert res["ratio_min"] <= 4.0 + 1e-9 <= res["ratio_max"] + 2e-9
    assert res["max_slack"] <= 1e-3
    for p in res["pairs"]:
        assert p["ratio_lower"] - 1e-9 <= 4.0 <= p["ratio_upper"] + 1e-9


def test_deterministic_bytes(capsys):
    outs = []
    for _ in range(2):
        code, out, _ = run_cli(capsys, "floyd-dist", "--group", "G2", "--seed", "5",
                               "--no-timings")
        assert code == 0
        outs.append(out.encode())
    assert outs[0] == outs[1]
    assert "timings" not in json.loads(outs[0])


def test_threads_do_not_change_output(tmp_path, capsys):
    outs = []
    for threads in ("1", "4"):
        code, out, _ = run_cli(capsys, "--threads", threads, "shortcut-dist", "--group", "G2",
                               "--random", "5", "--no-timings")
        assert code == 0
        report = json.loads(out)
        report["config"].pop("threads")
        outs.append(report)
    assert outs[0] == outs[1]


def test_emit_plot(tmp_path, capsys):
    plot = tmp_path / "plot.csv"
    code, _, _ = run_cli(capsys, "dim-estimate", "--tree", "full", "--levels", "8",
                         "--points", "3", "--cover-n", "4", "6", "--emit-plot", str(plot))
    assert code == 0
    header = plot.read_text().splitlines()[0]
    assert header == "scale,count,mass,residual"


SMOKE = [
    ["growth", "--n-max", "10"],
    ["floyd-dist", "--group", "G2", "--random", "3", "--length", "4", "--radius", "8"],
    ["shortcut-dist", "--group", "G2", "--random", "4", "--radius", "10"],
    ["tree-build", "--L", "4", "--levels", "2"],
    ["tree-build", "--group", "G2", "--L", "4", "--C", "3", "--levels", "2"],
    ["ps-measure", "--L", "4", "--levels", "2"],
    ["shadow-stats", "--L", "4", "--levels", "4", "--depths", "3", "4", "--hi", "3"],
    ["dim-estimate", "--L", "4", "--levels", "4", "--points", "2", "--cover-n", "4", "6"],
    ["visual-compare", "--pairs", "5"],
    ["bench", "--group", "G3"],
]


@pytest.mark.parametrize("argv", SMOKE, ids=lambda a: " ".join(a[:3]))
def test_subcommands_run(argv, capsys):
    code, out, err = run_cli(capsys, *argv)
    assert code == 0, err
    report = json.loads(out)
    assert report["command"] == argv[0]
    assert report["results"]


def test_path_subcommands(tmp_path, capsys):
    paths = tmp_path / "paths.txt"
    paths.write_text("x x x x t y\ny : t x x x x x x t\n")
    code, out, err = run_cli(capsys, "transitional", "--group", "G2", "--path", str(paths),
                             "--eps", "0", "--R", "1")
    assert code == 0, err
    res = json.loads(out)["results"]["paths"]
    assert len(res) == 2 and res[1]["start"] == "y"
    code, out, err = run_cli(capsys, "tight-check", "--group", "G2", "--path", str(paths))
    assert code == 0, err
    assert len(json.loads(out)["results"]["paths"]) == 2
