import csv
import io
import json
import subprocess
import sys

import pytest

from covopt.harness.cli import main
from covopt.options import OptionSet


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_discover_grid(tmp_path):
    cfg = write(tmp_path, "domain: {name: grid9x9}\ndiscovery: {methods: [covering], options: 8, laplacian: combinatorial}\n")
    assert main(["discover", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    log = rows(tmp_path / "o" / "discovery_log_covering.csv")
    assert len(log) == 5
    assert float(log[-1]["lambda2_after"]) == pytest.approx(0.24, abs=0.01)
    opts = OptionSet.load(tmp_path / "o" / "options_covering.txt")
    assert len(opts) == 8 and all(o.policy for o in opts)


def test_discover_zero_options(tmp_path):
    cfg = write(tmp_path, "domain: {name: grid9x9}\ndiscovery: {methods: [covering], options: 0}\n")
    assert main(["discover", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert len(OptionSet.load(tmp_path / "o" / "options_covering.txt")) == 0
    assert len(rows(tmp_path / "o" / "discovery_log_covering.csv")) == 1


def test_disconnected_graph_exit_code(tmp_path, capsys):
    (tmp_path / "g.txt").write_text("4 2\n0 1\n2 3\n")
    cfg = write(tmp_path, "domain: {name: graph, layout: g.txt}\ndiscovery: {methods: [covering], options: 2}\n")
    assert main(["discover", "--config", cfg, "--out", str(tmp_path / "o")]) == 4
    assert "Disconnected" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_config_error_exit_code(tmp_path):
    cfg = write(tmp_path, "learning: {epsilonn: 0.1}\n")
    assert main(["learn", "--config", cfg]) == 2
    assert main(["learn", "--config", str(tmp_path / "missing.yaml")]) == 2


def test_layout_error_exit_code(tmp_path):
    (tmp_path / "bad.txt").write_text("S..\n.G\n")
    cfg = write(tmp_path, "domain: {name: grid, layout: bad.txt}\n")
    assert main(["discover", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    cfg = write(tmp_path, "domain: {name: grid, layout: nowhere.txt}\n", "c2.yaml")
    assert main(["discover", "--config", cfg, "--out", str(tmp_path / "o")]) == 3


def test_output_error_exit_code(tmp_path):
    (tmp_path / "blocker").write_text("")
    cfg = write(tmp_path, "domain: {name: grid9x9}\ndiscovery: {methods: [covering], options: 2}\n")
    assert main(["discover", "--config", cfg, "--out", str(tmp_path / "blocker" / "o")]) == 5


def test_covertime_single_trajectory(tmp_path):
    cfg = write(tmp_path, "domain: {name: fourroom}\ncovertime: {trajectories_per_start: 1}\n")
    assert main(["covertime", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    out = rows(tmp_path / "o" / "covertime.csv")
    assert [r["method"] for r in out] == ["covering", "eigen", "none"]
    assert all(float(r["cover_time"]) > 0 for r in out)


def test_learn_with_plot_and_runs_one(tmp_path):
    cfg = write(tmp_path, "domain: {name: grid9x9}\ndiscovery: {methods: [covering, none], options: 4}\n"
                          "learning: {episodes: 5, runs: 1}\n")
    assert main(["learn", "--config", cfg, "--out", str(tmp_path / "o"), "--plot"]) == 0
    out = rows(tmp_path / "o" / "learning_curves.csv")
    assert {r["method"] for r in out} == {"covering", "none"}
    assert len(out) == 10
    svg = (tmp_path / "o" / "learning_curves.svg").read_text()
    assert svg.startswith("<svg") or svg.startswith("<?xml")


def test_learn_online_taxi_option_schedule(tmp_path):
    cfg = write(tmp_path, "domain: {name: taxi}\ndiscovery: {methods: [covering], protocol: online}\n"
                          "learning: {episodes: 20, runs: 1, interval_steps: 500, max_options: 32}\n")
    assert main(["learn", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    counts = [int(r["num_options"]) for r in rows(tmp_path / "o" / "learning_curves.csv")]
    assert counts == sorted(counts) and counts[-1] <= 32 and all(c % 4 == 0 for c in counts)


def test_study_low_power(tmp_path):
    cfg = write(tmp_path, "study: {num_graphs: 2, trajectories: 50}\n")
    assert main(["study", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    summary = json.loads((tmp_path / "o" / "study_summary.json").read_text())
    assert summary["low_power"] is True
    assert summary["num_graphs"] == 2


def test_draw_path_graph(tmp_path):
    (tmp_path / "p3.txt").write_text("3 2\n0 1\n1 2\n")
    cfg = write(tmp_path, "domain: {name: graph, layout: p3.txt}\ndiscovery: {methods: [none], options: 0}\n")
    assert main(["draw", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    xs = [float(r["x"]) for r in rows(tmp_path / "o" / "drawing.csv")]
    assert {xs.index(min(xs)), xs.index(max(xs))} == {0, 2}


@pytest.mark.parametrize("command,body", [
    ("discover", "domain: {name: fourroom}\ndiscovery: {methods: [covering, eigen, betweenness], options: 4}\n"),
    ("covertime", "domain: {name: grid9x9}\ncovertime: {trajectories_per_start: 50}\n"),
    ("learn", "domain: {name: hanoi, discs: 3}\nlearning: {episodes: 10, runs: 2}\n"),
    ("study", "study: {num_graphs: 4, trajectories: 50}\n"),
    ("draw", "domain: {name: fourroom}\n"),
])
def test_reruns_are_bit_identical(tmp_path, command, body):
    cfg = write(tmp_path, body + "seed: 17\n")
    for d in ("a", "b"):
        assert main([command, "--config", cfg, "--out", str(tmp_path / d), "--plot"]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "covopt.harness.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("discover", "covertime", "learn", "study", "draw"):
        assert cmd in res.stdout


def test_seed_override_changes_output(tmp_path):
    cfg = write(tmp_path, "domain: {name: grid9x9}\ndiscovery: {methods: [none]}\ncovertime: {trajectories_per_start: 20}\n")
    main(["covertime", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "1"])
    main(["covertime", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "2"])
    assert (tmp_path / "a" / "covertime.csv").read_text() != (tmp_path / "b" / "covertime.csv").read_text()
