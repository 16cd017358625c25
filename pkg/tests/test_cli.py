import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from depnet.cli import main

P1 = ["--alpha", "0.2", "--beta", "0.5", "--gamma", "0.05"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def split_csv_json(out):
    table, _, blob = out.partition("\n\n")
    return rows(table), json.loads(blob)


def test_spectral_star(capsys):
    code, out, _ = run(capsys, "spectral", "--graph", "star:11")
    d = json.loads(out)
    assert code == 0 and d["rho_A"] == pytest.approx(3.16228, abs=1e-5)
    assert d["degree_max"] == 10 and d["edges"] == 10


def test_spectral_edgeless_file(capsys, tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# isolated pair and a triangle\n0 1\n2 3\n3 4\n2 4\n")
    code, out, _ = run(capsys, "spectral", "--graph", str(path))
    assert code == 0 and json.loads(out)["rho_A"] == pytest.approx(2.0, abs=1e-8)


def test_bad_graph_path(capsys):
    code, _, err = run(capsys, "spectral", "--graph", "/no/such/file")
    assert code == 1 and "cannot read graph" in err


def test_bad_edge_list(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 0\n")
    code, _, err = run(capsys, "spectral", "--graph", str(path))
    assert code == 1 and "self-loop" in err


def test_equilibrium_pull_only(capsys):
    code, out, _ = run(capsys, "equilibrium", "--graph", "er:20,0.3,4", "--alpha", "0.2",
                       "--beta", "0.5", "--gamma", "0")
    table, report = split_csv_json(out)
    assert code == 0
    assert all(float(r["i_star"]) == pytest.approx(0.285714, abs=1e-6) for r in table)
    assert report["cond6_rhs"] is None and report["cond6_holds"]


def test_equilibrium_table_cell(capsys):
    code, out, _ = run(capsys, "equilibrium", "--graph", "star:11", *P1,
                       "--outer", "gaussian:0.5", "--node", "clayton:1")
    table, report = split_csv_json(out)
    assert code == 0 and list(table[0]) == ["node", "degree", "i_star"]
    assert float(table[0]["i_star"]) == pytest.approx(0.35, abs=0.01)
    assert float(table[1]["i_star"]) == pytest.approx(0.29, abs=0.01)
    assert report["tau"] == pytest.approx(14.11, abs=0.05)
    for key in ("rho_A", "cond6_rhs", "cond6_holds", "rho_W", "tau", "cond8_holds", "thm2_rhs", "thm2_holds"):
        assert key in report


def test_equilibrium_non_convergence(capsys):
    code, out, err = run(capsys, "equilibrium", "--graph", "star:11", *P1, "--max-iter", "2")
    table, report = split_csv_json(out)
    assert code == 2 and len(table) == 11 and report["converged"] is False
    assert "not converged" in err


def test_files_and_full_precision(capsys, tmp_path):
    prefix = tmp_path / "run" / "cell"
    code, out, _ = run(capsys, "equilibrium", "--graph", "star:5", *P1, "--out", str(prefix),
                       "--full-precision")
    assert code == 0 and out == ""
    text = (tmp_path / "run" / "cell_equilibrium.csv").read_text()
    value = text.splitlines()[1].split(",")[2]
    assert len(value.replace("0.", "", 1)) >= 15
    assert json.loads((tmp_path / "run" / "cell_thresholds.json").read_text())["cond6_holds"]


def test_simulate_horizon_zero_echoes_initial(capsys, tmp_path):
    init = tmp_path / "init.csv"
    init.write_text("node,i\n0,0.1\n1,0.25\n2,0.5\n")
    code, out, _ = run(capsys, "simulate", "--graph", "star:3", *P1, "--horizon", "0",
                       "--initial", str(init))
    assert code == 0
    assert [float(r["i"]) for r in rows(out)] == [0.1, 0.25, 0.5]


def test_simulate_pull_only_converges(capsys):
    code, out, _ = run(capsys, "simulate", "--graph", "star:4", "--alpha", "0.2", "--beta", "0.5",
                       "--gamma", "0", "--horizon", "200")
    last = [float(r["i"]) for r in rows(out) if r["t"] == "200"]
    assert code == 0 and np.allclose(last, 0.2 / 0.7, atol=1e-6)


def test_simulate_initial_length_mismatch(capsys, tmp_path):
    init = tmp_path / "init.csv"
    init.write_text("0.1\n0.2\n")
    code, _, err = run(capsys, "simulate", "--graph", "star:3", *P1, "--initial", str(init))
    assert code == 1 and "initial state" in err


def test_simulate_tail_inside_trajectory_bounds(capsys):
    argv = ["--graph", "er:12,0.3,2", "--alpha", "0.3", "--beta", "0.6", "--gamma", "0.2",
            "--outer", "frank:2", "--node", "clayton:1.5"]
    _, out, _ = run(capsys, "simulate", *argv, "--horizon", "400", "--initial", "0.9")
    traj = rows(out)
    _, bout, _ = run(capsys, "bounds", *argv)
    b = rows(bout)
    for r in traj:
        if int(r["t"]) >= 300:
            v = int(r["node"])
            assert float(b[v]["neq_lower"]) - 1e-5 <= float(r["i"]) <= float(b[v]["neq_upper"]) + 1e-5


def test_bounds_star_refinement(capsys):
    code, out, _ = run(capsys, "bounds", "--graph", "star:11", *P1)
    table = rows(out)
    assert code == 0 and list(table[0]) == ["node", "degree", "lower", "upper", "neq_lower", "neq_upper"]
    assert float(table[0]["upper"]) == pytest.approx(0.46333, abs=1e-5)
    assert float(table[0]["lower"]) == pytest.approx(0.285714, abs=1e-6)


def test_bounds_regular_refinement(capsys):
    code, out, _ = run(capsys, "bounds", "--graph", "regular:6,2,1", "--alpha", "0.5", "--beta", "0.1",
                       "--gamma", "0.01")
    assert code == 0
    assert all(float(r["upper"]) == pytest.approx(0.837862, abs=1e-6) for r in rows(out))


def test_bounds_pull_only_collapse(capsys):
    _, out, _ = run(capsys, "bounds", "--graph", "er:10,0.5,1", "--alpha", "0.2", "--beta", "0.5",
                    "--gamma", "0")
    for r in rows(out):
        assert float(r["lower"]) == pytest.approx(float(r["upper"]))


def test_threshold_command(capsys):
    code, out, _ = run(capsys, "threshold", "--graph", "star:11", "--alpha", "0.4", "--beta", "0.7",
                       "--gamma", "0.05", "--outer", "gaussian:0.5", "--node", "clayton:1")
    d = json.loads(out)
    assert code == 0 and d["tau"] == pytest.approx(17.11, abs=0.05) and d["thm2_rhs"] <= d["tau"]


def test_repro_tables(capsys):
    for name in ("table1", "table2"):
        code, out, _ = run(capsys, "repro", name)
        table = rows(out)
        assert code == 0 and len(table) == 33
        assert list(table[0]) == ["node_param", "outer_param", "i_h", "i_l", "tau"]


def test_repro_unknown_table(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["repro", "table3"])
    assert exc.value.code == 1
    assert "invalid choice" in capsys.readouterr().err


def test_sweep_custom_grid(capsys):
    code, out, _ = run(capsys, "sweep", "--graph", "star:6", *P1, "--node-grid", "frank:1,4",
                       "--outer-grid", "gaussian:-0.5,0")
    table = rows(out)
    assert code == 0 and len(table) == 4
    assert [(r["node_param"], r["outer_param"]) for r in table] == [("1", "-0.5"), ("1", "0"), ("4", "-0.5"), ("4", "0")]


def test_sweep_requires_star(capsys):
    code, _, err = run(capsys, "sweep", "--graph", "er:10,0.4,1", *P1)
    assert code == 1 and "star" in err


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"graph": "star:11", "alpha": 0.2, "beta": 0.5, "gamma": 0.05,
                               "outer": {"family": "gaussian", "param": 0.5}, "node": "clayton:1"}))
    _, out, _ = run(capsys, "equilibrium", "--config", str(cfg))
    table, _ = split_csv_json(out)
    assert float(table[0]["i_star"]) == pytest.approx(0.34731, abs=1e-5)
    _, out, _ = run(capsys, "equilibrium", "--config", str(cfg), "--gamma", "0")
    table, _ = split_csv_json(out)
    assert float(table[0]["i_star"]) == pytest.approx(0.285714, abs=1e-6)


def test_config_rejects_unknown_keys(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"graph": "star:3", "colour": "red"}')
    code, _, err = run(capsys, "spectral", "--config", str(cfg))
    assert code == 1 and "colour" in err


@pytest.mark.parametrize("argv", [
    ["equilibrium", "--graph", "star:5"],
    ["equilibrium", "--graph", "star:5", *P1, "--node", "clayton:-1"],
    ["equilibrium", "--graph", "star:5", "--alpha", "2", "--beta", "0.5", "--gamma", "0.1"],
    ["equilibrium", "--graph", "star:5", *P1, "--tol", "0"],
    ["equilibrium", "--graph", "star:5", *P1, "--node", "gaussian:-0.5"],
    ["spectral", "--graph", "regular:5,3,1"],
    ["spectral", "--graph", "er:5"],
])
def test_input_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and err.startswith("depnet: error")


def test_approx_pull_only_grid_flagged(capsys):
    code, out, err = run(capsys, "approx", "--graph", "er:50,0.1,1", "--grid", "0.1,0.2/0.3,0.5/0")
    model, _, table = out.partition("\n\n")
    assert code == 0 and "degenerate" in err
    assert set(json.loads(model)) == {"k0", "k1", "k2", "k3", "err_G"}
    assert list(rows(table)[0]) == ["node", "degree", "i_star", "lower", "upper", "i_tilde", "i_hat"]


def test_approx_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        prefix = tmp_path / f"r{k}"
        code, _, _ = run(capsys, "approx", "--graph", "er:80,0.08,3", "--outer", "gaussian:0.3",
                         "--node", "frank:2", "--grid", "0.1,0.3/0.3,0.6/0.02,0.05", "--out", str(prefix))
        assert code == 0
        outs.append((tmp_path / f"r{k}_model.json").read_bytes() + (tmp_path / f"r{k}_approximation.csv").read_bytes())
    assert outs[0] == outs[1]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "depnet.cli", "spectral", "--graph", "star:5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["rho_A"] == pytest.approx(2.0)
