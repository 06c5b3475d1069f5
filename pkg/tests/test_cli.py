import csv
import subprocess
import sys

import pytest

from smoothci.cli import ConfigError, RunConfig, load_config, main


def write(path, text):
    path.write_text(text)
    return path


def read_rows(path):
    with open(path) as fh:
        header_line = fh.readline()
        assert header_line.startswith("# smoothci ")
        return list(csv.DictReader(fh))


SMALL = """
n = 25
m = 1
rho = [0.0, 0.9]
gamma_min = -2.0
gamma_max = 2.0
gamma_step = 1.0
"""


def test_defaults():
    cfg = RunConfig()
    assert (cfg.n, cfg.m, cfg.alpha, cfg.alpha_tilde) == (25, 1, 0.05, 0.1)
    assert cfg.rho == [0.2, 0.5, 0.7, 0.9]
    grid = cfg.gamma_grid()
    assert len(grid) == 201 and grid[0] == -10.0 and grid[-1] == 10.0 and 0.0 in grid


def test_p_converted(tmp_path):
    cfg = load_config(write(tmp_path / "c.toml", "n = 25\np = 22\nrho = 0.3\n"))
    assert cfg.m == 3
    assert cfg.rho == [0.3]


@pytest.mark.parametrize("text", [
    "bogus = 1\n",
    "mode = 'everything'\n",
    "rho = [1.0]\n",
    "m = 0\n",
    "n = 5\nm = 5\n",
    "gamma_step = 0\n",
    "m = 2\np = 3\n",
    "reps = 10\n",
    "[table]\nx = 1\n",
])
def test_invalid_config_exit_code(tmp_path, text, capsys):
    path = write(tmp_path / "bad.toml", text)
    assert main(["--config", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "invalid config" in capsys.readouterr().err
    with pytest.raises(ConfigError):
        load_config(path)


def test_unreadable_config_exit_code(tmp_path):
    assert main(["--config", str(tmp_path / "missing.toml")]) == 2
    assert main(["--config", str(write(tmp_path / "broken.toml", "n = = 3"))]) == 2


def test_quadrature_failure_exit_code(tmp_path):
    text = "mode = 'coverage'\nrho = [0.5]\ngamma_min = 0\ngamma_max = 1\nnodes_w = 8\nnodes_y = 8\n"
    assert main(["--config", str(write(tmp_path / "q.toml", text)), "--out", str(tmp_path / "o")]) == 3


def test_io_failure_exit_code(tmp_path):
    blocker = write(tmp_path / "file", "x")
    cfg = write(tmp_path / "c.toml", SMALL + "mode = 'coverage'\n")
    assert main(["--config", str(cfg), "--out", str(blocker / "sub")]) == 4


def test_coverage_and_sel(tmp_path):
    cfg = write(tmp_path / "c.toml", SMALL + "plot = true\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o"), "--threads", "2"]) == 0
    cov = read_rows(tmp_path / "o" / "coverage.csv")
    assert len(cov) == 10
    for row in cov:
        if float(row["rho"]) == 0.0:
            assert float(row["value"]) == pytest.approx(0.95, abs=1e-9)
    by_gamma = {float(r["gamma"]): float(r["value"]) for r in cov if float(r["rho"]) == 0.9}
    assert by_gamma[-2.0] == pytest.approx(by_gamma[2.0], abs=1e-12)
    sel = read_rows(tmp_path / "o" / "sel.csv")
    assert len(sel) == 10
    dip = [float(r["value"]) for r in sel if float(r["rho"]) == 0.9 and float(r["gamma"]) == 0.0]
    assert dip[0] < 1.0
    assert (tmp_path / "o" / "coverage.gp").exists()


def test_threads_do_not_change_output(tmp_path):
    cfg = write(tmp_path / "c.toml", SMALL + "mode = 'coverage'\n")
    main(["--config", str(cfg), "--out", str(tmp_path / "a"), "--threads", "1"])
    main(["--config", str(cfg), "--out", str(tmp_path / "b"), "--threads", "3"])
    body = lambda d: (tmp_path / d / "coverage.csv").read_text().split("\n", 1)[1]  # noqa: E731
    assert body("a") == body("b")


VERIFY = """
mode = "verify"
reps = 2000
verify_gamma = [0.0, 3.0]
verify_rho = [0.9]
verify_sel_gamma = [0.0]
verify_sel_rho = [0.9]
"""


def test_verify_mode_deterministic(tmp_path):
    cfg = write(tmp_path / "v.toml", VERIFY)
    assert main(["--config", str(cfg), "--out", str(tmp_path / "a"), "--seed", "5"]) == 0
    assert main(["--config", str(cfg), "--out", str(tmp_path / "b"), "--seed", "5"]) == 0
    body = lambda d: (tmp_path / d / "verify.csv").read_bytes().split(b"\n", 1)[1]  # noqa: E731
    assert body("a") == body("b")
    first = (tmp_path / "a" / "verify.csv").read_bytes()
    assert main(["--config", str(cfg), "--out", str(tmp_path / "a"), "--seed", "5"]) == 0
    assert (tmp_path / "a" / "verify.csv").read_bytes() == first
    rows = read_rows(tmp_path / "a" / "verify.csv")
    assert {r["check"] for r in rows} == {"coverage", "pms_mean", "sd_identity", "sel"}
    assert all(r["status"] == "PASS" for r in rows)


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path / "c.toml", "rho = [0.0]\ngamma_min = 0\ngamma_max = 0\nmode = 'coverage'\n")
    proc = subprocess.run([sys.executable, "-m", "smoothci", "--config", str(cfg), "--out", str(tmp_path / "o")],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert len(read_rows(tmp_path / "o" / "coverage.csv")) == 1
