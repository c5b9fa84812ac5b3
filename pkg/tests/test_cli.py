import json
import subprocess
import sys

import pytest

from degenheat.cli import ConfigError, RunConfig, main, parse_config, preset

SMALL = """
problem.N = 3
problem.alpha = 4
problem.R = 32
grid.n = 200
spectral.ell_max = 6
heat.t = 0.5, 1.0
heat.radii = 0.0, 1.0, 3.0
"""


def test_config_round_trip():
    cfg = parse_config(SMALL)
    assert cfg.alpha == 4.0 and cfg.n == 200 and cfg.t == (0.5, 1.0)
    assert parse_config(cfg.to_text()) == cfg
    for c in preset("paper-core") + preset("control") + preset("default"):
        assert parse_config(c.to_text(), RunConfig()) == c


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("problem.N = 3\nbogus", "line 2"),
        ("problem.Q = 1", "unknown key"),
        ("grid.n = many", "line 1: bad value for grid.n"),
        ("checks = weyl, nope", "unknown check"),
        ("problem.m = wobbly", "unknown m preset"),
        ("heat.costheta = 2", "costheta"),
        ("bounds.refine = maybe", "not a boolean"),
    ],
)
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


def test_paper_core_preset_shape():
    cfgs = preset("paper-core")
    assert [c.alpha for c in cfgs] == [3.0, 4.0, 6.0]
    assert all(c.N == 3 for c in cfgs)
    assert "thm-weightV" not in cfgs[2].checks
    with pytest.raises(ConfigError):
        preset("nope")


def test_spectrum_command(tmp_path, capsys):
    assert main(["spectrum", "--preset", "control", "--out", str(tmp_path)]) == 0
    rows = [l for l in (tmp_path / "spectrum.csv").read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "ell,n,lambda,multiplicity"
    assert float(rows[1].split(",")[2]) == pytest.approx(-9.8696, rel=1e-4)
    side = json.loads((tmp_path / "spectrum_convergence.json").read_text())
    assert "lambda_1_doubled_R" in side["payload"]


def test_kernel_command_and_determinism(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text(SMALL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["kernel", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["kernel", "--config", str(cfg), "--out", str(b)]) == 0
    for name in ("kernel.csv", "trace.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    lines = (a / "kernel.csv").read_text().splitlines()
    assert lines[0].startswith("# degenheat ")
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "rx,ry,costheta,t,p_mu,p_lebesgue,tail_bound"
    assert len(body) == 1 + 2 * 6 * 3
    trace_rows = [l for l in (a / "trace.csv").read_text().splitlines() if not l.startswith("#")]
    assert trace_rows[0] == "t,trace_spectral,trace_diagonal_quadrature"
    _, s, q = map(float, trace_rows[1].split(","))
    assert abs(s - q) <= 1e-8 * s


def test_verify_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text(SMALL)
    assert main(["verify", "--config", str(cfg), "--out", str(tmp_path / "ok"), "--check", "trace-lower", "--check", "hardy"]) == 0
    out = capsys.readouterr().out
    assert "PASS trace-lower" in out and "PASS hardy" in out
    rep = json.loads((tmp_path / "ok" / "report.json").read_text())
    assert {r.get("bound_id", r.get("inequality_id")) for r in rep["payload"]["reports"]} == {"trace-lower", "hardy"}
    # eigenfunction bounds reject alpha <= 2 inside the check: reported as an error, exit 1
    cfg.write_text(SMALL.replace("problem.alpha = 4", "problem.alpha = 2"))
    assert main(["verify", "--config", str(cfg), "--out", str(tmp_path / "bad"), "--check", "eigenfun-N4"]) == 1
    assert "ERROR eigenfun-N4" in capsys.readouterr().out
    assert main(["verify", "--config", str(cfg), "--out", str(tmp_path / "x"), "--check", "nope"]) == 2
    assert main(["verify", "--config", str(cfg), "--out", str(tmp_path / "e")]) == 0
    assert main(["verify", "--config", str(tmp_path / "missing.txt")]) == 2


def test_console_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "degenheat.cli", "spectrum", "--preset", "control", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0, out.stderr
    bad = subprocess.run([sys.executable, "-m", "degenheat.cli", "frobnicate"], capture_output=True, text=True)
    assert bad.returncode == 2
