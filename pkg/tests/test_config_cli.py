import filecmp
from pathlib import Path

import numpy as np
import pytest

from gravdec import cli, config, io
from gravdec.config import ExperimentConfig
from gravdec.errors import SchemaError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL = """
[grid]
n = 8

[noise]
alpha = {alpha}
active = 00, 01

[state]
preset = two-site
sites = 2, 5
spin = x

[run]
mode = {mode}
T = 0.2
dt = 0.01
n_traj = 40
seed = 3
n_samples = 4
pair = 4, 10
"""


def write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(tmp_path, text, *extra, name="out"):
    cfg = write(tmp_path, text)
    out = tmp_path / name
    return cli.main(["run", str(cfg), "--out-dir", str(out), *extra]), out


def load_rho(path):
    header, rows = io.read_csv(path)
    vals = np.array([[float(x) for x in r] for r in rows])
    t = np.unique(vals[:, 0])
    d = int(vals[:, 1].max()) + 1
    rho = (vals[:, 3] + 1j * vals[:, 4]).reshape(len(t), d, d)
    return header, t, rho


def test_round_trip():
    cfg = config.replace(ExperimentConfig(), "noise", alpha=0.25, active=("00", "12"))
    cfg = config.replace(cfg, "run", pair=(1, 3), include_hr=True, T=0.3, dt=0.1)
    assert config.parse_text(config.serialize(cfg)) == cfg


def test_shipped_configs_parse():
    paths = sorted(CONFIGS.glob("*.ini"))
    assert paths
    for p in paths:
        config.parse(p)


@pytest.mark.parametrize("text", [
    "[grid]\nsize = 4\n",
    "[gird]\nn = 4\n",
    "[grid]\nn = 6\n",
    "[run]\nT = 1.0\ndt = 0.3\n",
    "[noise]\nactive = 00, 44\n",
    "[run]\nmode = fast\n",
    "[grid]\nn = four\n",
])
def test_schema_violations(text):
    with pytest.raises(SchemaError):
        config.parse_text(text)


def test_exit_code_schema(tmp_path):
    code, _ = run(tmp_path, "[grid]\nbogus = 1\n")
    assert code == cli.EXIT_SCHEMA


def test_exit_code_guard(tmp_path):
    code, out = run(tmp_path, "[grid]\nn = 512\n[run]\nmode = master\n")
    assert code == cli.EXIT_GUARD
    assert "aborted" in (out / "summary.txt").read_text()


def test_exit_code_failed_check(tmp_path):
    code, out = run(tmp_path, "[run]\nmode = fw-verify\n")
    assert code == cli.EXIT_CHECK
    assert "FAIL" in (out / "summary.txt").read_text()
    assert (out / "fw_mismatches.csv").exists()


def test_master_run_artifacts(tmp_path):
    code, out = run(tmp_path, SMALL.format(alpha=0.3, mode="master"))
    assert code == cli.EXIT_OK
    for name in ("manifest.txt", "rho.csv", "coherence.csv", "summary.txt"):
        assert (out / name).exists()
    header, t, rho = load_rho(out / "rho.csv")
    assert header == ["t", "row", "col", "re", "im"]
    assert np.allclose(np.trace(rho, axis1=1, axis2=2), 1.0)
    manifest = (out / "manifest.txt").read_text()
    assert "[provenance]" in manifest and "alpha = 0.3" in manifest


def test_noise_free_trajectories_match_master(tmp_path):
    _, a = run(tmp_path, SMALL.format(alpha=0.0, mode="master"), name="m")
    _, b = run(tmp_path, SMALL.format(alpha=0.0, mode="trajectories"), name="t")
    _, _, rm = load_rho(a / "rho.csv")
    header, _, rt = load_rho(b / "rho.csv")
    assert header[-2:] == ["stderr_re", "stderr_im"]
    assert np.abs(rm - rt).max() < 1e-10


def test_reruns_are_byte_identical(tmp_path):
    text = SMALL.format(alpha=0.4, mode="trajectories")
    run(tmp_path, text, name="a")
    run(tmp_path, text, "--threads", "2", name="b")
    for name in ("rho.csv", "coherence.csv"):
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False)


def test_seed_override_changes_output(tmp_path):
    text = SMALL.format(alpha=0.4, mode="trajectories")
    run(tmp_path, text, name="a")
    run(tmp_path, text, "--seed", "99", name="b")
    assert not filecmp.cmp(tmp_path / "a" / "rho.csv", tmp_path / "b" / "rho.csv", shallow=False)


def test_env_out_dir(tmp_path, monkeypatch):
    target = tmp_path / "from-env"
    monkeypatch.setenv(cli.ENV_OUT_DIR, str(target))
    cfg = write(tmp_path, "[run]\nmode = identities\n")
    assert cli.main(["run", str(cfg)]) == cli.EXIT_OK
    assert (target / "identities.csv").exists()


def test_validate_suggests_dt(tmp_path, capsys):
    cfg = write(tmp_path, "[grid]\nn = 64\nspacing = 0.1\n[run]\nmode = master\nT = 1.0\ndt = 0.5\n")
    assert cli.main(["validate", str(cfg)]) == cli.EXIT_OK
    assert "suggested dt" in capsys.readouterr().out


def test_validate_rejects_large_dense_grid(tmp_path, capsys):
    cfg = write(tmp_path, "[grid]\nn = 512\n[run]\nmode = master\n")
    assert cli.main(["validate", str(cfg)]) == cli.EXIT_GUARD
    assert "error" in capsys.readouterr().out
