import json

import numpy as np
import pytest

from wosnn.cli import build_parser, main
from wosnn.config import PRESETS, RunConfig, load_config, preset_config
from wosnn.errors import ConfigError
from wosnn.fields import import_field

SMALL = ["--set", "n_starts=300", "--set", "epochs=2", "--set", "batch_size=64", "--set", "grid.spacing=0.25",
         "--set", "wos.n_paths=4", "--set", "baseline.batch_size=8", "--set", "baseline.epochs=2",
         "--set", "fdm.h=0.25"]

RESULT_FILES = ["paths.bin", "model.ckpt", "loss_history.csv", "field_u.csv", "field_grad.csv", "metrics.json",
                "wos_field.csv", "wos_metrics.json", "baseline_field.csv", "baseline.ckpt",
                "baseline_loss_history.csv", "baseline_metrics.json"]


def pipeline(preset, out, *extra):
    args = ["--preset", preset, "--out", str(out), *SMALL, *extra]
    for cmd in ("sample", "train", "eval", "wos", "wos-nn-baseline"):
        assert main([cmd, *args]) == 0, cmd


@pytest.mark.parametrize("preset", ["laplace2d", "lshape"])
def test_pipeline_is_byte_identical(preset, tmp_path, capsys):
    pipeline(preset, tmp_path / "a")
    pipeline(preset, tmp_path / "b", "--workers", "2")
    for name in RESULT_FILES:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
    out = capsys.readouterr().out
    assert "err_u" in out and "WoS-NN" in out


def test_eval_outputs(tmp_path, capsys):
    pipeline("poisson2d", tmp_path)
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["reference"] == "exact" and metrics["n_nodes"] == 49
    assert {"mean_error_u", "mean_error_grad", "mse_u", "training_loss"} <= set(metrics)
    manifest = json.loads((tmp_path / "sample_manifest.json").read_text())
    assert 0 < manifest["n_valid"] <= 300
    assert manifest["config"]["n_starts"] == 300
    grad = import_field(tmp_path / "field_grad.csv", 0.25)
    assert grad.values.shape == (49, 2)
    history = (tmp_path / "loss_history.csv").read_text().splitlines()
    assert history[0] == "epoch,loss" and len(history) == 3


def test_fdm_command(tmp_path, capsys):
    assert main(["fdm", "--preset", "lshape", "--out", str(tmp_path), "--set", "fdm.h=0.1"]) == 0
    field = import_field(tmp_path / "fdm_field.csv", 0.1)
    assert len(field) == 3 * 9 * 9 + 2 * 9
    assert field.values.min() >= 0 and field.values.max() <= 1


def test_fdm_reference_for_lshape(tmp_path, capsys):
    pipeline("lshape", tmp_path)
    assert json.loads((tmp_path / "metrics.json").read_text())["reference"] == "fdm"


def test_three_d_probe_planes(tmp_path, capsys):
    args = ["--preset", "poisson3d", "--out", str(tmp_path), "--set", "n_starts=200", "--set", "epochs=1",
            "--set", "batch_size=50", "--set", "grid.spacing=0.25"]
    for cmd in ("sample", "train", "eval"):
        assert main([cmd, *args]) == 0
    u = import_field(tmp_path / "field_u.csv", 0.25)
    c = u.coords
    on_plane = np.isclose(c[:, 0], -0.5) | np.isclose(c[:, 1], 0.5) | np.isclose(c[:, 2], 0.5)
    assert on_plane.all()
    assert np.all(c[:, 0] <= 0) and np.all(c[:, 1:] >= 0)


def test_zero_starts_is_config_error(tmp_path, capsys):
    assert main(["sample", "--out", str(tmp_path), "--set", "n_starts=0"]) == 2
    assert "n_starts" in capsys.readouterr().err


@pytest.mark.parametrize(
    "args",
    [
        ["train", "--dataset", "missing.bin"],
        ["eval", "--checkpoint", "missing.ckpt"],
        ["wos", "--set", "nonsense=1"],
        ["wos", "--set", "novalue"],
        ["sample", "--config", "missing.yaml"],
        ["sample", "--set", "problem.name=heat"],
    ],
)
def test_config_errors_exit_2(args, tmp_path, capsys):
    assert main([*args, "--out", str(tmp_path)]) == 2


def test_numerical_failure_exits_3(tmp_path, capsys):
    args = ["fdm", "--preset", "lshape", "--out", str(tmp_path), "--set", "fdm.h=0.02", "--set", "fdm.max_iters=3"]
    assert main(args) == 3
    assert "did not converge" in capsys.readouterr().err


def test_help_lists_presets(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--help"])
    text = capsys.readouterr().out
    for name in ("laplace2d", "poisson2d", "lshape", "poisson3d"):
        assert name in text
    for cmd in ("sample", "train", "eval", "wos", "wos-nn-baseline", "fdm"):
        assert cmd in text


def test_presets_encode_experiment_settings():
    lap = preset_config("laplace2d")
    assert (lap.eps, lap.max_steps, lap.n_starts, lap.hidden, lap.lr, lap.batch_size, lap.epochs) == (
        1e-3, 20, 40000, [32, 64, 128], 3e-4, 2048, 50)
    assert (lap.grid_spacing, lap.wos_n_paths) == (0.02, 50)
    three = preset_config("poisson3d")
    assert (three.eps, three.max_steps, three.n_starts, three.hidden) == (1e-2, 80, 60000, [64, 128, 128])
    assert set(PRESETS) == {"laplace2d", "poisson2d", "lshape", "poisson3d"}


def test_config_file_and_precedence(tmp_path):
    f = tmp_path / "run.yaml"
    f.write_text("preset: poisson2d\nepochs: 7\nwos:\n  n_paths: 9\n")
    cfg = load_config(f, overrides={"epochs": 3})
    assert cfg.preset == "poisson2d" and cfg.problem_name == "poisson2d_xy2"
    assert cfg.epochs == 3 and cfg.wos_n_paths == 9
    assert load_config(f, preset="lshape").problem_name == "lshape_indicator"
    round_trip = RunConfig.from_mapping(cfg.to_mapping())
    assert round_trip == cfg
    f.write_text("- a list\n")
    with pytest.raises(ConfigError):
        load_config(f)


def test_custom_problem_config():
    cfg = RunConfig.from_mapping({"problem.custom.g": "x**2 - y**2", "problem.custom.u": "x**2 - y**2",
                                  "domain.kind": "box2", "domain.lo": [0, 0], "domain.hi": [1, 2]})
    p = cfg.problem()
    assert p.exact_u(np.array([1.0, 2.0])) == -3.0
    assert list(p.domain.hi) == [1.0, 2.0]
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"problem.custom.g": "x"}).problem()
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"problem.name": "laplace2d_xy", "domain.kind": "box3"}).problem()
