import math
import os

import numpy as np
import pytest

from gossipsim.cli import main
from gossipsim.datasets import DatasetSpec, build_shards, full_dataset
from gossipsim.errors import ConfigError
from gossipsim.learning import LINEAR, HyperParams, loss
from gossipsim.rng import make_stream
from gossipsim.runner import (
    BOUNDS_COLUMNS,
    STALENESS_COLUMNS,
    TRAIN_COLUMNS,
    ExperimentConfig,
    emit_csv,
    execute,
    resolve_lambda,
    run_bounds,
    run_staleness,
    staleness_point,
    training_point,
    write_header_only,
)
from oracles import reference_sgd

EULER_MASCHERONI = 0.5772156649


# -- scaling laws -------------------------------------------------------------


def test_const_scaling_is_flat():
    assert resolve_lambda("const", 2.5, 100) == 2.5


def test_log_scaling_value():
    assert resolve_lambda("log", 1.0, 20) == pytest.approx(math.log(20), rel=1e-12)
    assert resolve_lambda("log", 1.0, 20) == pytest.approx(2.9957, abs=1e-4)


def test_loglog_clamps_at_base_rate():
    # ln ln n < 1 for n below e^e ~ 15.2; the rate never drops below lambda0.
    assert resolve_lambda("loglog", 1.0, 2) == 1.0
    assert resolve_lambda("loglog", 1.0, 4) == 1.0
    big = resolve_lambda("loglog", 1.0, 1000)
    assert big == pytest.approx(math.log(math.log(1000)), rel=1e-12)
    assert big > 1.0


def test_linear_scaling_value():
    assert resolve_lambda("linear", 0.5, 8) == 4.0


def test_resolve_lambda_validation():
    with pytest.raises(ConfigError):
        resolve_lambda("const", 1.0, 1)
    with pytest.raises(ConfigError):
        resolve_lambda("const", 0.0, 4)
    with pytest.raises(ConfigError):
        resolve_lambda("cubic", 1.0, 4)


# -- config -------------------------------------------------------------------


def test_default_burn_in_is_twenty_percent():
    cfg = ExperimentConfig(horizon=500.0)
    assert cfg.burn_in == 100.0


def test_burn_in_must_fit_in_horizon():
    with pytest.raises(ConfigError):
        ExperimentConfig(horizon=10.0, burn_in=10.0)


def test_m_literal_n_resolves_per_point():
    cfg = ExperimentConfig(m="n")
    assert cfg.resolve_m(7) == 7
    cfg2 = ExperimentConfig(m=3)
    assert cfg2.resolve_m(10) == 3
    with pytest.raises(ConfigError):
        cfg2.resolve_m(2)


# -- bounds mode --------------------------------------------------------------


def test_bounds_lemma1_small_n():
    rows = run_bounds(ExperimentConfig(mode="bounds", ns=[4]))
    assert rows[0]["lemma1_bound"] == pytest.approx(11 / 6, rel=1e-12)


def test_bounds_harmonic_remainder():
    rows = run_bounds(ExperimentConfig(mode="bounds", ns=[100]))
    gap = rows[0]["harmonic_exact"] - (math.log(99) + EULER_MASCHERONI)
    assert 0 < gap <= 0.0051


def test_bounds_printed_closed_form_at_linear_rate():
    # lambda = n * mu, c = 0 -> printed bound 1 / (1 - e^-1)
    rows = run_bounds(ExperimentConfig(mode="bounds", ns=[16], scaling="linear"))
    assert rows[0]["thm2_printed"] == pytest.approx(1 / (1 - math.exp(-1)), abs=1e-12)


def test_bounds_row_schema():
    rows = run_bounds(ExperimentConfig(mode="bounds", ns=[2, 4]))
    assert len(rows) == 2
    assert list(rows[0]) == BOUNDS_COLUMNS


# -- csv emission -------------------------------------------------------------


def test_staleness_csv_schema(tmp_path):
    cfg = ExperimentConfig(ns=[2], seeds=[0], horizon=50.0, out_dir=str(tmp_path))
    path = execute(cfg)
    lines = open(path).read().splitlines()
    assert lines[0] == ",".join(STALENESS_COLUMNS)
    assert len(lines) == 2
    assert lines[1].startswith("staleness,uniform,2,const,")


def test_train_csv_schema(tmp_path):
    cfg = ExperimentConfig(
        mode="train", ns=[2], seeds=[0], epochs=3, dim=2,
        samples_per_user=10, out_dir=str(tmp_path),
    )
    path = execute(cfg)
    lines = open(path).read().splitlines()
    assert lines[0] == ",".join(TRAIN_COLUMNS)
    assert len(lines) == 1 + 4  # header + epochs 0..3


def test_header_only_for_zero_rows(tmp_path):
    path = tmp_path / "empty.csv"
    write_header_only("train", str(path))
    assert open(path).read() == ",".join(TRAIN_COLUMNS) + "\n"


def test_emit_rejects_mixed_modes(tmp_path):
    rows = [{"mode": "staleness"}, {"mode": "train"}]
    with pytest.raises(ConfigError):
        emit_csv(rows, str(tmp_path / "x.csv"))


def test_append_keeps_single_header(tmp_path):
    path = str(tmp_path / "bounds.csv")
    rows = run_bounds(ExperimentConfig(mode="bounds", ns=[2]))
    emit_csv(rows, path)
    emit_csv(run_bounds(ExperimentConfig(mode="bounds", ns=[4])), path)
    lines = open(path).read().splitlines()
    assert len(lines) == 3
    assert sum(1 for ln in lines if ln.startswith("mode")) == 1


def test_append_rejects_foreign_header(tmp_path):
    path = str(tmp_path / "bounds.csv")
    with open(path, "w") as fh:
        fh.write("a,b,c\n")
    with pytest.raises(ConfigError):
        emit_csv(run_bounds(ExperimentConfig(mode="bounds", ns=[2])), path)


def test_floats_round_trip_exactly(tmp_path):
    path = str(tmp_path / "bounds.csv")
    rows = run_bounds(ExperimentConfig(mode="bounds", ns=[8], scaling="log"))
    emit_csv(rows, path)
    header, line = open(path).read().splitlines()
    parsed = dict(zip(header.split(","), line.split(",")))
    assert float(parsed["lemma1_bound"]) == rows[0]["lemma1_bound"]
    assert float(parsed["lambda_value"]) == rows[0]["lambda_value"]


# -- determinism and order independence ---------------------------------------


def test_rerun_is_byte_identical(tmp_path):
    cfg = dict(ns=[2, 4], seeds=[0, 1], horizon=100.0)
    a = execute(ExperimentConfig(**cfg, out_dir=str(tmp_path / "a")))
    b = execute(ExperimentConfig(**cfg, out_dir=str(tmp_path / "b")))
    assert open(a, "rb").read() == open(b, "rb").read()


def test_sweep_points_are_order_independent():
    fwd = run_staleness(ExperimentConfig(ns=[2, 4], seeds=[0, 1], horizon=100.0))
    rev = run_staleness(ExperimentConfig(ns=[4, 2], seeds=[1, 0], horizon=100.0))
    key = lambda r: (r["n"], r["seed"])
    assert sorted(fwd, key=key) == sorted(rev, key=key)


def test_point_reproducible_in_isolation():
    cfg = ExperimentConfig(ns=[2, 4, 8], seeds=[0, 1], horizon=100.0)
    swept = {(r["n"], r["seed"]): r for r in run_staleness(cfg)}
    alone = staleness_point(cfg, 4, 1)
    assert alone == swept[(4, 1)]


# -- staleness sanity ---------------------------------------------------------


def test_two_node_mean_staleness_near_oracle():
    cfg = ExperimentConfig(ns=[2], seeds=[0], horizon=5000.0)
    row = staleness_point(cfg, 2, 0)
    assert row["mean_staleness"] == pytest.approx(1.0, abs=0.1)
    assert row["lemma1_bound"] == 1.0


# -- training sanity ----------------------------------------------------------


def test_single_node_matches_reference_sgd():
    # n=1: no gossip, so each epoch is exactly tau more plain SGD steps.
    hyper = HyperParams(alpha=0.02, tau=3, batch=16)
    cfg = ExperimentConfig(
        mode="train", ns=[1], seeds=[0], epochs=5, dim=4,
        samples_per_user=40, hyper=hyper,
    )
    rows = training_point(cfg, 1, 0)
    spec = DatasetSpec(d=4, m=1, samples_per_user=40, seed=0)
    shards = build_shards(spec, 1, LINEAR)
    X, y = full_dataset(shards)
    stream = make_stream(0, 0, "batch")
    theta = np.zeros(4)
    expected = [loss(LINEAR, theta, X, y)]
    for _ in range(5):
        theta = reference_sgd(LINEAR, theta, shards[0].X, shards[0].y, hyper, stream,
                              steps=hyper.tau)
        expected.append(loss(LINEAR, theta, X, y))
    got = [r["mean_loss"] for r in rows[: len(expected)]]
    assert np.allclose(got, expected)


def test_zero_learning_rate_freezes_loss():
    cfg = ExperimentConfig(
        mode="train", ns=[4], seeds=[1], epochs=4, dim=3,
        samples_per_user=20, hyper=HyperParams(alpha=0.0),
    )
    rows = training_point(cfg, 4, 1)
    losses = {r["mean_loss"] for r in rows}
    assert len(losses) == 1


def test_divergence_is_flagged_but_run_finishes():
    cfg = ExperimentConfig(
        mode="train", ns=[2], seeds=[0], epochs=5, dim=10,
        samples_per_user=50, hyper=HyperParams(alpha=1e6, tau=40),
    )
    rows = training_point(cfg, 2, 0)
    assert rows[-1]["diverged"] is True
    assert rows[-1]["epoch"] >= 1


def test_epoch_zero_row_is_first():
    cfg = ExperimentConfig(
        mode="train", ns=[3], seeds=[2], epochs=2, dim=2, samples_per_user=10,
    )
    rows = training_point(cfg, 3, 2)
    assert rows[0]["epoch"] == 0
    assert rows[0]["sim_time"] == 0.0
    assert [r["epoch"] for r in rows] == sorted(r["epoch"] for r in rows)


# -- cli ----------------------------------------------------------------------


def test_cli_bounds_mode(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["bounds", "--n", "4", "8", "--out", str(out)])
    assert rc == 0
    path = capsys.readouterr().out.strip()
    assert path == str(out / "bounds.csv")
    assert os.path.exists(path)


def test_cli_config_file_with_flag_override(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("[run]\nn = 2\nseeds = 0\nhorizon = 50\nscaling = log\n")
    out = tmp_path / "out"
    rc = main(["staleness", "--config", str(conf), "--scaling", "const",
               "--out", str(out)])
    assert rc == 0
    line = open(out / "staleness.csv").read().splitlines()[1]
    assert ",const," in line


def test_cli_rejects_unknown_config_key(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("[run]\nwarp = 9\n")
    rc = main(["staleness", "--config", str(conf)])
    assert rc == 2
    assert "warp" in capsys.readouterr().err
