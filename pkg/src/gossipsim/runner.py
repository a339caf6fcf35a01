"""Sweep execution: wire configs into runs, collect rows, emit CSVs.

Three modes:
  staleness -- event loop with version tracking only (no model math),
               one row per (n, seed) with time-average staleness and the
               closed-form bounds;
  train     -- full simulation with learning, one row per epoch
               (epoch = total update events / n);
  bounds    -- closed-form evaluation only, no simulation.

Every row is self-describing (mode, scheme, n, scaling, seed, ...), so
any single run can be regenerated in isolation and row order carries no
information.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from gossipsim.datasets import DatasetSpec, build_shards, dump_csv, full_dataset
from gossipsim.errors import ConfigError
from gossipsim.learning import BILINEAR, LINEAR, HyperParams, loss
from gossipsim.protocols import OPPORTUNISTIC, UNIFORM, NodeConfig, SchemeConfig
from gossipsim.simulation import Simulation, TrainingState
from gossipsim.staleness import harmonic, lemma1_bound, thm2_lower_bound

SCALINGS = ("const", "loglog", "log", "linear")

STALENESS_COLUMNS = [
    "mode", "scheme", "n", "scaling", "lambda0", "mu", "c", "seed",
    "horizon", "burn_in", "mean_staleness", "max_staleness",
    "lemma1_bound", "thm2_fixed_point", "thm2_printed",
]
TRAIN_COLUMNS = [
    "mode", "scheme", "n", "scaling", "lambda0", "seed", "predictor", "m",
    "epoch", "mean_loss", "max_loss", "sim_time", "diverged",
]
BOUNDS_COLUMNS = [
    "mode", "n", "scaling", "lambda0", "mu", "c", "lambda_value",
    "lemma1_bound", "harmonic_exact", "harmonic_approx",
    "thm2_fixed_point", "thm2_printed",
]


def resolve_lambda(scaling: str, lambda0: float, n: int) -> float:
    """Per-node gossip rate under the given scaling law."""
    if n < 2 or lambda0 <= 0:
        raise ConfigError(f"need n >= 2 and lambda0 > 0, got n={n}, lambda0={lambda0}")
    if scaling == "const":
        return lambda0
    if scaling == "loglog":
        # ln ln n dips below 1 (even below 0) for small n; clamp at the base rate.
        return max(lambda0, lambda0 * math.log(math.log(n)))
    if scaling == "log":
        return lambda0 * math.log(n)
    if scaling == "linear":
        return lambda0 * n
    raise ConfigError(f"unknown scaling {scaling!r}, expected one of {SCALINGS}")


@dataclass
class ExperimentConfig:
    mode: str = "staleness"
    scheme: str = UNIFORM
    ns: list[int] = field(default_factory=lambda: [2, 4, 8, 16, 32, 64, 128])
    scaling: str = "const"
    lambda0: float = 1.0
    mu: float = 1.0
    c: float = 0.0
    d_delay: float = 0.0
    horizon: float = 1000.0
    burn_in: float | None = None  # None -> first 20% of the horizon
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    out_dir: str = "out"
    # training
    predictor: str = LINEAR
    dim: int = 100
    m: int | str = 1  # an int, or "n" for one distribution per user
    samples_per_user: int = 200
    label_noise_sd: float = 0.0
    normalize: bool = False
    epochs: int = 100
    hyper: HyperParams = field(default_factory=HyperParams)
    dump_dataset: bool = False

    def __post_init__(self):
        if not self.ns or not self.seeds:
            raise ConfigError("n list and seed list must be non-empty")
        if self.burn_in is None:
            self.burn_in = 0.2 * self.horizon
        if self.mode in ("staleness", "train") and self.horizon <= self.burn_in:
            raise ConfigError(
                f"horizon {self.horizon} must exceed burn-in {self.burn_in}"
            )
        if self.scaling not in SCALINGS:
            raise ConfigError(f"unknown scaling {self.scaling!r}")
        if self.predictor not in (LINEAR, BILINEAR):
            raise ConfigError(f"unknown predictor {self.predictor!r}")

    def resolve_m(self, n: int) -> int:
        m = n if self.m == "n" else int(self.m)
        if m > n:
            raise ConfigError(f"m={m} exceeds n={n}")
        return m


def all_user_losses(kind: str, thetas: list[np.ndarray], X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Each user's model evaluated on the full dataset, in one matrix pass."""
    theta = np.column_stack(thetas)  # d x n
    # Diverged models evaluate to inf; that is reported, not a crash.
    with np.errstate(over="ignore", invalid="ignore"):
        if kind == LINEAR:
            preds = X @ theta
        else:
            preds = X[:, :1] * theta[0] + X[:, 1:2] * (theta[0] * theta[1])
        r = preds - y[:, None]
        return np.mean(r * r, axis=0)


def _scheme_config(scheme: str, lam: float, n: int) -> SchemeConfig:
    if scheme == UNIFORM:
        return SchemeConfig(UNIFORM)
    return SchemeConfig(OPPORTUNISTIC, total_capacity=n * lam)


def staleness_point(config: ExperimentConfig, n: int, seed: int) -> dict:
    """One shared-nothing staleness run; pure given (config, n, seed)."""
    lam = resolve_lambda(config.scaling, config.lambda0, n)
    nodes = [NodeConfig(mu=config.mu, c=config.c, lam=lam, d=config.d_delay)] * n
    sim = Simulation(
        nodes,
        _scheme_config(config.scheme, lam, n),
        seed=seed,
        horizon=config.horizon,
        burn_in=config.burn_in,
    )
    result = sim.run()
    fixed_point, printed = thm2_lower_bound(lam, config.mu, config.c, n)
    stats = result.staleness
    return {
        "mode": "staleness",
        "scheme": config.scheme,
        "n": n,
        "scaling": config.scaling,
        "lambda0": config.lambda0,
        "mu": config.mu,
        "c": config.c,
        "seed": seed,
        "horizon": config.horizon,
        "burn_in": config.burn_in,
        "mean_staleness": stats.mean if stats else math.nan,
        "max_staleness": stats.max if stats else math.nan,
        "lemma1_bound": lemma1_bound(config.mu, lam, n),
        "thm2_fixed_point": fixed_point,
        "thm2_printed": printed,
    }


def run_staleness(config: ExperimentConfig) -> list[dict]:
    return [
        staleness_point(config, n, seed)
        for n in config.ns
        for seed in config.seeds
    ]


def training_point(config: ExperimentConfig, n: int, seed: int) -> list[dict]:
    """One training run; returns one row per epoch (epoch 0 = initial loss)."""
    # A single node never gossips, so the scaling law is moot there.
    lam = resolve_lambda(config.scaling, config.lambda0, n) if n >= 2 else config.lambda0
    m = config.resolve_m(n)
    spec = DatasetSpec(
        d=config.dim,
        m=m,
        samples_per_user=config.samples_per_user,
        label_noise_sd=config.label_noise_sd,
        normalize=config.normalize,
        seed=seed,
    )
    shards = build_shards(spec, n, config.predictor)
    X_full, y_full = full_dataset(shards)
    training = TrainingState(config.predictor, shards, config.hyper, seed)
    if config.dump_dataset:
        os.makedirs(config.out_dir, exist_ok=True)
        dump_csv(
            shards,
            os.path.join(config.out_dir, f"dataset_n{n}_seed{seed}.csv"),
        )

    base = {
        "mode": "train",
        "scheme": config.scheme,
        "n": n,
        "scaling": config.scaling,
        "lambda0": config.lambda0,
        "seed": seed,
        "predictor": config.predictor,
        "m": m,
    }
    rows: list[dict] = []

    def checkpoint(epoch: int, t: float) -> None:
        user_losses = all_user_losses(config.predictor, training.theta, X_full, y_full)
        rows.append(
            base
            | {
                "epoch": epoch,
                "mean_loss": float(np.mean(user_losses)),
                "max_loss": float(np.max(user_losses)),
                "sim_time": t,
                "diverged": training.any_diverged(),
            }
        )

    checkpoint(0, 0.0)
    nodes = [NodeConfig(mu=config.mu, c=config.c, lam=lam, d=config.d_delay)] * n
    sim = Simulation(
        nodes,
        _scheme_config(config.scheme, lam, n),
        seed=seed,
        horizon=math.inf,
        burn_in=0.0,
        training=training,
        max_updates=config.epochs * n,
        checkpoint=checkpoint,
    )
    sim.run()
    return rows


def run_training(config: ExperimentConfig) -> list[dict]:
    rows: list[dict] = []
    for n in config.ns:
        for seed in config.seeds:
            rows.extend(training_point(config, n, seed))
    return rows


def run_bounds(config: ExperimentConfig) -> list[dict]:
    rows = []
    for n in config.ns:
        lam = resolve_lambda(config.scaling, config.lambda0, n)
        h_exact, h_approx = harmonic(n - 1) if n >= 2 else (math.nan, math.nan)
        fixed_point, printed = thm2_lower_bound(lam, config.mu, config.c, n)
        rows.append(
            {
                "mode": "bounds",
                "n": n,
                "scaling": config.scaling,
                "lambda0": config.lambda0,
                "mu": config.mu,
                "c": config.c,
                "lambda_value": lam,
                "lemma1_bound": lemma1_bound(config.mu, lam, n),
                "harmonic_exact": h_exact,
                "harmonic_approx": h_approx,
                "thm2_fixed_point": fixed_point,
                "thm2_printed": printed,
            }
        )
    return rows


MODE_COLUMNS = {
    "staleness": STALENESS_COLUMNS,
    "train": TRAIN_COLUMNS,
    "bounds": BOUNDS_COLUMNS,
}
MODE_FILES = {
    "staleness": "staleness.csv",
    "train": "loss.csv",
    "bounds": "bounds.csv",
}


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):  # includes numpy scalars, which repr differently
        return repr(float(value))
    return str(value)


def emit_csv(rows: list[dict], path: str) -> None:
    """Write (or append to) a CSV with a stable column order.

    All rows must share one mode; appending to an existing file requires
    a matching header.
    """
    modes = {r["mode"] for r in rows}
    if len(modes) > 1:
        raise ConfigError(f"rows mix modes {sorted(modes)}")
    mode = rows[0]["mode"] if rows else None
    columns = MODE_COLUMNS[mode] if mode else None
    try:
        existing = None
        if os.path.exists(path) and os.path.getsize(path) > 0:
            with open(path, newline="") as fh:
                existing = fh.readline().strip().split(",")
            if columns is not None and existing != columns:
                raise ConfigError(f"{path}: existing header does not match {mode} schema")
        payload = []
        if existing is None:
            if columns is None:
                raise ConfigError(f"{path}: cannot write an empty CSV without a mode")
            payload.append(",".join(columns))
        for r in rows:
            payload.append(",".join(_fmt(r[c]) for c in columns))
        with open(path, "a", newline="") as fh:
            fh.write("\n".join(payload) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
    except OSError as exc:
        raise OSError(f"failed writing metrics CSV at {path}: {exc}") from exc


def write_header_only(mode: str, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(MODE_COLUMNS[mode]) + "\n")


def execute(config: ExperimentConfig) -> str:
    """Run the configured sweep and write its CSV; returns the output path."""
    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, MODE_FILES[config.mode])
    if config.mode == "staleness":
        rows = run_staleness(config)
    elif config.mode == "train":
        rows = run_training(config)
    elif config.mode == "bounds":
        rows = run_bounds(config)
    else:
        raise ConfigError(f"unknown mode {config.mode!r}")
    if rows:
        emit_csv(rows, path)
    elif not os.path.exists(path):
        write_header_only(config.mode, path)
    return path
