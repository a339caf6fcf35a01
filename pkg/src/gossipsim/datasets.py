"""Synthetic regression data: Gaussian-mixture features, m distributions, n shards.

Each distribution l has a ground-truth vector w*_l with i.i.d. Uniform[0,1]
components.  Features are drawn from
  0.5 N(+(1.5/d) w*_l, I_d) + 0.5 N(-(1.5/d) w*_l, I_d)
and labels are y = f(x, w*_l) for the active predictor, plus optional
Gaussian label noise.  Users get equal-size shards, distribution
assignment is round-robin (user i -> l = i mod m).
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from gossipsim.errors import ConfigError
from gossipsim.learning import predict
from gossipsim.rng import make_stream


@dataclass(frozen=True)
class DatasetSpec:
    d: int
    m: int
    samples_per_user: int = 200
    label_noise_sd: float = 0.0
    normalize: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.d < 1 or self.m < 1 or self.samples_per_user < 1:
            raise ConfigError("d, m and samples_per_user must be >= 1")
        if self.label_noise_sd < 0:
            raise ConfigError("label_noise_sd must be >= 0")


@dataclass
class Shard:
    owner: int
    dist_id: int
    X: np.ndarray
    y: np.ndarray = field(repr=False)


def sample_w_star(ell: int, d: int, seed: int) -> np.ndarray:
    """Ground-truth vector for distribution ell; fixed given (seed, ell)."""
    stream = make_stream(seed, ell, "wstar")
    return stream.random(d)


def sample_point(
    w_star: np.ndarray,
    mixture_stream: np.random.Generator,
    kind: str,
    noise_stream: np.random.Generator | None = None,
    label_noise_sd: float = 0.0,
) -> tuple[np.ndarray, float]:
    """One (x, y) draw from the two-component Gaussian mixture."""
    d = w_star.shape[0]
    sign = 1.0 if mixture_stream.random() < 0.5 else -1.0
    x = sign * (1.5 / d) * w_star + mixture_stream.standard_normal(d)
    y = float(predict(kind, w_star, x)[0])
    if label_noise_sd > 0:
        y += label_noise_sd * noise_stream.standard_normal()
    return x, y


def build_shards(spec: DatasetSpec, n: int, kind: str) -> list[Shard]:
    """Generate the n equal shards; bit-identical for identical specs."""
    if spec.m > n:
        raise ConfigError(f"m={spec.m} distributions cannot exceed n={n} users")
    w_stars = [sample_w_star(ell, spec.d, spec.seed) for ell in range(spec.m)]
    shards = []
    for i in range(n):
        ell = i % spec.m
        w = w_stars[ell]
        mixture = make_stream(spec.seed, i, "mixture")
        noise = make_stream(spec.seed, i, "noise") if spec.label_noise_sd > 0 else None
        signs = np.where(mixture.random(spec.samples_per_user) < 0.5, 1.0, -1.0)
        X = signs[:, None] * (1.5 / spec.d) * w + mixture.standard_normal(
            (spec.samples_per_user, spec.d)
        )
        y = predict(kind, w, X)
        if spec.label_noise_sd > 0:
            y = y + spec.label_noise_sd * noise.standard_normal(spec.samples_per_user)
        shards.append(Shard(owner=i, dist_id=ell, X=X, y=np.asarray(y)))
    if spec.normalize:
        # One global scalar on X and y together, so y = f(x, w*) still holds
        # (both predictors are linear in x).
        scale = 1.0 / max(float(np.linalg.norm(s.X, axis=1).max()) for s in shards)
        for s in shards:
            s.X = s.X * scale
            s.y = s.y * scale
    return shards


def full_dataset(shards: list[Shard]) -> tuple[np.ndarray, np.ndarray]:
    X = np.vstack([s.X for s in shards])
    y = np.concatenate([s.y for s in shards])
    return X, y


def dump_csv(shards: list[Shard], path) -> None:
    """Write all shards, in owner order, as dist_id, x_1..x_d, y rows."""
    d = shards[0].X.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dist_id"] + [f"x_{k + 1}" for k in range(d)] + ["y"])
        for s in shards:
            for x, y in zip(s.X, s.y):
                # repr of a plain float round-trips exactly (numpy scalars don't)
                writer.writerow(
                    [s.dist_id] + [repr(float(v)) for v in x] + [repr(float(y))]
                )


def load_csv(path, n: int) -> list[Shard]:
    """Regroup a dump into n equal shards (rows were written in owner order)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    if len(rows) % n != 0:
        raise ConfigError(f"{len(rows)} rows do not split into {n} equal shards")
    per = len(rows) // n
    shards = []
    for i in range(n):
        chunk = rows[i * per : (i + 1) * per]
        shards.append(
            Shard(
                owner=i,
                dist_id=int(chunk[0][0]),
                X=np.array([[float(v) for v in r[1:-1]] for r in chunk]),
                y=np.array([float(r[-1]) for r in chunk]),
            )
        )
    return shards
