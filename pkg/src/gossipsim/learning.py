"""Per-node model math: predictors, squared loss, gradients, SGD, mixing.

Two predictor kinds:
  linear:   f(x, theta) = x . theta            (any d)
  bilinear: f(x, theta) = t1*x1 + t1*t2*x2     (d = 2)

The bilinear gradient follows the chain rule for the stated f:
df/dt1 = x1 + t2*x2, df/dt2 = t1*x2.
"""

from dataclasses import dataclass

import numpy as np

from gossipsim.errors import ConfigError, DivergenceError

LINEAR = "linear"
BILINEAR = "bilinear"


@dataclass(frozen=True)
class HyperParams:
    alpha: float = 0.01   # learning rate per SGD step
    tau: int = 1          # SGD steps per update event
    batch: int = 32       # mini-batch size, capped at shard size
    decay: bool = False   # alpha / sqrt(step) schedule instead of constant

    def __post_init__(self):
        if self.alpha < 0:
            raise ConfigError("learning rate must be >= 0")
        if self.tau < 1 or self.batch < 1:
            raise ConfigError("tau and batch must be >= 1")

    def rate_at(self, step: int) -> float:
        """Step is 1-based across a node's whole training history."""
        if self.decay:
            return self.alpha / np.sqrt(step)
        return self.alpha


def check_kind(kind: str, d: int) -> None:
    if kind not in (LINEAR, BILINEAR):
        raise ConfigError(f"unknown predictor kind {kind!r}")
    if kind == BILINEAR and d != 2:
        raise ConfigError(f"bilinear predictor needs d=2, got d={d}")


def predict(kind: str, theta: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Model output for a batch X (rows are samples); a 1-d x also works."""
    X = np.atleast_2d(X)
    if X.shape[1] != theta.shape[0]:
        raise ConfigError(
            f"dimension mismatch: x has {X.shape[1]} features, theta has {theta.shape[0]}"
        )
    check_kind(kind, theta.shape[0])
    if kind == LINEAR:
        out = X @ theta
    else:
        out = theta[0] * X[:, 0] + theta[0] * theta[1] * X[:, 1]
    return out


def loss(kind: str, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    """Mean squared residual over the given set."""
    if len(y) == 0:
        raise ConfigError("loss over an empty dataset is undefined")
    r = predict(kind, theta, X) - y
    return float(np.mean(r * r))


def gradient(kind: str, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient of the mean squared loss over the batch."""
    if len(y) == 0:
        raise ConfigError("gradient over an empty batch is undefined")
    X = np.atleast_2d(X)
    r = predict(kind, theta, X) - y
    if kind == LINEAR:
        return (2.0 / len(y)) * (X.T @ r)
    df1 = X[:, 0] + theta[1] * X[:, 1]
    df2 = theta[0] * X[:, 1]
    return np.array(
        [np.mean(2.0 * r * df1), np.mean(2.0 * r * df2)], dtype=np.float64
    )


def local_update(
    kind: str,
    theta: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    hyper: HyperParams,
    stream: np.random.Generator,
    base_step: int = 0,
) -> np.ndarray:
    """Run tau SGD steps from the snapshot theta and return the result.

    The caller applies the delta (result - theta) to whatever the node's
    parameters are when the computation finishes, so mixes that land
    between snapshot and apply are preserved.  Mini-batches are drawn
    uniformly with replacement.  base_step is the node's SGD step count
    before this update (drives the optional decay schedule).
    """
    if len(y) == 0:
        raise ConfigError("cannot update on an empty shard")
    theta = np.array(theta, dtype=np.float64, copy=True)
    bsize = min(hyper.batch, len(y))
    with np.errstate(over="ignore", invalid="ignore"):  # divergence is caught below
        for s in range(hyper.tau):
            idx = stream.integers(0, len(y), size=bsize)
            g = gradient(kind, theta, X[idx], y[idx])
            theta -= hyper.rate_at(base_step + s + 1) * g
    if not np.all(np.isfinite(theta)):
        raise DivergenceError("local update produced non-finite parameters")
    return theta


def mix(
    theta_i: np.ndarray,
    theta_j: np.ndarray,
    stream: np.random.Generator,
    beta: float | None = None,
) -> np.ndarray:
    """Receiver-side mixing: beta*theta_i + (1-beta)*theta_j, beta ~ U(0,1).

    theta_i is the receiver's model; the sender is never modified.  beta
    may be forced for tests.
    """
    if theta_i.shape != theta_j.shape:
        raise ConfigError("cannot mix models of different dimension")
    if beta is None:
        beta = stream.random()
    return beta * theta_i + (1.0 - beta) * theta_j
