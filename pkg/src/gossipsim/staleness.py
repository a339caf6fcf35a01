"""Version/staleness bookkeeping and the closed-form staleness bounds.

The state is the n x n version matrix N, where N[i][j] is the latest
version of source i's model incorporated at node j.  Staleness is
S[i][j] = N[i][i] - N[i][j].  Both representations are maintained: a
self-update increments a row of S, a gossip merge takes an elementwise
column max of N / column min of S.

Time-average staleness accrues lazily: each pair carries the timestamp
of its last accrual, and only the touched row/column is brought up to
date at each event.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from gossipsim.errors import ConfigError, EstimationError, SimulationError

EULER_MASCHERONI = 0.5772156649


# Per-event kernels are jitted: they run a few million times per sweep and
# numpy's per-call overhead on small rows/columns dominates otherwise.


@njit(cache=True)
def _kernel_self_update(N, S, integral, smax, last, burn_in, i, t):
    n = S.shape[0]
    for j in range(n):
        lo = last[i, j]
        if lo < burn_in:
            lo = burn_in
        dt = t - lo
        if dt > 0.0:
            integral[i, j] += S[i, j] * dt
        last[i, j] = t
        if t > burn_in and S[i, j] > smax[i, j]:
            smax[i, j] = S[i, j]
        S[i, j] += 1.0
    S[i, i] = 0.0
    N[i, i] += 1


@njit(cache=True)
def _kernel_merge(N, S, integral, smax, last, burn_in, k, j, t):
    n = S.shape[0]
    for i in range(n):
        lo = last[i, j]
        if lo < burn_in:
            lo = burn_in
        dt = t - lo
        if dt > 0.0:
            integral[i, j] += S[i, j] * dt
        last[i, j] = t
        if t > burn_in and S[i, j] > smax[i, j]:
            smax[i, j] = S[i, j]
        if N[i, k] > N[i, j]:
            N[i, j] = N[i, k]
        if S[i, k] < S[i, j]:
            S[i, j] = S[i, k]


@njit(cache=True)
def _kernel_merge_source_row(N, S, integral, smax, last, burn_in, k, j, t):
    lo = last[k, j]
    if lo < burn_in:
        lo = burn_in
    dt = t - lo
    if dt > 0.0:
        integral[k, j] += S[k, j] * dt
    last[k, j] = t
    if t > burn_in and S[k, j] > smax[k, j]:
        smax[k, j] = S[k, j]
    N[k, j] = N[k, k]
    S[k, j] = 0.0


@njit(cache=True)
def _kernel_finalize(S, integral, smax, last, burn_in, t):
    n = S.shape[0]
    for i in range(n):
        for j in range(n):
            lo = last[i, j]
            if lo < burn_in:
                lo = burn_in
            dt = t - lo
            if dt > 0.0:
                integral[i, j] += S[i, j] * dt
            last[i, j] = t
            if t > burn_in and S[i, j] > smax[i, j]:
                smax[i, j] = S[i, j]


@dataclass
class StalenessStats:
    """Time-average staleness per pair plus network-level summaries."""

    per_pair: np.ndarray   # n x n, diagonal zero
    mean: float            # off-diagonal mean of time averages
    max: float             # largest staleness value observed post burn-in


class StalenessEngine:
    """Tracks N, S and the time-weighted staleness integrals for one run."""

    def __init__(self, n: int, burn_in: float = 0.0, start: float = 0.0):
        if n < 1:
            raise ConfigError(f"need at least one node, got n={n}")
        self.n = n
        self.burn_in = burn_in
        self.start = start
        self.N = np.zeros((n, n), dtype=np.int64)
        self.S = np.zeros((n, n), dtype=np.float64)
        self.integral = np.zeros((n, n), dtype=np.float64)
        self.smax = np.zeros((n, n), dtype=np.float64)
        self.last = np.full((n, n), start, dtype=np.float64)
        self.final_time: float | None = None

    # -- event hooks ----------------------------------------------------

    def record_self_update(self, i: int, t: float) -> None:
        """Source i finished an SGD update: N[i][i] += 1, row i staler by 1.

        Row i's staleness integrals accrue over the interval since each
        pair's last accrual (clipped to post burn-in) before the bump.
        """
        _kernel_self_update(
            self.N, self.S, self.integral, self.smax, self.last, self.burn_in, i, t
        )

    def merge_on_gossip(self, k: int, j: int, t: float) -> None:
        """Node j received node k's model: column max on N, column min on S."""
        if k == j:
            raise SimulationError(f"node {k} cannot gossip to itself")
        _kernel_merge(
            self.N, self.S, self.integral, self.smax, self.last, self.burn_in, k, j, t
        )

    def merge_source_row(self, k: int, j: int, t: float) -> None:
        """Node j received sender k's own freshest version only.

        Used by the opportunistic scheme's staleness accounting: the
        transmitting node is the most recent self-updater, so the pair
        (k, j) resets to zero, and no other source's version is relayed.
        """
        if k == j:
            raise SimulationError(f"node {k} cannot gossip to itself")
        _kernel_merge_source_row(
            self.N, self.S, self.integral, self.smax, self.last, self.burn_in, k, j, t
        )

    def finalize(self, t: float) -> None:
        """Accrue every pair up to the end of the run."""
        _kernel_finalize(self.S, self.integral, self.smax, self.last, self.burn_in, t)
        self.final_time = t

    # -- statistics -----------------------------------------------------

    def time_average(self) -> StalenessStats:
        if self.final_time is None:
            raise EstimationError("finalize() must run before time_average()")
        elapsed = self.final_time - max(self.burn_in, self.start)
        if elapsed <= 0:
            raise EstimationError(
                f"horizon {self.final_time} does not exceed burn-in {self.burn_in}"
            )
        per_pair = self.integral / elapsed
        off_diag = ~np.eye(self.n, dtype=bool)
        mean = float(per_pair[off_diag].mean()) if self.n > 1 else 0.0
        smax = float(self.smax[off_diag].max()) if self.n > 1 else 0.0
        return StalenessStats(per_pair=per_pair, mean=mean, max=smax)


# -- closed-form bounds ---------------------------------------------------


def harmonic(n: int) -> tuple[float, float]:
    """Exact harmonic number H_n and its log(n) + gamma approximation."""
    if n < 1:
        raise ConfigError(f"harmonic number needs n >= 1, got {n}")
    exact = float(np.sum(1.0 / np.arange(1, n + 1)))
    approx = math.log(n) + EULER_MASCHERONI
    return exact, approx


def lemma1_bound(mu_i: float, lambda_min: float, n: int) -> float:
    """Upper bound on steady-state expected staleness: (mu_i/lambda_min) H_{n-1}."""
    if n < 2:
        raise ConfigError(f"bound needs n >= 2, got {n}")
    if mu_i <= 0 or lambda_min <= 0:
        raise ConfigError("rates must be positive")
    h, _ = harmonic(n - 1)
    return (mu_i / lambda_min) * h


def thm2_lower_bound(
    lambda_max: float, mu_min: float, c_max: float, n: int
) -> tuple[float, float]:
    """Lower bounds on staleness under the opportunistic (freshest-sender) scheme.

    Returns (fixed_point, printed): fixed_point is q/(1-q) with
    q = exp(-(lambda_max/n)(c_max + 1/mu_min)), the fixed point of the
    recursion E[S_{k+1}] >= (E[S_k] + 1) q from S_0 = 0; printed is the
    displayed form 1/(1 - exp(-lambda_max/(n mu_min))).  The two differ
    (factor q; c_max absent from the printed exponent), so both are
    reported.
    """
    if n < 2:
        raise ConfigError(f"bound needs n >= 2, got {n}")
    if lambda_max <= 0 or mu_min <= 0:
        raise ConfigError("rates must be positive")
    if c_max < 0:
        raise ConfigError("c_max must be non-negative")
    q = math.exp(-(lambda_max / n) * (c_max + 1.0 / mu_min))
    if q >= 1.0:
        raise SimulationError(f"q={q} >= 1 is impossible for positive rates")
    fixed_point = q / (1.0 - q)
    printed = 1.0 / (1.0 - math.exp(-lambda_max / (n * mu_min)))
    return fixed_point, printed


@dataclass(frozen=True)
class BoundReport:
    """All closed-form bound values for one (n, rates) configuration."""

    n: int
    lemma1_upper: float
    thm2_fixed_point: float
    thm2_printed: float
    harmonic_exact: float
    harmonic_approx: float


def bound_report(
    n: int, mu: float, lambda_min: float, lambda_max: float, c_max: float
) -> BoundReport:
    fixed_point, printed = thm2_lower_bound(lambda_max, mu, c_max, n)
    h_exact, h_approx = harmonic(n - 1)
    return BoundReport(
        n=n,
        lemma1_upper=lemma1_bound(mu, lambda_min, n),
        thm2_fixed_point=fixed_point,
        thm2_printed=printed,
        harmonic_exact=h_exact,
        harmonic_approx=h_approx,
    )
