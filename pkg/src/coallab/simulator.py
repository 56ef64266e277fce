"""Samplers for the block-count jump chain and external-branch functionals.

Replicate ``i`` of a run with master seed ``s`` always uses the streams
named by ``SeedSpec(s, i)``, so batches are reproducible whatever the
number of workers.  The lean sampler never tracks partitions: by
exchangeability, individual 1 takes part in a collision that merges
``X + 1`` of ``Y`` blocks with probability ``(X + 1) / Y``.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as gamma_fn

from . import _kernels as K
from . import measures as M
from .errors import OutOfRange, TooLarge, UnsortedTimes
from .rates import RateTable, rate_table
from .rng import SeedSpec, as_u64

FULL_PARTITION_MAX_N = 12
CHUNK = 4096


@dataclass(frozen=True)
class JumpChainPath:
    """``y[0] = n > y[1] > ... > y[tau] = 1``; ``x[i-1]`` and ``waits[i-1]``
    belong to collision ``i``."""

    n: int
    y: np.ndarray
    x: np.ndarray
    waits: np.ndarray

    @property
    def tau(self) -> int:
        return len(self.x)

    @property
    def jump_times(self) -> np.ndarray:
        """A_0 = 0, A_1, ..., A_tau."""
        return np.concatenate([[0.0], np.cumsum(self.waits)])


@dataclass(frozen=True)
class ExternalBranchSample:
    sigma: int
    t_len: float
    tau: int
    y_at_sigma: int


@dataclass(frozen=True)
class ExternalBranchBatch:
    """Replicates ``first .. first + len - 1`` as parallel arrays.

    ``tau`` is -1 throughout when the walks were stopped at sigma.
    """

    n: int
    first: int
    sigma: np.ndarray
    t_len: np.ndarray
    tau: np.ndarray
    y_at_sigma: np.ndarray

    def __len__(self) -> int:
        return len(self.sigma)

    def __getitem__(self, i: int) -> ExternalBranchSample:
        return ExternalBranchSample(int(self.sigma[i]), float(self.t_len[i]),
                                    int(self.tau[i]), int(self.y_at_sigma[i]))


# -- worker plumbing ------------------------------------------------------

def resolve_workers(workers: int | None = None) -> int:
    """Explicit argument, then ``COALLAB_WORKERS``, then the CPU count."""
    if workers is None:
        env = os.environ.get("COALLAB_WORKERS")
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def _table_for(measure_cfg: dict, n_max: int) -> RateTable:
    return rate_table(M.from_config(measure_cfg), n_max)


def _dispatch(what, table: RateTable, n, master, start, count, extra):
    kind, a, bb, g, lam2, pmf, ratio = table.kernel_args()
    start = as_u64(start)
    if what == "external":
        return K.external_branch_batch(master, start, count, n, kind, a, bb, g,
                                       lam2, pmf, extra)
    if what == "cox":
        return (K.cox_batch(master, start, count, n, kind, a, bb, g, lam2, pmf,
                            ratio),)
    if what == "partition":
        return K.full_partition_batch(master, start, count, n, kind, a, bb, g,
                                      lam2, pmf)
    raise ValueError(what)


def _run_chunk(job):
    what, cfg, n_max, n, master, start, count, extra = job
    return _dispatch(what, _table_for(cfg, n_max), n, master, start, count, extra)


def _fan_out(what, table: RateTable, n, seed, replicates, extra=None,
             workers=None, first=0):
    master = as_u64(seed)
    spans = [(first + s, min(CHUNK, replicates - s))
             for s in range(0, replicates, CHUNK)]
    workers = resolve_workers(workers)
    if workers == 1 or len(spans) == 1:
        results = [_dispatch(what, table, n, master, start, count, extra)
                   for start, count in spans]
    else:
        cfg = table.measure.to_config()
        jobs = [(what, cfg, table.n_max, n, master, start, count, extra)
                for start, count in spans]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, jobs))
    return [np.concatenate(parts) for parts in zip(*results)]


def _check_n(table: RateTable, n: int) -> None:
    if n < 2:
        raise OutOfRange(f"sample size must be at least 2, got {n}")
    if n > table.n_max:
        raise OutOfRange(f"n={n} exceeds the rate table's n_max={table.n_max}")


# -- samplers ---------------------------------------------------------------

def sample_first_jump(table: RateTable, b: int, rng: np.ndarray,
                      size: int | None = None):
    """Blocks lost at one collision from ``b`` blocks.

    ``rng`` is a stream state such as ``SeedSpec(...).streams()[0]``; it is
    advanced in place.
    """
    if not 2 <= b <= table.n_max:
        raise OutOfRange(f"block count {b} outside [2, {table.n_max}]")
    kind, a, bb, g, lam2, pmf, _ = table.kernel_args()
    out = K.first_jump_batch(rng, 1 if size is None else size, b, kind, a, bb,
                             g, lam2, pmf)
    return int(out[0]) if size is None else out


def simulate_jump_chain(table: RateTable, n: int, seed: SeedSpec) -> JumpChainPath:
    _check_n(table, n)
    chain, _ = seed.streams()
    y = np.empty(n + 1, np.int64)
    x = np.zeros(n + 1, np.int64)
    w = np.zeros(n + 1, np.float64)
    tau = K.chain_path(chain, n, *_rate_args(table), y, x, w)
    return JumpChainPath(n, y[:tau + 1].copy(), x[1:tau + 1].copy(),
                         w[1:tau + 1].copy())


def _rate_args(table):
    kind, a, bb, g, lam2, pmf, _ = table.kernel_args()
    return kind, a, bb, g, lam2, pmf


def external_branch(table: RateTable, n: int, seed: SeedSpec) -> ExternalBranchSample:
    _check_n(table, n)
    chain, aux = seed.streams()
    return ExternalBranchSample(*(int(v) if i != 1 else float(v) for i, v in
                                  enumerate(K.external_branch_one(
                                      chain, aux, n, *_rate_args(table), True))))


def external_branch_batch(table: RateTable, n: int, seed: int, replicates: int,
                          full: bool = True, workers: int | None = None,
                          first: int = 0) -> ExternalBranchBatch:
    """Replicates ``first .. first+replicates-1`` of :func:`external_branch`.

    ``full=False`` stops each walk at sigma (tau is then reported as -1),
    which is all the sigma/T statistics need.
    """
    _check_n(table, n)
    sig, tl, tau, ys = _fan_out("external", table, n, seed, replicates,
                                bool(full), workers, first)
    return ExternalBranchBatch(n, first, sig, tl, tau, ys)


def cox_external_branch(table: RateTable, n: int, seed: SeedSpec) -> float:
    _check_n(table, n)
    chain, aux = seed.streams()
    kind, a, bb, g, lam2, pmf, ratio = table.kernel_args()
    return float(K.cox_one(chain, aux, n, kind, a, bb, g, lam2, pmf, ratio))


def cox_batch(table: RateTable, n: int, seed: int, replicates: int,
              workers: int | None = None, first: int = 0) -> np.ndarray:
    _check_n(table, n)
    (out,) = _fan_out("cox", table, n, seed, replicates, None, workers, first)
    return out


def full_partition_simulate(table: RateTable, n: int, seed: SeedSpec
                            ) -> tuple[ExternalBranchSample, JumpChainPath]:
    """Explicit-partition oracle for small ``n`` (at most 12)."""
    if n > FULL_PARTITION_MAX_N:
        raise TooLarge(f"full partition simulation supports n <= "
                       f"{FULL_PARTITION_MAX_N}, got {n}")
    _check_n(table, n)
    chain, aux = seed.streams()
    y = np.empty(n + 1, np.int64)
    x = np.zeros(n + 1, np.int64)
    w = np.zeros(n + 1, np.float64)
    sigma, t, tau, ysig = K.full_partition_one(chain, aux, n, *_rate_args(table),
                                               y, x, w)
    path = JumpChainPath(n, y[:tau + 1].copy(), x[1:tau + 1].copy(),
                         w[1:tau + 1].copy())
    return ExternalBranchSample(int(sigma), float(t), int(tau), int(ysig)), path


def full_partition_batch(table: RateTable, n: int, seed: int, replicates: int,
                         workers: int | None = None,
                         first: int = 0) -> ExternalBranchBatch:
    if n > FULL_PARTITION_MAX_N:
        raise TooLarge(f"full partition simulation supports n <= "
                       f"{FULL_PARTITION_MAX_N}, got {n}")
    _check_n(table, n)
    sig, tl, tau, ys = _fan_out("partition", table, n, seed, replicates, None,
                                workers, first)
    return ExternalBranchBatch(n, first, sig, tl, tau, ys)


def type1_probability_range(table: RateTable, n: int) -> tuple[float, float]:
    """Range of 1 - lambda_{b+1,k}/lambda_{b,k} over 2 <= k <= b < n.

    Every value must lie in [0, 1] for the Cox construction to make sense.
    """
    _check_n(table, n)
    kind, a, bb, _, _, _, ratio = table.kernel_args()
    return K.type1_check(kind, a, bb, n, ratio)


# -- path functionals -------------------------------------------------------

def block_count_at(path: JumpChainPath, times) -> np.ndarray:
    """R(t) on the given ascending times (right-continuous, 1 after the root)."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1:
        t = t.reshape(-1)
    if len(t) > 1 and np.any(np.diff(t) < 0):
        raise UnsortedTimes("times must be sorted ascending")
    done = np.searchsorted(path.jump_times[1:], t, side="right")
    return path.y[done]


def jump_time(path: JumpChainPath, k: int) -> float:
    """A_k, the time at which the k-th collision happens."""
    if not 0 <= k <= path.tau:
        raise OutOfRange(f"k must lie in [0, {path.tau}]")
    return float(path.waits[:k].sum())


def jump_time_mean_field(path: JumpChainPath, table: RateTable, k: int) -> float:
    """A~_k: holding times replaced by their conditional means 1/g."""
    if not 0 <= k <= path.tau:
        raise OutOfRange(f"k must lie in [0, {path.tau}]")
    return float((1.0 / table.g[path.y[:k]]).sum())


def jump_time_power_law(path: JumpChainPath, c0: float, alpha: float,
                        k: int) -> float:
    """A^_k: 1/g_b replaced by (c0 Gamma(2-alpha))^-1 b^-alpha."""
    if not 0 <= k <= path.tau:
        raise OutOfRange(f"k must lie in [0, {path.tau}]")
    scale = c0 * gamma_fn(2.0 - alpha)
    return float(np.power(path.y[:k].astype(float), -alpha).sum() / scale)


def exact_sigma_law(table: RateTable, n: int):
    """Exact joint law of (sigma, Y_sigma) and E[T] by dynamic programming.

    Propagates P(Y_i = y, individual 1 still single) over collisions; an
    oracle independent of every sampler above.  Returns ``(law, mean_t)``
    where ``law[(s, y)]`` is P(sigma = s, Y_sigma = y).
    """
    _check_n(table, n)
    laws = {b: table.first_jump_law(b) for b in range(2, n + 1)}
    alive = {n: 1.0}
    law: dict[tuple[int, int], float] = {}
    mean_t = 0.0
    step = 0
    while alive:
        step += 1
        nxt: dict[int, float] = {}
        for b, p in alive.items():
            mean_t += p / table.g[b]
            for k, q in laws[b].as_dict().items():
                absorbed = (k + 1) / b
                if absorbed > 0:
                    key = (step, b - k)
                    law[key] = law.get(key, 0.0) + p * q * absorbed
                if absorbed < 1:
                    nxt[b - k] = nxt.get(b - k, 0.0) + p * q * (1 - absorbed)
        alive = {b: p for b, p in nxt.items() if p > 0 and b > 1}
    return law, mean_t
