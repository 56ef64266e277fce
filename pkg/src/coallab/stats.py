"""Monte Carlo verification of the limit theorems.

Each verifier draws replicates through :mod:`coallab.simulator`, compares
them with a closed-form law from :mod:`coallab.limits` and returns an
immutable :class:`VerificationReport`.  Verifiers are deterministic in
``(measure, n, replicates, seed)`` whatever the worker count.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from scipy.stats import chi2, chi2_contingency

from . import limits as L
from . import measures as M
from . import simulator as S
from .errors import EmptySample, HypothesisUnavailable
from .rates import rate_table
from .rng import SeedSpec


class Theorem(str, Enum):
    SIGMA = "Sigma31"
    TLEN = "TLen52"
    BLOCK = "Block43"
    BLOCK_KINGMAN = "BlockKingman44"
    COX = "CoxEquivalence"
    SMALL_N = "SmallNOracle"
    TAU_OVER_N = "TauOverN"
    SIGMA_OVER_TAU = "SigmaOverTau"
    Y_SIGMA = "YSigma53"


KS_TOLERANCE = 0.02
BLOCK_EPS = 0.03
BLOCK_COVERAGE = 0.95
BLOCK_GRID = 512
SIGNIFICANCE = 1e-3

MODES = ("auto", "beta", "kingman", "bs", "finite")


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one check; ``passed`` is ``statistic <= threshold``.

    ``ecdf_grid`` holds ``(value, empirical, reference)`` at each distinct
    sample value, enough to recompute a KS statistic exactly.
    """

    theorem: Theorem
    n: int
    replicates: int
    seed: int
    statistic: float
    threshold: float
    passed: bool
    measure: dict = field(default_factory=dict)
    mode: str = "beta"
    degenerate: bool = False
    details: dict = field(default_factory=dict)
    ecdf_grid: tuple | None = field(default=None, repr=False)

    def to_dict(self, with_grid: bool = False) -> dict:
        out = asdict(self)
        out["theorem"] = self.theorem.value
        if with_grid and self.ecdf_grid is not None:
            out["ecdf_grid"] = [list(row) for row in zip(*self.ecdf_grid)]
        else:
            out.pop("ecdf_grid")
        return out

    def to_json(self, with_grid: bool = False) -> str:
        return json.dumps(self.to_dict(with_grid), indent=2)

    def write_ecdf_csv(self, path) -> None:
        if self.ecdf_grid is None:
            raise ValueError("report carries no ECDF grid")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["value", "empirical_cdf", "analytic_cdf"])
            for v, e, f in zip(*self.ecdf_grid):
                w.writerow([repr(float(v)), repr(float(e)), repr(float(f))])


def _report(theorem, n, replicates, seed, statistic, threshold, measure,
            mode="beta", degenerate=False, details=None, grid=None):
    statistic = float(statistic)
    threshold = float(threshold)
    return VerificationReport(
        theorem=theorem, n=int(n), replicates=int(replicates), seed=int(seed),
        statistic=statistic, threshold=threshold,
        passed=bool(statistic <= threshold), measure=measure.to_config(),
        mode=mode, degenerate=bool(degenerate), details=details or {},
        ecdf_grid=grid)


# -- Kolmogorov-Smirnov ----------------------------------------------------

def ecdf_grid(samples, cdf):
    """Distinct sorted values with their empirical and reference cdf."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise EmptySample("no samples")
    values, counts = np.unique(x, return_counts=True)
    emp = np.cumsum(counts) / x.size
    return values, emp, np.asarray(cdf(values), dtype=float)


def ks_from_grid(values, emp, ref) -> float:
    """sup |F_m - F|, using the left limit of F_m at each jump as well."""
    emp = np.asarray(emp)
    ref = np.asarray(ref)
    before = np.concatenate([[0.0], emp[:-1]])
    return float(max(np.abs(emp - ref).max(), np.abs(before - ref).max()))


def ks_one_sample(samples, law) -> float:
    """One-sample KS distance between ``samples`` and a law's cdf."""
    cdf = law.cdf if hasattr(law, "cdf") else law
    return ks_from_grid(*ecdf_grid(samples, cdf))


def ks_two_sample(a, b) -> float:
    """sup |F_a - F_b| over the pooled sample."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise EmptySample("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.abs(fa - fb).max())


def ks_critical_two_sample(m: int, k: int, significance: float = SIGNIFICANCE
                           ) -> float:
    """Asymptotic two-sample KS critical value sqrt(-ln(s/2)/2) sqrt(1/m + 1/k)."""
    c = math.sqrt(-math.log(significance / 2.0) / 2.0)
    return c * math.sqrt((m + k) / (m * k))


# -- regimes ---------------------------------------------------------------

def _is_bs(measure) -> bool:
    return measure.kind == M.BETA and measure.a == 1.0 and measure.b == 1.0


def resolve_mode(measure, mode: str = "auto") -> str:
    """Pick the limit regime; ``auto`` only accepts the regularly varying class."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
    if mode == "auto":
        mode = "beta"
    if mode == "beta" and not (measure.hypothesis_ok and measure.alpha
                               and 1.0 < measure.alpha < 2.0):
        raise HypothesisUnavailable(
            f"{measure.label()} is outside the regularly varying class; pass "
            "an explicit mode (kingman, bs, finite) for the classical limits")
    if mode == "kingman" and not measure.is_kingman:
        raise HypothesisUnavailable("kingman mode needs the Kingman measure")
    if mode == "bs" and not _is_bs(measure):
        raise HypothesisUnavailable("bs mode needs Beta(1, 1)")
    if mode == "finite" and not math.isfinite(M.mu_minus(measure, 1)):
        raise HypothesisUnavailable(
            f"{measure.label()} has an infinite first negative moment")
    return mode


def _sigma_scaled(measure, mode, n, sigma):
    sigma = np.asarray(sigma, dtype=float)
    if mode == "beta":
        return sigma / (n * (measure.alpha - 1.0)), L.sigma_limit(measure.alpha)
    if mode == "kingman":
        return sigma / n, L.kingman_sigma_limit()
    if mode == "bs":
        return sigma * math.log(n) / n, L.bs_sigma_limit()
    raise HypothesisUnavailable(f"no sigma limit for mode {mode!r}")


def _tlen_scaled(measure, mode, n, t):
    t = np.asarray(t, dtype=float)
    if mode == "beta":
        return (t * n ** (measure.alpha - 1.0),
                L.t_limit(measure.alpha, measure.c0))
    if mode == "kingman":
        return t * n, L.kingman_t_limit()
    if mode == "bs":
        return t * math.log(n), L.bs_t_limit()
    return t, L.exp_limit(M.mu_minus(measure, 1))


# -- verifiers -------------------------------------------------------------

def verify_sigma(measure, n, replicates, seed, mode="auto",
                 threshold=KS_TOLERANCE, workers=None) -> VerificationReport:
    """KS of the rescaled collision index sigma against its limit law."""
    mode = resolve_mode(measure, mode)
    table = rate_table(measure, n)
    batch = S.external_branch_batch(table, n, seed, replicates, full=False,
                                    workers=workers)
    scaled, law = _sigma_scaled(measure, mode, n, batch.sigma)
    grid = ecdf_grid(scaled, law.cdf)
    return _report(Theorem.SIGMA, n, replicates, seed, ks_from_grid(*grid),
                   threshold, measure, mode, degenerate=(n == 2),
                   details={"law": law.name}, grid=grid)


def sample_tlen(measure, n, replicates, seed, sampler="direct", workers=None,
                first=0) -> np.ndarray:
    table = rate_table(measure, n)
    if sampler == "direct":
        return S.external_branch_batch(table, n, seed, replicates, full=False,
                                       workers=workers, first=first).t_len
    if sampler == "cox":
        return S.cox_batch(table, n, seed, replicates, workers=workers,
                           first=first)
    raise ValueError(f"unknown sampler {sampler!r}")


def verify_tlen(measure, n, replicates, seed, sampler="direct", mode="auto",
                threshold=KS_TOLERANCE, workers=None) -> VerificationReport:
    """KS of the rescaled external branch length against its limit law."""
    mode = resolve_mode(measure, mode)
    t = sample_tlen(measure, n, replicates, seed, sampler, workers)
    scaled, law = _tlen_scaled(measure, mode, n, t)
    grid = ecdf_grid(scaled, law.cdf)
    return _report(Theorem.TLEN, n, replicates, seed, ks_from_grid(*grid),
                   threshold, measure, mode,
                   details={"law": law.name, "sampler": sampler}, grid=grid)


def verify_cox(measure, n, replicates, seed, significance=SIGNIFICANCE,
               workers=None) -> VerificationReport:
    """Two-sample KS between the direct and Cox samplers of T.

    The Cox sample uses replicate indices ``replicates .. 2*replicates-1``
    so the two samples are independent.
    """
    direct = sample_tlen(measure, n, replicates, seed, "direct", workers)
    cox = sample_tlen(measure, n, replicates, seed, "cox", workers,
                      first=replicates)
    crit = ks_critical_two_sample(replicates, replicates, significance)
    values = np.unique(np.concatenate([direct, cox]))
    fa = np.searchsorted(np.sort(direct), values, side="right") / replicates
    fb = np.searchsorted(np.sort(cox), values, side="right") / replicates
    mode = "beta" if measure.hypothesis_ok else "any"
    return _report(Theorem.COX, n, replicates, seed, ks_two_sample(direct, cox),
                   crit, measure, mode, details={"significance": significance},
                   grid=(values, fa, fb))


def block_deviation(path, measure, mode, t_grid) -> float:
    """sup over ``t_grid`` of |R(t s_n)/n - limit(t)| for one path."""
    n = path.n
    if mode == "kingman":
        scale, ref = 1.0 / n, L.kingman_block_limit(t_grid)
    else:
        scale = n ** (1.0 - measure.alpha)
        ref = L.block_limit(measure.alpha, measure.c0, t_grid)
    r = S.block_count_at(path, t_grid * scale)
    return float(np.abs(r / n - ref).max())


def verify_blockcount(measure, n, t_max, grid_points=BLOCK_GRID,
                      replicates=100, seed=0, eps=BLOCK_EPS,
                      coverage=BLOCK_COVERAGE) -> VerificationReport:
    """Fraction of paths whose rescaled block count strays more than ``eps``.

    Passes when that fraction is at most ``1 - coverage``.
    """
    if measure.is_kingman:
        mode, theorem = "kingman", Theorem.BLOCK_KINGMAN
    else:
        mode, theorem = resolve_mode(measure, "auto"), Theorem.BLOCK
    table = rate_table(measure, n)
    t_grid = np.linspace(0.0, t_max, grid_points)
    sups = np.array([block_deviation(
        S.simulate_jump_chain(table, n, SeedSpec(seed, i)), measure, mode,
        t_grid) for i in range(replicates)])
    bad = int((sups > eps).sum())
    return _report(theorem, n, replicates, seed, bad / replicates,
                   1.0 - coverage + 1e-12, measure, mode,
                   details={"eps": eps, "t_max": t_max,
                            "grid_points": grid_points,
                            "within_eps": replicates - bad,
                            "max_sup": float(sups.max()),
                            "median_sup": float(np.median(sups))})


def verify_ratios(measure, n, replicates, seed, threshold=KS_TOLERANCE,
                  workers=None) -> list[VerificationReport]:
    """sigma/tau vs Beta(1, alpha), mean tau/n vs alpha - 1, Y_sigma/n vs x^alpha."""
    mode = resolve_mode(measure, "auto")
    alpha = measure.alpha
    table = rate_table(measure, n)
    batch = S.external_branch_batch(table, n, seed, replicates, full=True,
                                    workers=workers)
    ratio = batch.sigma / batch.tau
    law = L.sigma_limit(alpha)
    g1 = ecdf_grid(ratio, law.cdf)
    tau_n = batch.tau / n
    ylaw = L.y_sigma_limit(alpha)
    g3 = ecdf_grid(batch.y_at_sigma / n, ylaw.cdf)
    degenerate = n == 2
    return [
        _report(Theorem.SIGMA_OVER_TAU, n, replicates, seed, ks_from_grid(*g1),
                threshold, measure, mode, degenerate, {"law": law.name}, g1),
        _report(Theorem.TAU_OVER_N, n, replicates, seed,
                abs(tau_n.mean() - (alpha - 1.0)), threshold, measure, mode,
                degenerate, {"mean_tau_over_n": float(tau_n.mean()),
                             "target": alpha - 1.0}),
        _report(Theorem.Y_SIGMA, n, replicates, seed, ks_from_grid(*g3),
                threshold, measure, mode, degenerate, {"law": ylaw.name}, g3),
    ]


def verify_small_n(measure, n, replicates, seed, workers=None
                   ) -> list[VerificationReport]:
    """P(sigma = 1) and E[T] within 3 standard errors of their exact values."""
    table = rate_table(measure, n)
    law, mean_t = S.exact_sigma_law(table, n)
    p1 = sum(p for (s, _), p in law.items() if s == 1)
    batch = S.external_branch_batch(table, n, seed, replicates, full=False,
                                    workers=workers)
    hit = (batch.sigma == 1).mean()
    se_p = math.sqrt(p1 * (1.0 - p1) / replicates) if 0 < p1 < 1 else 1.0
    se_t = batch.t_len.std(ddof=1) / math.sqrt(replicates)
    mode = "exact"
    return [
        _report(Theorem.SMALL_N, n, replicates, seed, abs(hit - p1) / se_p, 3.0,
                measure, mode, details={"quantity": "P(sigma=1)",
                                        "estimate": float(hit),
                                        "exact": p1}),
        _report(Theorem.SMALL_N, n, replicates, seed,
                abs(batch.t_len.mean() - mean_t) / se_t, 3.0, measure, mode,
                details={"quantity": "E[T]",
                         "estimate": float(batch.t_len.mean()),
                         "exact": mean_t}),
    ]


def verify_partition_oracle(measure, n, replicates, seed,
                            significance=SIGNIFICANCE, workers=None
                            ) -> VerificationReport:
    """Chi-square homogeneity of (sigma, Y_sigma) from the full-partition
    and lean samplers.

    Cells whose exact expected count is below 5 are pooled.  The lean
    sample uses replicate indices ``replicates .. 2*replicates-1``.
    """
    table = rate_table(measure, n)
    full = S.full_partition_batch(table, n, seed, replicates, workers=workers)
    lean = S.external_branch_batch(table, n, seed, replicates, full=False,
                                   workers=workers, first=replicates)
    law, _ = S.exact_sigma_law(table, n)
    cells = sorted(c for c, p in law.items() if p * replicates >= 5.0)
    index = {c: i for i, c in enumerate(cells)}
    pool = len(cells)

    def counts(batch):
        out = np.zeros(pool + 1, np.int64)
        for s, y in zip(batch.sigma.tolist(), batch.y_at_sigma.tolist()):
            out[index.get((s, y), pool)] += 1
        return out

    table2 = np.vstack([counts(full), counts(lean)])
    table2 = table2[:, table2.sum(axis=0) > 0]
    if table2.shape[1] < 2:
        stat, dof = 0.0, 1
    else:
        stat, _, dof, _ = chi2_contingency(table2, correction=False)
    crit = chi2.ppf(1.0 - significance, max(dof, 1))
    return _report(Theorem.SMALL_N, n, replicates, seed, stat, crit, measure,
                   "exact", details={"quantity": "(sigma, Y_sigma) chi-square",
                                     "dof": int(dof), "cells": pool + 1,
                                     "significance": significance})


def convergence_table(measure, n_list, replicates, seed, verifier="sigma",
                      mode="auto", workers=None, **kwargs
                      ) -> list[VerificationReport]:
    """Run one verifier across ``n_list``; see :func:`is_decreasing`."""
    fn = {"sigma": verify_sigma, "tlen": verify_tlen}[verifier]
    return [fn(measure, n, replicates, seed, mode=mode, workers=workers,
               **kwargs) for n in n_list]


def is_decreasing(reports, strict=True) -> bool:
    stats = [r.statistic for r in reports]
    pairs = zip(stats, stats[1:])
    return all(b < a if strict else b <= a for a, b in pairs)


def jump_time_diagnostics(measure, n_list, replicates, seed, frac=0.25
                          ) -> list[dict]:
    """Mean n^(alpha-1)|A_k - A~_k| and n^(alpha-1)|A~_k - A^_k| at
    ``k = floor(n * frac * (alpha - 1))``."""
    resolve_mode(measure, "auto")
    alpha, c0 = measure.alpha, measure.c0
    rows = []
    for n in n_list:
        table = rate_table(measure, n)
        k = int(n * frac * (alpha - 1.0))
        d1, d2, a_mean = [], [], []
        for i in range(replicates):
            path = S.simulate_jump_chain(table, n, SeedSpec(seed, i))
            kk = min(k, path.tau)
            a = S.jump_time(path, kk)
            a_t = S.jump_time_mean_field(path, table, kk)
            a_h = S.jump_time_power_law(path, c0, alpha, kk)
            scale = n ** (alpha - 1.0)
            d1.append(scale * abs(a - a_t))
            d2.append(scale * abs(a_t - a_h))
            a_mean.append(scale * a)
        rows.append({"n": n, "k": k, "mean_a_minus_mean_field": float(np.mean(d1)),
                     "mean_field_minus_power_law": float(np.mean(d2)),
                     "mean_scaled_a": float(np.mean(a_mean)),
                     "limit": float(L.time_of_r(alpha, c0, frac * (alpha - 1.0)))})
    return rows
