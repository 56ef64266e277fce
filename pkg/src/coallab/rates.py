"""Merger rates, total rates and the law of the first jump.

Notation: with ``b`` blocks present, any given ``k`` of them merge at rate
``lambda_{b,k} = int x^k (1-x)^(b-k) x^-2 Lambda(dx)``.  The total rate of
the next collision is ``g_b`` and ``X`` denotes the number of blocks lost in
one collision (``X = k - 1`` when ``k`` blocks merge).

Beta rates are evaluated from cached log-gamma values.  Density rates use
composite Gauss-Legendre quadrature in the variable ``s`` with
``x = s**(1/(2 - alpha))``, which removes the ``x**(1 - alpha)`` endpoint
singularity of the density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import betainc, betaln, gammaln, logsumexp

from . import measures as M
from .errors import OutOfRange, TooLarge
from .quadrature import GaussPanels

KIND_KINGMAN = 0
KIND_BETA = 1
KIND_TABLE = 2

# packed density tables hold ~n^2 doubles each
PACKED_N_MAX = 4000


def binomial_tail(n: int, x: float, k: int) -> float:
    """P(Bin(n, x) >= k) through the regularized incomplete Beta function."""
    if not 1 <= k <= n:
        raise OutOfRange(f"binomial_tail needs 1 <= k <= n, got k={k}, n={n}")
    return float(betainc(k, n - k + 1, x))


def _log_binom(n, k):
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


@dataclass(frozen=True)
class FirstJumpLaw:
    """Law of X, the number of blocks lost at a collision from ``b`` blocks.

    ``probs[k - 1]`` is P(X = k) for k = 1..b-1.
    """

    b: int
    probs: np.ndarray

    @property
    def ks(self) -> np.ndarray:
        return np.arange(1, self.b)

    def prob(self, k: int) -> float:
        if not 1 <= k <= self.b - 1:
            return 0.0
        return float(self.probs[k - 1])

    def tail(self, k: int) -> float:
        """P(X >= k)."""
        if k <= 1:
            return 1.0
        return float(self.probs[k - 1:].sum())

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(p) for k, p in zip(self.ks, self.probs)}

    def mean(self) -> float:
        return float(self.ks @ self.probs)

    def second_moment(self) -> float:
        ks = self.ks.astype(float)
        return float((ks * ks) @ self.probs)

    def laplace(self, u: float) -> float:
        return float(np.exp(-u * self.ks) @ self.probs)


class RateTable:
    """Rates of the n-coalescent for block counts up to ``n_max``.

    ``g[b]`` and ``lam2[b]`` (= lambda_{b,2}) are filled eagerly; ``g`` uses
    ``g_{b+1} = g_b + b * lambda_{b+1,2}`` (a sum of positive terms), which
    agrees with the sum and integral forms of the total rate.
    """

    def __init__(self, measure: M.CoalescentMeasure, n_max: int):
        if n_max < 2:
            raise OutOfRange("n_max must be at least 2")
        self.measure = measure
        self.n_max = int(n_max)
        self.kind = {M.KINGMAN: KIND_KINGMAN, M.BETA: KIND_BETA,
                     M.DENSITY: KIND_TABLE}[measure.kind]
        self.a = float(measure.a) if measure.kind == M.BETA else 0.0
        self.bb = float(measure.b) if measure.kind == M.BETA else 0.0
        self._packed = None
        self._mu_rows: dict[int, np.ndarray] = {}
        top = self.n_max + 1
        j = np.arange(top + 1, dtype=float)

        if self.kind == KIND_BETA:
            a, bb = self.a, self.bb
            with np.errstate(all="ignore"):
                self.log_gamma_k = gammaln(j + a - 2.0)
                self.log_gamma_rest = gammaln(j + bb)
                self.log_gamma_total = gammaln(j - 2.0 + a + bb)
            self.log_beta_ab = float(betaln(a, bb))
            self.log_gamma_k[:2] = np.nan
            self.log_gamma_total[:2] = np.nan
            lam2 = np.zeros(top + 1)
            b = np.arange(2, top + 1)
            lam2[2:] = np.exp(self._log_lam_beta(b, 2))
        elif self.kind == KIND_KINGMAN:
            lam2 = np.zeros(top + 1)
            lam2[2:] = 1.0
        else:
            lam2 = np.zeros(top + 1)
            lam2[2:] = self._density_lam2(np.arange(2, top + 1))
        self.lam2 = lam2

        g = np.zeros(top)
        g[2] = lam2[2]
        for b in range(2, self.n_max):
            g[b + 1] = g[b] + b * lam2[b + 1]
        self.g = g

    # -- lambda ------------------------------------------------------------

    def _log_lam_beta(self, b, k):
        b = np.asarray(b)
        k = np.asarray(k)
        return (self.log_gamma_k[k] + self.log_gamma_rest[b - k]
                - self.log_gamma_total[b] - self.log_beta_ab)

    def _panels(self, b: int) -> GaussPanels:
        n_uniform = max(16, int(4 * math.sqrt(b)))
        return _gauss_panels(self.measure.singular_power(), n_uniform)

    def _density_lam2(self, bs: np.ndarray) -> np.ndarray:
        panels = self._panels(2)
        f = self.measure.density_fn()(panels.x)
        out = np.empty(len(bs))
        chunk = 256
        for i in range(0, len(bs), chunk):
            sub = bs[i:i + chunk].astype(float)
            vals = np.exp((sub[:, None] - 2.0) * panels.log1m_x[None, :]) * f
            out[i:i + chunk] = panels.integrate(vals)
        return out

    def log_mu_row(self, b: int) -> np.ndarray:
        """log of C(b,k) lambda_{b,k} for k = 0..b (entries 0, 1 are -inf)."""
        self._check_b(b, allow_top=True)
        k = np.arange(b + 1)
        out = np.full(b + 1, -np.inf)
        if self.kind == KIND_KINGMAN:
            out[2] = math.log(b * (b - 1) / 2.0)
        elif self.kind == KIND_BETA:
            kk = k[2:]
            out[2:] = _log_binom(b, kk) + self._log_lam_beta(b, kk)
        else:
            out[2:] = _density_log_mu_row(self, b)[2:]
        return out

    def lam(self, b: int, k: int) -> float:
        """lambda_{b,k}: rate at which a given set of k of b blocks merges."""
        self._check_bk(b, k)
        if self.kind == KIND_KINGMAN:
            return 1.0 if k == 2 else 0.0
        return math.exp(self.log_lam(b, k))

    def log_lam(self, b: int, k: int) -> float:
        self._check_bk(b, k)
        if self.kind == KIND_KINGMAN:
            return 0.0 if k == 2 else -math.inf
        if self.kind == KIND_BETA:
            return float(self._log_lam_beta(b, k))
        return float(self.log_mu_row(b)[k] - _log_binom(b, k))

    def lam_row(self, b: int) -> np.ndarray:
        """lambda_{b,k} for k = 2..b."""
        self._check_b(b, allow_top=True)
        if self.kind == KIND_KINGMAN:
            row = np.zeros(b - 1)
            row[0] = 1.0
            return row
        k = np.arange(2, b + 1)
        if self.kind == KIND_BETA:
            return np.exp(self._log_lam_beta(b, k))
        return np.exp(self.log_mu_row(b)[2:] - _log_binom(b, k))

    def type1_ratio(self, b: int, k: int) -> float:
        """lambda_{b+1,k} / lambda_{b,k}; one minus this is the Type-1 probability."""
        self._check_bk(b, k)
        if self.kind == KIND_KINGMAN:
            return 1.0
        if self.kind == KIND_BETA:
            return (b - k + self.bb) / (b - 2.0 + self.a + self.bb)
        return math.exp(self.log_lam(b + 1, k) - self.log_lam(b, k))

    # -- total rate --------------------------------------------------------

    def total_rate(self, n: int) -> float:
        """g_n as the sum over merger sizes of C(n, l+1) lambda_{n,l+1}."""
        self._check_b(n)
        if self.kind == KIND_KINGMAN:
            return n * (n - 1) / 2.0
        return float(np.exp(logsumexp(self.log_mu_row(n)[2:])))

    def total_rate_integral(self, n: int) -> float:
        """g_n = n(n-1) int (1-t)^(n-2) t rho(t) dt (Beta) or the equivalent
        binomial-tail form int P(Bin(n,x) >= 2) nu(dx) (densities)."""
        self._check_b(n)
        if self.kind == KIND_KINGMAN:
            raise M.HypothesisUnavailable(
                "integral form of g_n needs Lambda without an atom at 0")
        panels = self._panels(n)
        if self.kind == KIND_BETA and M._beta_closed_form_ok(self.measure):
            t = panels.x
            vals = np.exp((n - 2.0) * panels.log1m_x) * t * M.rho(self.measure, t)
            return float(n * (n - 1.0) * panels.integrate(vals))
        x = panels.x
        f = self.measure.density_fn()(x)
        vals = betainc(2.0, n - 1.0, x) * f / (x * x)
        return float(panels.integrate(vals))

    # -- first jump ----------------------------------------------------------

    def first_jump_law(self, b: int) -> FirstJumpLaw:
        self._check_b(b)
        if self.kind == KIND_KINGMAN:
            probs = np.zeros(b - 1)
            probs[0] = 1.0
            return FirstJumpLaw(b, probs)
        log_mu = self.log_mu_row(b)[2:]
        probs = np.exp(log_mu - logsumexp(log_mu))
        return FirstJumpLaw(b, probs)

    def first_jump_tail_integral(self, b: int, k: int) -> float:
        """P(X >= k) from the rho-integral representation (Beta only)."""
        self._check_b(b)
        if not 1 <= k <= b - 1:
            raise OutOfRange(f"k must lie in [1, {b - 1}]")
        if self.kind != KIND_BETA or not M._beta_closed_form_ok(self.measure):
            raise M.HypothesisUnavailable("tail integral needs a closed-form rho")
        panels = self._panels(b)
        t = panels.x
        r = M.rho(self.measure, t)
        log_t = panels.log_x
        num = panels.integrate(np.exp((b - k - 1.0) * panels.log1m_x + k * log_t) * r)
        den = panels.integrate(np.exp((b - 2.0) * panels.log1m_x + log_t) * r)
        log_pref = gammaln(b - 1.0) - gammaln(k + 1.0) - gammaln(b - k)
        return float(math.exp(log_pref) * num / den)

    def first_jump_mean(self, b: int) -> float:
        return self.first_jump_law(b).mean()

    def laplace_x1(self, b: int, u: float) -> float:
        if u < 0:
            raise OutOfRange("Laplace argument must be non-negative")
        return self.first_jump_law(b).laplace(u)

    # -- packed tables for the simulator (density kind) ----------------------

    def packed(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened pmf and Type-1 ratio rows for b = 2..n_max.

        Row ``b`` starts at ``(b-2)(b-1)/2`` and holds entries for X = 1..b-1.
        Rows come from one quadrature row at ``n_max + 1`` pushed down through
        mu_{b,k} = mu_{b+1,k} (b+1-k)/(b+1) + mu_{b+1,k+1} (k+1)/(b+1),
        with mu_{b,k} = C(b,k) lambda_{b,k}; all weights are positive.
        """
        if self.kind != KIND_TABLE:
            return np.zeros(1), np.zeros(1)
        if self._packed is None:
            if self.n_max > PACKED_N_MAX:
                raise TooLarge(
                    f"density simulation supports n <= {PACKED_N_MAX}")
            self._packed = _build_packed(self)
        return self._packed

    def kernel_args(self):
        pmf, ratio = self.packed()
        return (self.kind, self.a, self.bb, self.g, self.lam2, pmf, ratio)

    # -- helpers -------------------------------------------------------------

    def _check_b(self, b: int, allow_top: bool = False) -> None:
        hi = self.n_max + 1 if allow_top else self.n_max
        if not 2 <= b <= hi:
            raise OutOfRange(f"block count {b} outside [2, {hi}]")

    def _check_bk(self, b: int, k: int) -> None:
        self._check_b(b, allow_top=True)
        if not 2 <= k <= b:
            raise OutOfRange(f"merger size k={k} outside [2, {b}]")


@lru_cache(maxsize=32)
def _gauss_panels(power: float, n_uniform: int) -> GaussPanels:
    return GaussPanels(power=power, n_uniform=n_uniform)


def _density_log_mu_row(table: RateTable, b: int) -> np.ndarray:
    hit = table._mu_rows.get(b)
    if hit is not None:
        return hit
    panels = table._panels(b)
    log_f = np.log(table.measure.density_fn()(panels.x))
    k = np.arange(b + 1, dtype=float)
    base = log_f - 2.0 * panels.log_x
    out = np.full(b + 1, -np.inf)
    chunk = max(1, 2_000_000 // len(panels.x))
    for i in range(2, b + 1, chunk):
        kk = k[i:i + chunk]
        log_terms = (_log_binom(b, kk)[:, None] + kk[:, None] * panels.log_x
                     + (b - kk)[:, None] * panels.log1m_x + base)
        shift = log_terms.max(axis=1)
        vals = panels.integrate(np.exp(log_terms - shift[:, None]))
        with np.errstate(divide="ignore"):
            out[i:i + chunk] = np.log(vals) + shift
    table._mu_rows[b] = out
    return out


def _build_packed(table: RateTable) -> tuple[np.ndarray, np.ndarray]:
    n = table.n_max
    size = (n - 1) * n // 2
    pmf = np.zeros(size)
    ratio = np.zeros(size)
    top = n + 1
    mu_next = np.exp(_density_log_mu_row(table, top))
    for b in range(n, 1, -1):
        k = np.arange(b + 1, dtype=float)
        mu = np.zeros(b + 1)
        kk = k[2:]
        mu[2:] = (mu_next[2:b + 1] * (b + 1 - kk) / (b + 1)
                  + mu_next[3:b + 2] * (kk + 1) / (b + 1))
        off = (b - 2) * (b - 1) // 2
        pmf[off:off + b - 1] = mu[2:] / mu[2:].sum()
        # lambda_{b+1,k}/lambda_{b,k} = mu_{b+1,k} (b+1-k) / ((b+1) mu_{b,k})
        with np.errstate(divide="ignore", invalid="ignore"):
            r = mu_next[2:b + 1] * (b + 1 - kk) / ((b + 1) * mu[2:])
        ratio[off:off + b - 1] = np.where(mu[2:] > 0, r, 1.0)
        mu_next = mu
    return pmf, ratio


_TABLE_CACHE: dict = {}


def rate_table(measure: M.CoalescentMeasure, n_max: int) -> RateTable:
    """Shared RateTable covering at least ``n_max`` blocks."""
    key = (measure.kind, measure.a, measure.b, measure.name, measure.c0,
           measure.alpha)
    tab = _TABLE_CACHE.get(key)
    if tab is None or tab.n_max < n_max:
        tab = RateTable(measure, n_max)
        _TABLE_CACHE[key] = tab
    return tab
