"""Closed-form limit laws and deterministic scaling functions.

Laws carry ``(alpha, c0)`` explicitly rather than a measure, so the
Kingman and finite-moment cases share one interface.  Throughout,
``K = c0 * Gamma(2 - alpha)`` is the constant in ``g_n ~ K n**alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BadAlpha, DomainError

SIGMA_BETA_1_ALPHA = "SigmaBeta1Alpha"
T_LEN_BETA_CLASS = "TLenBetaClass"
BLOCK_COUNT_BETA_CLASS = "BlockCountBetaClass"
BLOCK_COUNT_KINGMAN = "BlockCountKingman"
T_LEN_KINGMAN = "TLenKingman"
T_LEN_EXP_FINITE = "TLenExpFinite"
BS_T_LEN = "BsTLen"
BS_SIGMA = "BsSigma"


@dataclass(frozen=True)
class LimitLaw:
    """A named law on the real line with vectorized cdf, pdf and quantile."""

    name: str
    params: dict
    cdf: Callable = field(repr=False)
    pdf: Callable = field(repr=False)
    ppf: Callable = field(repr=False)
    support: tuple[float, float] = (0.0, math.inf)

    def sample(self, u) -> np.ndarray:
        """Exact draws from uniforms ``u`` by inversion."""
        return self.ppf(np.asarray(u, dtype=float))


def _check_alpha(alpha: float) -> None:
    if not 1.0 < alpha < 2.0:
        raise BadAlpha(f"alpha must lie in (1, 2), got {alpha}")


def _clip01(x):
    return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)


def _power_tail_law(name: str, exponent: float, params: dict) -> LimitLaw:
    """Law on [0, 1] with survival (1 - x)^exponent, i.e. Beta(1, exponent)."""
    return LimitLaw(
        name=name, params=params,
        cdf=lambda x: 1.0 - (1.0 - _clip01(x)) ** exponent,
        pdf=lambda x: np.where((np.asarray(x) >= 0) & (np.asarray(x) <= 1),
                               exponent * (1.0 - _clip01(x)) ** (exponent - 1.0),
                               0.0),
        ppf=lambda u: 1.0 - (1.0 - np.asarray(u, dtype=float)) ** (1.0 / exponent),
        support=(0.0, 1.0))


def sigma_limit(alpha: float) -> LimitLaw:
    """Beta(1, alpha): limit of sigma / (n (alpha - 1)) and of sigma / tau."""
    _check_alpha(alpha)
    return _power_tail_law(SIGMA_BETA_1_ALPHA, alpha, {"alpha": alpha})


def kingman_sigma_limit() -> LimitLaw:
    """Beta(1, 2): limit of sigma / n for Kingman's coalescent."""
    return _power_tail_law(SIGMA_BETA_1_ALPHA, 2.0, {"alpha": 2.0})


def t_limit(alpha: float, c0: float) -> LimitLaw:
    """Limit of n^(alpha-1) T: survival (1 + K t)^(-alpha/(alpha-1))."""
    _check_alpha(alpha)
    if not c0 > 0:
        raise BadAlpha(f"c0 must be positive, got {c0}")
    k = c0 * math.gamma(2.0 - alpha)
    e = alpha / (alpha - 1.0)

    def cdf(t):
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        return -np.expm1(-e * np.log1p(k * t))

    def pdf(t):
        t = np.asarray(t, dtype=float)
        val = e * k * np.power(1.0 + k * np.maximum(t, 0.0), -e - 1.0)
        return np.where(t >= 0, val, 0.0)

    def ppf(u):
        u = np.asarray(u, dtype=float)
        return np.expm1(-np.log1p(-u) / e) / k

    return LimitLaw(T_LEN_BETA_CLASS, {"alpha": alpha, "c0": c0}, cdf, pdf, ppf)


def y_sigma_limit(alpha: float) -> LimitLaw:
    """Limit of Y_sigma / n, the block fraction left when individual 1 merges.

    Equal in law to 1 - sigma with sigma ~ Beta(1, alpha): cdf x^alpha.
    """
    _check_alpha(alpha)
    return _block_fraction_law(BLOCK_COUNT_BETA_CLASS, alpha)


def kingman_y_sigma_limit() -> LimitLaw:
    return _block_fraction_law(BLOCK_COUNT_KINGMAN, 2.0)


def _block_fraction_law(name: str, alpha: float) -> LimitLaw:
    return LimitLaw(
        name=name, params={"alpha": alpha},
        cdf=lambda x: _clip01(x) ** alpha,
        pdf=lambda x: np.where((np.asarray(x) >= 0) & (np.asarray(x) <= 1),
                               alpha * _clip01(x) ** (alpha - 1.0), 0.0),
        ppf=lambda u: np.asarray(u, dtype=float) ** (1.0 / alpha),
        support=(0.0, 1.0))


def kingman_t_limit() -> LimitLaw:
    """Limit of n T for Kingman's coalescent: density 8/(2+t)^3."""

    def cdf(t):
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        return 1.0 - 4.0 / (2.0 + t) ** 2

    def pdf(t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, 8.0 / (2.0 + np.maximum(t, 0.0)) ** 3, 0.0)

    def ppf(u):
        return 2.0 / np.sqrt(1.0 - np.asarray(u, dtype=float)) - 2.0

    return LimitLaw(T_LEN_KINGMAN, {}, cdf, pdf, ppf)


def exp_limit(mu1: float, name: str = T_LEN_EXP_FINITE) -> LimitLaw:
    """Exponential law with rate ``mu1``."""
    if not (mu1 > 0 and math.isfinite(mu1)):
        raise DomainError(f"rate must be positive and finite, got {mu1}")

    def cdf(t):
        return -np.expm1(-mu1 * np.maximum(np.asarray(t, dtype=float), 0.0))

    def pdf(t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, mu1 * np.exp(-mu1 * np.maximum(t, 0.0)), 0.0)

    def ppf(u):
        return -np.log1p(-np.asarray(u, dtype=float)) / mu1

    return LimitLaw(name, {"mu_minus_1": mu1}, cdf, pdf, ppf)


def bs_t_limit() -> LimitLaw:
    """Bolthausen-Sznitman: log(n) T tends to Exp(1)."""
    return exp_limit(1.0, BS_T_LEN)


def bs_sigma_limit() -> LimitLaw:
    """Bolthausen-Sznitman: (log(n)/n) sigma tends to Uniform(0, 1)."""
    return LimitLaw(BS_SIGMA, {}, cdf=_clip01,
                    pdf=lambda x: np.where((np.asarray(x) >= 0)
                                           & (np.asarray(x) <= 1), 1.0, 0.0),
                    ppf=lambda u: np.asarray(u, dtype=float), support=(0.0, 1.0))


# -- deterministic functions ---------------------------------------------------

def block_limit(alpha: float, c0: float, t):
    """(1 + K t)^(-1/(alpha-1)): limit of R(t n^(1-alpha)) / n."""
    k = c0 * math.gamma(2.0 - alpha)
    return np.power(1.0 + k * np.asarray(t, dtype=float), -1.0 / (alpha - 1.0))


def kingman_block_limit(t):
    """(1 + t/2)^-1: limit of R(t/n) / n for Kingman's coalescent."""
    return 1.0 / (1.0 + 0.5 * np.asarray(t, dtype=float))


def r_of_t(alpha: float, c0: float, t):
    """Collision index fraction reached by rescaled time t:
    (alpha-1)(1 - (1 + K t)^(-1/(alpha-1)))."""
    return (alpha - 1.0) * (1.0 - block_limit(alpha, c0, t))


def time_of_r(alpha: float, c0: float, r):
    """Inverse of :func:`r_of_t`: ((1 - r/(alpha-1))^(1-alpha) - 1) / K.

    Also the limit of n^(alpha-1) A_{floor(n r)}.
    """
    k = c0 * math.gamma(2.0 - alpha)
    r = np.asarray(r, dtype=float)
    return np.expm1((1.0 - alpha) * np.log1p(-r / (alpha - 1.0))) / k


def nu_eta(alpha: float, eta: float, t):
    """int_0^t (1 - x/(alpha-1))^(-eta) dx for 0 <= t < alpha - 1."""
    gam = alpha - 1.0
    t = np.asarray(t, dtype=float)
    if np.any(t >= gam) or np.any(t < 0):
        raise DomainError(f"nu_eta needs 0 <= t < alpha - 1 = {gam}")
    log_rest = np.log1p(-t / gam)
    if eta == 1.0:
        out = -gam * log_rest
    else:
        out = gam / (eta - 1.0) * np.expm1((1.0 - eta) * log_rest)
    return out if out.ndim else float(out)


def v_alpha(alpha: float, t):
    return nu_eta(alpha, alpha, t)
