"""The driving measure Lambda of a Lambda-coalescent.

Three kinds are supported: the Kingman atom at 0, Beta(a, b) laws and
named densities from a small registry.  The quantities derived from the
measure are the tail ``rho(t) = nu[t, 1]`` of ``nu(dx) = x**-2 Lambda(dx)``
and the regular-variation constants ``(c0, alpha)`` in
``rho(t) ~ c0 * t**-alpha`` as ``t -> 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import betainc, betaln

from .errors import ConfigError, HypothesisUnavailable, NonPositiveT
from .quadrature import panel_quad

KINGMAN = "kingman"
BETA = "beta"
DENSITY = "density"


# -- density registry ------------------------------------------------------
#
# Each factory takes (c0, alpha) and returns (density, total_mass).  The
# densities are chosen so that rho(t) = c0 t^-alpha + O(t^(-alpha+zeta)) with
# zeta > 1 - 1/alpha, so the hypothesis really holds for every entry.

def _power_density(c0: float, alpha: float):
    scale = alpha * c0

    def f(x):
        return scale * np.power(x, 1.0 - alpha)

    return f, scale / (2.0 - alpha)


def _beta_density(c0: float, alpha: float):
    log_b = betaln(2.0 - alpha, alpha)
    kappa = c0 * alpha * math.exp(log_b)

    def f(x):
        x = np.asarray(x, dtype=float)
        return kappa * np.exp((1.0 - alpha) * np.log(x)
                              + (alpha - 1.0) * np.log1p(-x) - log_b)

    return f, kappa


def _power_uniform_density(c0: float, alpha: float):
    power, mass = _power_density(c0, alpha)

    def f(x):
        return power(x) + 1.0

    return f, mass + 1.0


DENSITY_REGISTRY: dict[str, Callable] = {
    "power": _power_density,
    "beta": _beta_density,
    "power+uniform": _power_uniform_density,
}


@dataclass(frozen=True)
class CoalescentMeasure:
    """A finite measure Lambda on [0, 1].

    Build instances with :func:`kingman`, :func:`beta` or :func:`density`
    rather than calling the constructor directly.
    """

    kind: str
    a: float | None = None
    b: float | None = None
    name: str | None = None
    c0: float | None = None
    alpha: float | None = None
    hypothesis_ok: bool = False
    total_mass: float = 1.0
    _density: Callable | None = field(default=None, repr=False, compare=False)

    @property
    def is_kingman(self) -> bool:
        return self.kind == KINGMAN

    def density_fn(self) -> Callable:
        """Lebesgue density of Lambda on (0, 1); not defined for Kingman."""
        if self.kind == BETA:
            a, b = self.a, self.b
            log_b = betaln(a, b)

            def f(x):
                x = np.asarray(x, dtype=float)
                return np.exp((a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-x)
                              - log_b)

            return f
        if self.kind == DENSITY:
            return self._density
        raise HypothesisUnavailable("Kingman measure has no density on (0, 1]")

    def singular_power(self) -> float:
        """Exponent p such that x = s**p smooths the density at 0."""
        if self.kind == BETA:
            return 1.0 / self.a if self.a < 1.0 else 1.0
        if self.kind == DENSITY:
            return 1.0 / (2.0 - self.alpha)
        return 1.0

    def to_config(self) -> dict:
        if self.kind == KINGMAN:
            return {"kind": KINGMAN}
        if self.kind == BETA:
            return {"kind": BETA, "a": self.a, "b": self.b}
        return {"kind": DENSITY, "name": self.name, "c0": self.c0,
                "alpha": self.alpha}

    def label(self) -> str:
        if self.kind == KINGMAN:
            return "Kingman"
        if self.kind == BETA:
            return f"Beta({self.a:g},{self.b:g})"
        return f"density:{self.name}(c0={self.c0:g},alpha={self.alpha:g})"


def kingman() -> CoalescentMeasure:
    return CoalescentMeasure(kind=KINGMAN, total_mass=1.0)


def beta(a: float, b: float) -> CoalescentMeasure:
    """Beta(a, b) measure.  ``a`` in (0, 1) lies in the regularly varying class.

    Beta(1, 1) is the Bolthausen-Sznitman measure; it carries ``alpha = 1``
    as a label only and ``hypothesis_ok`` is False.
    """
    if not (a > 0 and b > 0):
        raise ConfigError(f"Beta parameters must be positive, got ({a}, {b})")
    a, b = float(a), float(b)
    if a < 1.0:
        c0 = 1.0 / ((2.0 - a) * math.exp(betaln(a, b)))
        return CoalescentMeasure(kind=BETA, a=a, b=b, c0=c0, alpha=2.0 - a,
                                 hypothesis_ok=True)
    alpha = 1.0 if a == 1.0 else None
    return CoalescentMeasure(kind=BETA, a=a, b=b, alpha=alpha)


def density(name: str, c0: float, alpha: float,
            hypothesis_ok: bool = True) -> CoalescentMeasure:
    """A registered density with declared constants ``(c0, alpha)``.

    The regular-variation hypothesis cannot be checked numerically for a
    general density; ``hypothesis_ok`` records the caller's assertion.
    """
    if name not in DENSITY_REGISTRY:
        known = ", ".join(sorted(DENSITY_REGISTRY))
        raise ConfigError(f"unknown density {name!r}; known: {known}")
    if not 1.0 < alpha < 2.0:
        raise ConfigError(f"alpha must lie in (1, 2), got {alpha}")
    if not c0 > 0:
        raise ConfigError(f"c0 must be positive, got {c0}")
    f, mass = DENSITY_REGISTRY[name](float(c0), float(alpha))
    return CoalescentMeasure(kind=DENSITY, name=name, c0=float(c0),
                             alpha=float(alpha), hypothesis_ok=hypothesis_ok,
                             total_mass=mass, _density=f)


def from_config(cfg: dict) -> CoalescentMeasure:
    """Parse ``{"kind": "beta", "a": .., "b": ..}`` style records."""
    kind = cfg.get("kind")
    try:
        if kind == KINGMAN:
            return kingman()
        if kind == BETA:
            return beta(float(cfg["a"]), float(cfg["b"]))
        if kind == DENSITY:
            return density(cfg["name"], float(cfg["c0"]), float(cfg["alpha"]),
                           bool(cfg.get("hypothesis_ok", True)))
    except KeyError as exc:
        raise ConfigError(f"measure record missing field {exc}") from None
    raise ConfigError(f"unknown measure kind {kind!r}")


# -- operations ------------------------------------------------------------

def _upper_beta_integral(p: float, q: float, t):
    """int_t^1 x^(p-1) (1-x)^(q-1) dx for any non-integer-obstructed p.

    For p <= 0 the integral is lifted with
    J(p, q) = -t^p (1-t)^q / p + (p + q)/p * J(p + 1, q).
    """
    if p > 0:
        return np.exp(betaln(p, q)) * betainc(q, p, 1.0 - t)
    return (-np.power(t, p) * np.power(1.0 - t, q) / p
            + (p + q) / p * _upper_beta_integral(p + 1.0, q, t))


def _beta_rho_closed_form(measure: CoalescentMeasure, t):
    p = measure.a - 2.0
    # the lift divides by p, p + 1, ...; integer a hits zero
    return _upper_beta_integral(p, measure.b, t) / math.exp(betaln(measure.a,
                                                                   measure.b))


def _beta_closed_form_ok(measure: CoalescentMeasure) -> bool:
    p = measure.a - 2.0
    while p <= 0:
        if p == 0:
            return False
        p += 1.0
    return True


def rho_quadrature(measure: CoalescentMeasure, t: float) -> float:
    """rho(t) by adaptive quadrature of x^-2 f(x) over [t, 1]."""
    f = measure.density_fn()
    return panel_quad(lambda x: float(f(x)) / (x * x), t, 1.0)


def rho(measure: CoalescentMeasure, t):
    """Tail ``nu[t, 1]`` of ``nu(dx) = x^-2 Lambda(dx)``.

    ``t`` may be a scalar or an array (arrays only for Beta closed forms).
    """
    arr = np.asarray(t, dtype=float)
    if np.any(arr <= 0):
        raise NonPositiveT(f"rho needs t > 0, got {t}")
    if np.any(arr > 1):
        raise NonPositiveT(f"rho is defined on (0, 1], got {t}")
    if measure.kind == KINGMAN:
        return np.zeros_like(arr) if arr.ndim else 0.0
    if measure.kind == BETA and _beta_closed_form_ok(measure):
        out = np.where(arr >= 1.0, 0.0, _beta_rho_closed_form(measure, arr))
        return out if arr.ndim else float(out)
    if arr.ndim:
        return np.array([rho_quadrature(measure, float(x)) for x in arr])
    return rho_quadrature(measure, float(arr))


def c0_alpha(measure: CoalescentMeasure) -> tuple[float, float]:
    """Constants ``(c0, alpha)`` of ``rho(t) = c0 t^-alpha + O(t^(-alpha+zeta))``."""
    if measure.kind == KINGMAN:
        raise HypothesisUnavailable("Kingman measure is not regularly varying")
    if measure.kind == BETA and not measure.a < 1.0:
        raise HypothesisUnavailable(
            f"{measure.label()} needs a in (0, 1) for the regular-variation class")
    return measure.c0, measure.alpha


def mu_minus(measure: CoalescentMeasure, order: int) -> float:
    """Negative moment ``int x^-order Lambda(dx)``; ``math.inf`` when divergent."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if measure.kind == KINGMAN:
        return math.inf
    if measure.kind == BETA:
        a, b = measure.a, measure.b
        if a <= order:
            return math.inf
        return math.exp(betaln(a - order, b) - betaln(a, b))
    # declared alpha in (1, 2): int x^-1 Lambda(dx) = int_0^1 rho diverges
    return math.inf
