"""Composite quadrature helpers for integrands singular or peaked near 0 and 1.

Two tools live here:

* ``panel_quad`` runs adaptive QUADPACK integration over a log-spaced
  panel decomposition; used for scalar tail integrals like rho(t).
* ``GaussPanels`` is a fixed composite Gauss-Legendre rule whose panels
  shrink geometrically toward both endpoints.  It is evaluated on a whole
  vector of integrands at once, which is what the rate rows need.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

GL_ORDER = 20
GEOMETRIC_DEPTH = 44


@lru_cache(maxsize=None)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(order)
    return x, w


def _breakpoints(n_uniform: int, depth: int) -> np.ndarray:
    uniform = np.linspace(0.0, 1.0, n_uniform + 1)
    fine = 2.0 ** -np.arange(1, depth + 1)
    edge = np.concatenate([fine, 1.0 - fine])
    return np.unique(np.concatenate([uniform, edge, [0.0, 1.0]]))


class GaussPanels:
    """Nodes and weights for integrals over (0, 1).

    ``power`` substitutes ``x = s**power``; with ``power = 1/(2 - alpha)``
    an integrable ``x**(1 - alpha)`` endpoint singularity becomes smooth.
    """

    def __init__(self, power: float = 1.0, n_uniform: int = 16,
                 order: int = GL_ORDER, depth: int = GEOMETRIC_DEPTH):
        t, w = _legendre(order)
        edges = _breakpoints(n_uniform, depth)
        lo, hi = edges[:-1], edges[1:]
        half = 0.5 * (hi - lo)
        s = (lo[:, None] + half[:, None] * (t[None, :] + 1.0)).ravel()
        ws = (half[:, None] * w[None, :]).ravel()
        if power != 1.0:
            x = s ** power
            wx = ws * power * s ** (power - 1.0)
        else:
            x, wx = s, ws
        keep = (x > 0.0) & (x < 1.0)
        self.x = x[keep]
        self.w = wx[keep]
        self.log_x = np.log(self.x)
        self.log1m_x = np.log1p(-self.x)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Integrate samples taken at ``self.x`` along the last axis."""
        return values @ self.w


def panel_quad(func, lo: float, hi: float, epsrel: float = 1e-12,
               epsabs: float = 0.0) -> float:
    """Adaptive quadrature of ``func`` on [lo, hi] split into log-spaced panels.

    The panels follow decades from ``lo`` upward, plus a geometric refinement
    toward ``hi`` for weak endpoint singularities there.
    """
    if hi <= lo:
        return 0.0
    decades = max(1, math.ceil(math.log10(hi / lo))) if lo > 0 else 1
    edges = list(np.geomspace(lo, hi, 2 * decades + 1)) if lo > 0 else [lo, hi]
    width = hi - edges[-2]
    edges[-1:-1] = [hi - width * 2.0 ** -j for j in range(1, 12)]
    edges = sorted(set(edges))
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(func, a, b, epsabs=epsabs, epsrel=epsrel,
                                limit=200)
        total += val
    return total
