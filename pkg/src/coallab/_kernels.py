"""numba kernels behind the samplers in :mod:`coallab.simulator`.

Rates reach the kernels as plain arrays (see ``RateTable.kernel_args``):
``kind`` selects Kingman, Beta (closed-form pmf ratios) or packed tables.
"""

import numba as nb
import numpy as np

from .rng import exponential, randbelow, seed_replicate, uniform

KINGMAN = 0
BETA = 1
TABLE = 2


@nb.njit(cache=True)
def draw_x(s, kind, a, bb, b, g, lam2, pmf):
    """Blocks lost at a collision from ``b`` blocks, by sequential inversion.

    Starting at X = 1 the pmf is accumulated until it covers a uniform draw;
    mass left over from rounding goes to X = b - 1.
    """
    if b == 2 or kind == KINGMAN:
        return 1
    u = uniform(s)
    if kind == BETA:
        p = 0.5 * b * (b - 1.0) * lam2[b] / g[b]
        cum = p
        k = 1
        while cum <= u and k < b - 1:
            # P(X=k+1)/P(X=k) for Beta(a, bb)
            p *= (b - k - 1.0) * (k - 1.0 + a) / ((k + 2.0) * (b - k - 2.0 + bb))
            k += 1
            cum += p
        return k
    off = (b - 2) * (b - 1) // 2
    cum = pmf[off]
    k = 1
    while cum <= u and k < b - 1:
        cum += pmf[off + k]
        k += 1
    return k


@nb.njit(cache=True)
def type1_ratio(kind, a, bb, b, k, ratio):
    """lambda_{b+1,k} / lambda_{b,k}."""
    if kind == KINGMAN:
        return 1.0
    if kind == BETA:
        return (b - k + bb) / (b - 2.0 + a + bb)
    off = (b - 2) * (b - 1) // 2
    return ratio[off + k - 2]


@nb.njit(cache=True)
def chain_path(chain, n, kind, a, bb, g, lam2, pmf, y, x, w):
    """Fill ``y[0..tau]``, ``x[1..tau]``, ``w[1..tau]``; return tau."""
    b = n
    y[0] = n
    i = 0
    while b > 1:
        i += 1
        w[i] = exponential(chain) / g[b]
        d = draw_x(chain, kind, a, bb, b, g, lam2, pmf)
        x[i] = d
        b -= d
        y[i] = b
    return i


@nb.njit(cache=True)
def external_branch_one(chain, aux, n, kind, a, bb, g, lam2, pmf, full):
    """One replicate of (sigma, T, tau, Y_sigma) for individual 1.

    At a collision that loses X blocks from Y, block {1} is absorbed with
    probability (X + 1)/Y.  With ``full`` False the walk stops at sigma and
    tau is returned as -1.
    """
    b = n
    i = 0
    sigma = 0
    t = 0.0
    ysig = 0
    while b > 1:
        i += 1
        wait = exponential(chain) / g[b]
        d = draw_x(chain, kind, a, bb, b, g, lam2, pmf)
        if sigma == 0:
            t += wait
            if uniform(aux) * b < d + 1.0:
                sigma = i
                ysig = b - d
                if not full:
                    return sigma, t, -1, ysig
        b -= d
    return sigma, t, i, ysig


@nb.njit(cache=True)
def external_branch_batch(master, start, count, n, kind, a, bb, g, lam2, pmf,
                          full):
    sig = np.empty(count, np.int64)
    tl = np.empty(count, np.float64)
    tau = np.empty(count, np.int64)
    ys = np.empty(count, np.int64)
    chain = np.empty(4, np.uint64)
    aux = np.empty(4, np.uint64)
    for r in range(count):
        seed_replicate(chain, aux, master, np.uint64(start + r))
        sig[r], tl[r], tau[r], ys[r] = external_branch_one(
            chain, aux, n, kind, a, bb, g, lam2, pmf, full)
    return sig, tl, tau, ys


@nb.njit(cache=True)
def cox_one(chain, aux, n, kind, a, bb, g, lam2, pmf, ratio):
    """Connection time of individual 1 to the coalescent of the other n - 1.

    Between jumps of the (n-1)-chain with b blocks, a binary (Type-2)
    connection fires at rate b * lambda_{b+1,2}; at a jump losing X blocks,
    individual 1 joins (Type-1) with probability
    1 - lambda_{b+1,X+1}/lambda_{b,X+1}.
    """
    b = n - 1
    t = 0.0
    while True:
        rate2 = b * lam2[b + 1]
        if b == 1:
            return t + exponential(aux) / rate2
        wait = exponential(chain) / g[b]
        e = exponential(aux)
        if e < rate2 * wait:
            return t + e / rate2
        t += wait
        d = draw_x(chain, kind, a, bb, b, g, lam2, pmf)
        if uniform(aux) >= type1_ratio(kind, a, bb, b, d + 1, ratio):
            return t
        b -= d


@nb.njit(cache=True)
def cox_batch(master, start, count, n, kind, a, bb, g, lam2, pmf, ratio):
    out = np.empty(count, np.float64)
    chain = np.empty(4, np.uint64)
    aux = np.empty(4, np.uint64)
    for r in range(count):
        seed_replicate(chain, aux, master, np.uint64(start + r))
        out[r] = cox_one(chain, aux, n, kind, a, bb, g, lam2, pmf, ratio)
    return out


@nb.njit(cache=True)
def type1_check(kind, a, bb, n, ratio):
    """Smallest and largest Type-1 probability over 2 <= k <= b < n."""
    lo = 1.0
    hi = 0.0
    for b in range(2, n):
        for k in range(2, b + 1):
            p = 1.0 - type1_ratio(kind, a, bb, b, k, ratio)
            lo = min(lo, p)
            hi = max(hi, p)
    return lo, hi


@nb.njit(cache=True)
def full_partition_one(chain, aux, n, kind, a, bb, g, lam2, pmf, y, x, w):
    """Partition-valued n-coalescent with explicit blocks (bitmasks).

    Merger sizes come from the chain stream exactly as in ``chain_path``;
    the merging blocks are a uniform subset drawn from the aux stream.
    Returns (sigma, T, tau, Y_sigma) for individual 1 (bit 0).
    """
    blocks = np.empty(n, np.int64)
    for j in range(n):
        blocks[j] = 1 << j
    b = n
    y[0] = n
    i = 0
    sigma = 0
    t = 0.0
    ysig = 0
    while b > 1:
        i += 1
        wait = exponential(chain) / g[b]
        w[i] = wait
        d = draw_x(chain, kind, a, bb, b, g, lam2, pmf)
        x[i] = d
        m = d + 1
        merged = 0
        hit = False
        for j in range(m):
            r = j + randbelow(aux, b - j)
            tmp = blocks[j]
            blocks[j] = blocks[r]
            blocks[r] = tmp
            merged |= blocks[j]
            if blocks[j] == 1:
                hit = True
        if sigma == 0:
            t += wait
            if hit:
                sigma = i
                ysig = b - d
        blocks[0] = merged
        for j in range(m, b):
            blocks[j - m + 1] = blocks[j]
        b -= d
        y[i] = b
    return sigma, t, i, ysig


@nb.njit(cache=True)
def full_partition_batch(master, start, count, n, kind, a, bb, g, lam2, pmf):
    sig = np.empty(count, np.int64)
    tl = np.empty(count, np.float64)
    tau = np.empty(count, np.int64)
    ys = np.empty(count, np.int64)
    chain = np.empty(4, np.uint64)
    aux = np.empty(4, np.uint64)
    y = np.empty(n + 1, np.int64)
    x = np.empty(n + 1, np.int64)
    w = np.empty(n + 1, np.float64)
    for r in range(count):
        seed_replicate(chain, aux, master, np.uint64(start + r))
        sig[r], tl[r], tau[r], ys[r] = full_partition_one(
            chain, aux, n, kind, a, bb, g, lam2, pmf, y, x, w)
    return sig, tl, tau, ys


@nb.njit(cache=True)
def first_jump_batch(s, count, b, kind, a, bb, g, lam2, pmf):
    out = np.empty(count, np.int64)
    for r in range(count):
        out[r] = draw_x(s, kind, a, bb, b, g, lam2, pmf)
    return out
