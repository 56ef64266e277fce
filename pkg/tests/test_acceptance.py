"""Acceptance gate: one test per criterion, each at its stated tolerance.

Every test prints a ``PASS``/``FAIL`` line (also collected into the
terminal summary) before asserting.
"""

import time

import numpy as np
from scipy.special import gamma

from coallab import measures as M
from coallab import stats as St
from coallab.rates import RateTable, rate_table

from conftest import ACCEPTANCE_LINES

SEED = 42
REPS = 20_000


def report(number, ok, text):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_01_rate_exactness():
    start = time.perf_counter()
    worst_quad, worst_rec = 0.0, 0.0
    for alpha in (1.2, 1.5, 1.8):
        beta_m = M.beta(2 - alpha, alpha)
        closed = RateTable(beta_m, 200)
        quad_tab = RateTable(M.density("beta", M.c0_alpha(beta_m)[0], alpha), 200)
        for tab in (closed, quad_tab):
            for b in range(2, 201):
                nxt = tab.lam_row(b + 1)
                lam = tab.lam_row(b)
                rec = np.abs(lam - (nxt[1:] + nxt[:-1])) / lam
                worst_rec = max(worst_rec, rec.max())
        for b in range(2, 201):
            rel = np.abs(quad_tab.lam_row(b) / closed.lam_row(b) - 1)
            worst_quad = max(worst_quad, rel.max())
    elapsed = time.perf_counter() - start
    ok = worst_quad <= 1e-8 and worst_rec <= 1e-10 and elapsed < 60
    assert report(1, ok, f"quadrature vs closed form max rel {worst_quad:.2e} "
                         f"(<= 1e-8), recursion max rel {worst_rec:.2e} "
                         f"(<= 1e-10), {elapsed:.1f}s (< 60s)")


def test_criterion_02_total_rate_asymptotics(beta15):
    c0, alpha = M.c0_alpha(beta15)
    n = 10_000
    tab = rate_table(beta15, n)
    dev = abs(tab.total_rate(n) / (c0 * gamma(2 - alpha) * n**alpha) - 1)
    assert report(2, dev <= 0.01, f"|g_n/(C0 Gamma(2-a) n^a) - 1| = {dev:.2e} "
                                  "at n=1e4 (<= 0.01)")


def test_criterion_03_first_jump_mean(beta15):
    mean = rate_table(beta15, 10_000).first_jump_mean(10_000)
    dev = abs(mean - 2.0)
    assert report(3, dev <= 0.05, f"E[X1] at n=1e4 = {mean:.6f}, |E - 2| = "
                                  f"{dev:.4f} (<= 0.05)")


def test_criterion_04_sigma_limit(beta15):
    reports = St.convergence_table(beta15, [500, 5000, 50_000], REPS, SEED)
    main = reports[1]
    mono = St.is_decreasing(reports)
    ks = ", ".join(f"{r.statistic:.4f}" for r in reports)
    ok = main.statistic <= 0.02 and mono
    assert report(4, ok, f"KS sigma/(n(a-1)) vs Beta(1,1.5) at n=5000: "
                         f"{main.statistic:.4f} (<= 0.02); KS over n=500,5000,"
                         f"50000: {ks} (decreasing: {mono})")


def test_criterion_05_tlen_limit(beta15):
    r = St.verify_tlen(beta15, 5000, REPS, SEED)
    assert report(5, r.passed, f"KS n^(a-1) T vs F_T at n=5000: "
                               f"{r.statistic:.4f} (<= 0.02)")


def test_criterion_06_cox_equivalence(beta15):
    r = St.verify_cox(beta15, 1000, REPS, SEED)
    assert report(6, r.passed, f"two-sample KS direct vs Cox at n=1000: "
                               f"{r.statistic:.4f} (<= critical "
                               f"{r.threshold:.4f} at 1e-3)")


def test_criterion_07_block_count_limit(beta15):
    r = St.verify_blockcount(beta15, 10_000, 5.0, 512, 100, SEED)
    within = r.details["within_eps"]
    assert report(7, r.passed, f"{within}/100 paths with sup|R/n - limit| <= "
                               f"0.03 at n=1e4 (need >= 95); median sup "
                               f"{r.details['median_sup']:.4f}")


def test_criterion_08_kingman(kingman):
    block = St.verify_blockcount(kingman, 10_000, 10.0, 512, 100, SEED)
    tlen = St.verify_tlen(kingman, 5000, REPS, SEED, mode="kingman")
    ok = block.passed and tlen.passed
    assert report(8, ok, f"Kingman: {block.details['within_eps']}/100 paths "
                         f"with sup <= 0.03 (need >= 95); KS nT vs "
                         f"1-4/(2+t)^2 = {tlen.statistic:.4f} (<= 0.02)")


def test_criterion_09_small_n_oracle(beta15):
    p_sigma, mean_t = St.verify_small_n(beta15, 3, 1_000_000, SEED)
    chi = [St.verify_partition_oracle(beta15, n, 1_000_000, SEED)
           for n in range(2, 7)]
    ok = p_sigma.passed and mean_t.passed and all(c.passed for c in chi)
    chis = ", ".join(f"n={c.n}: {c.statistic:.1f}/{c.threshold:.1f}"
                     for c in chi)
    assert report(9, ok, f"P(sigma=1) = {p_sigma.details['estimate']:.5f} "
                         f"({p_sigma.statistic:.2f} SE), E[T] = "
                         f"{mean_t.details['estimate']:.5f} "
                         f"({mean_t.statistic:.2f} SE), both within 3 SE of "
                         f"0.7; chi-square (stat/critical) {chis}")


def test_criterion_10_ratio_limits(beta15):
    sig_tau, _, y_sig = St.verify_ratios(beta15, 5000, REPS, SEED)
    ok = sig_tau.passed and y_sig.passed
    assert report(10, ok, f"KS Y_sigma/n vs x^1.5 = {y_sig.statistic:.4f}, "
                          f"KS sigma/tau vs Beta(1,1.5) = "
                          f"{sig_tau.statistic:.4f} (both <= 0.02)")


def test_criterion_11_bolthausen_sznitman():
    bs = M.beta(1.0, 1.0)
    ns = [100, 1000, 10_000]
    sig = St.convergence_table(bs, ns, REPS, SEED, verifier="sigma", mode="bs")
    tl = St.convergence_table(bs, ns, REPS, SEED, verifier="tlen", mode="bs")
    ok = St.is_decreasing(sig) and St.is_decreasing(tl)
    fmt = lambda rs: ", ".join(f"{r.statistic:.4f}" for r in rs)  # noqa: E731
    assert report(11, ok, f"Bolthausen-Sznitman KS over n=1e2,1e3,1e4: "
                          f"(log n/n) sigma {fmt(sig)}; log(n) T {fmt(tl)} "
                          "(monotone decrease); small-time a.s. law out of scope")
