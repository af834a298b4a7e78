"""Independent reference computations used only by the tests.

These deliberately avoid the library's backward-recursion code path: the
dense oracle assembles the full first-step linear system and hands it to a
generic solver; the below-threshold brute force checks the two-sided delay
condition directly with the constant-low-rate closed forms.
"""
from __future__ import annotations

import numpy as np


def dense_delay_solve(policy, strategy, params):
    """Solve the W(n, m) system as one dense linear system.

    Returns a dict {(n, m): W}. Equations, one per unknown:
    (lam p_m + mu_m) W(n,m) - lam p_m W(n,m+1) - mu_m W(n-1,m-1) = 1,
    with the last term absent for n = 0 and the middle absent at m = n0
    (where p_{n0} = 0 anyway).
    """
    n0 = strategy.balk_state
    if n0 == 0:
        return {}
    lam = params.arrival_rate
    unknowns = [(n, m) for n in range(n0) for m in range(n + 1, n0 + 1)]
    index = {pair: i for i, pair in enumerate(unknowns)}
    size = len(unknowns)
    A = np.zeros((size, size))
    b = np.ones(size)
    for (n, m), i in index.items():
        pm = strategy.prob(m)
        mum = policy.rate_at(m)
        A[i, i] = lam * pm + mum
        if m < n0:
            A[i, index[(n, m + 1)]] = -lam * pm
        if n >= 1:
            A[i, index[(n - 1, m - 1)]] = -mum
    sol = np.linalg.solve(A, b)
    return {pair: sol[i] for pair, i in index.items()}


def brute_force_below_threshold(params, policy, tol=1e-9):
    """Pure equilibria with balk state in {0..T} for a two-rate policy,
    checked candidate by candidate from the closed-form delays.

    W(n0-1, n0) = n0/mu_l while the balk state stays at or below T, and the
    hypothetical joiner at n0 sees rate mu_l below T and mu_h at T.
    """
    T, mu_l, mu_h = policy.threshold_form
    r = params.r_tilde
    hits = []
    for n0 in range(0, T + 1):
        w = n0 / mu_l
        mu_next = mu_l if n0 < T else mu_h
        if r - 1.0 / mu_next - tol <= w <= r + tol:
            hits.append(n0)
    return hits


def naor_set(r_tilde, mu):
    """Classical constant-rate equilibrium set {n >= 0 : r mu - 1 <= n <= r mu}."""
    import math

    # the same 1e-9 integer tolerance the solver uses, so that a product
    # landing one ulp away from an integer is classified identically
    lo = max(math.ceil(r_tilde * mu - 1.0 - 1e-9), 0)
    hi = math.floor(r_tilde * mu + 1e-9)
    return [n for n in range(lo, hi + 1)]
