"""Independent reference computations used only by the tests."""

import itertools
import math

import numpy as np


def negative_count(K, M, lam):
    """Eigenvalues of ``K x = t M x`` below ``lam``.

    Counts sign changes in the leading principal minors of ``K - lam M``
    (Sylvester), computed as Gaussian-elimination pivots without pivoting.
    """
    A = np.array(K, dtype=float) - lam * np.array(M, dtype=float)
    n = len(A)
    neg = 0
    for i in range(n):
        piv = A[i, i]
        if piv == 0.0:
            piv = 1e-300
        if piv < 0:
            neg += 1
        if i + 1 < n:
            A[i + 1 :, i + 1 :] -= np.outer(A[i + 1 :, i], A[i, i + 1 :]) / piv
    return neg


def det_roots(K, M, tol=1e-14):
    """All roots of ``det(K - lam M)`` by bisection on the minor sign count."""
    n = len(K)
    lo = -1.0
    while negative_count(K, M, lo) > 0:
        lo *= 2
    hi = 1.0
    while negative_count(K, M, hi) < n:
        hi *= 2
    roots = []
    for k in range(1, n + 1):
        a, b = lo, hi
        while b - a > tol * max(1.0, abs(a), abs(b)):
            mid = 0.5 * (a + b)
            if negative_count(K, M, mid) >= k:
                b = mid
            else:
                a = mid
        roots.append(0.5 * (a + b))
    return np.array(roots)


def brute_box_spectrum(factors_per_axis, K, cap=40):
    """Sorted first ``K`` sums over a large fixed index cap (no certificate)."""
    sums = sorted(
        sum(f(n) for f, n in zip(factors_per_axis, idx))
        for idx in itertools.product(range(1, cap + 1), repeat=len(factors_per_axis))
    )
    return sums[:K]


def sturm_factor(pair, n, length=math.pi):
    """1D eigenvalue by the textbook formula, written independently."""
    a, b = pair
    if a == b == "D":
        c = n
    elif a == b == "N":
        c = n - 1
    else:
        c = n - 0.5
    return (c * math.pi / length) ** 2
