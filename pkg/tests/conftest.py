"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the package's own quadrature/root
machinery: plain bisection for roots, Richardson-refined composite
midpoint for integrals (with the square-root substitution applied at the
code level, not through the package helpers).  Expected values frozen in
the tests were produced by these.
"""

import math

import pytest


def bisect_root(f, a, b, iters=200):
    """Plain bisection; the independent root oracle."""
    fa, fb = f(a), f(b)
    assert fa * fb < 0, "oracle bracket must straddle a sign change"
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if fa * fm < 0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def _midpoint(g, a, b, n):
    h = (b - a) / n
    return h * sum(g(a + (i + 0.5) * h) for i in range(n))


def refined_midpoint(g, a, b, n0=1024):
    """Composite midpoint with two Richardson levels; returns (value, err)."""
    v0 = _midpoint(g, a, b, n0)
    v1 = _midpoint(g, a, b, 2 * n0)
    v2 = _midpoint(g, a, b, 4 * n0)
    r1 = (4 * v1 - v0) / 3
    r2 = (4 * v2 - v1) / 3
    rr = (16 * r2 - r1) / 15
    return rr, abs(rr - r2)


def refined_singular_integral(g, a, b, singular_lower, singular_upper, n0=1024):
    """Independent oracle for integrals with inverse-sqrt endpoint blowup.

    Splits at the midpoint and substitutes t = end +/- s**2 on the flagged
    halves before the midpoint refinement.
    """
    m = 0.5 * (a + b)
    total, err = 0.0, 0.0
    if singular_lower:
        v, e = refined_midpoint(lambda s: 2 * s * g(a + s * s), 0.0, math.sqrt(m - a), n0)
    else:
        v, e = refined_midpoint(g, a, m, n0)
    total += v
    err += e
    if singular_upper:
        v, e = refined_midpoint(lambda s: 2 * s * g(b - s * s), 0.0, math.sqrt(b - m), n0)
    else:
        v, e = refined_midpoint(g, m, b, n0)
    return total + v, err + e


@pytest.fixture(scope="session")
def oracle_roots_C1():
    """Bisection roots of -xi^{8/3} + 3 xi^2 - 3 (the C = 1 strip)."""
    T = lambda x: -x ** (8.0 / 3.0) + 3.0 * x * x - 3.0
    lo = bisect_root(T, 1e-9, 3.375)
    hi = bisect_root(T, 3.375, 10.0)
    return lo, hi
