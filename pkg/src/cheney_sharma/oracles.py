"""Brute-force references for the main evaluation path.

Nothing here imports from :mod:`cheney_sharma.abel` or
:mod:`cheney_sharma.operators`: binomials come from an integer Pascal
triangle, powers from repeated squaring, sums are naive left-to-right.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .core import OperatorParams, SimplexPoint

DIRECT_SUM_MAX_N = 30
DIRECT_SUM_MAX_NBETA = 5.0


@lru_cache(maxsize=None)
def pascal_row(m: int) -> tuple[int, ...]:
    row = [1]
    for _ in range(m):
        row = [1] + [a + b for a, b in zip(row, row[1:])] + [1]
    return tuple(row)


def int_power(base, e: int):
    """base**e for a nonnegative integer e by repeated squaring (0**0 = 1)."""
    result = np.ones_like(np.asarray(base, dtype=float))
    square = np.asarray(base, dtype=float)
    while e:
        if e & 1:
            result = result * square
        square = square * square
        e >>= 1
    return result


def _abel_term(u, k: int, beta: float):
    # u (u + k beta)^(k-1); the k = 0 term is 1 by convention.
    if k == 0:
        return np.ones_like(np.asarray(u, dtype=float))
    return u * int_power(u + k * beta, k - 1)


def abel_jensen_residual(u, v, beta: float, m: int):
    """Relative residual |LHS - RHS| / max(1, |LHS|) of

        (u+v)(u+v+m beta)^(m-1) = sum_k C(m,k) u(u+k beta)^(k-1) v(v+(m-k)beta)^(m-k-1)

    evaluated term by term in plain floating point.  ``u`` and ``v`` may be
    arrays.  Raises OverflowError if any term is not finite.
    """
    if m < 1 or int(m) != m:
        raise ValueError(f"m must be a positive integer, got {m}")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u < 0) or np.any(v < 0) or beta < 0:
        raise ValueError("abel_jensen_residual needs u, v, beta >= 0")
    with np.errstate(over="ignore", invalid="ignore"):
        lhs = (u + v) * int_power(u + v + m * beta, m - 1)
        rhs = np.zeros_like(lhs)
        for k, c in enumerate(pascal_row(m)):
            rhs = rhs + c * _abel_term(u, k, beta) * _abel_term(v, m - k, beta)
    if not (np.all(np.isfinite(lhs)) and np.all(np.isfinite(rhs))):
        raise OverflowError(f"direct Abel-Jensen evaluation overflows at m={m}, beta={beta}")
    res = np.abs(lhs - rhs) / np.maximum(1.0, np.abs(lhs))
    return float(res) if res.ndim == 0 else res


@lru_cache(maxsize=64)
def _bernstein_tables(n: int):
    # (k1, k2, coefficient) with the multinomial as a product of Pascal rows.
    k1s, k2s, coef = [], [], []
    row_n = pascal_row(n)
    for a in range(n + 1):
        row_rest = pascal_row(n - a)
        for b in range(n - a + 1):
            k1s.append(a)
            k2s.append(b)
            coef.append(float(row_n[a] * row_rest[b]))
    return np.array(k1s), np.array(k2s), np.array(coef)


def _power_table(base: float, n: int) -> np.ndarray:
    out = np.empty(n + 1)
    acc = 1.0
    for j in range(n + 1):
        out[j] = acc
        acc *= base
    return out


def bernstein_simplex(f, n: int, x) -> float:
    """Degree-n Bernstein polynomial of ``f`` on the simplex at ``x``."""
    if not isinstance(x, SimplexPoint):
        x = SimplexPoint(*x)
    k1, k2, coef = _bernstein_tables(n)
    r = 1.0 - x.x1 - x.x2
    r = r if r > 0.0 else 0.0
    p1, p2, p3 = _power_table(x.x1, n), _power_table(x.x2, n), _power_table(r, n)
    basis = coef * p1[k1] * p2[k2] * p3[n - k1 - k2]
    fvals = np.asarray(f(k1 / n, k2 / n), dtype=float) * np.ones(k1.size)
    return float(np.dot(basis, fvals))


def direct_sum_G(f, params: OperatorParams, x) -> float:
    """G_n^beta(f; x) by a plain double loop, no logs, no compensation.

    Only for n <= 30 and n*beta <= 5, where nothing overflows.
    """
    n, beta = params.n, params.beta
    if n > DIRECT_SUM_MAX_N or n * beta > DIRECT_SUM_MAX_NBETA:
        raise ValueError(
            f"direct_sum_G is limited to n <= {DIRECT_SUM_MAX_N} and "
            f"n*beta <= {DIRECT_SUM_MAX_NBETA}, got n={n}, beta={beta}")
    if not isinstance(x, SimplexPoint):
        x = SimplexPoint(*x)
    r = 1.0 - x.x1 - x.x2
    r = r if r > 0.0 else 0.0
    row_n = pascal_row(n)
    total = 0.0
    for k1 in range(n + 1):
        row_rest = pascal_row(n - k1)
        for k2 in range(n - k1 + 1):
            term = (row_n[k1] * row_rest[k2]
                    * float(_abel_term(x.x1, k1, beta))
                    * float(_abel_term(x.x2, k2, beta))
                    * float(_abel_term(r, n - k1 - k2, beta)))
            total += float(f(k1 / n, k2 / n)) * term
    return total / int_power(1.0 + n * beta, n - 1).item()
