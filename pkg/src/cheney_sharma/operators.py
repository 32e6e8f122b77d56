"""Evaluation of the univariate operator Q_n^beta, its non-tensor bivariate
extension G_n^beta on the simplex, and the ordered-pair difference expansion
G(f; y) - G(f; x) written as one sum over pairs of lattice indices."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .abel import (bivariate_weight_matrix, compensated_sum, log_abel_scaled,
                   log_factorials, row_sums, univariate_weight_matrix)
from .core import (OperatorParams, SimplexPoint, componentwise_leq, lattice_arrays,
                   lattice_position)

# Upper bound on points x lattice-size entries materialised per batch.
BATCH_ENTRIES = 1 << 21


def _as_point(x) -> SimplexPoint:
    return x if isinstance(x, SimplexPoint) else SimplexPoint(*x)


def node_values(f, n: int) -> np.ndarray:
    """f(k1/n, k2/n) over the degree-n lattice, one evaluation per node."""
    k1, k2 = lattice_arrays(n)
    return np.asarray(f(k1 / n, k2 / n), dtype=float) * np.ones(k1.size)


def eval_Q(f, params: OperatorParams, x: float) -> float:
    """Q_n^beta(f; x) for x in [0, 1]; ``f`` is used through f(t, 0)."""
    return float(eval_Q_many(f, params, [x])[0])


def eval_Q_many(f, params: OperatorParams, xs, method: str = "auto") -> np.ndarray:
    n = params.n
    t = np.arange(n + 1) / n
    values = np.asarray(f(t, np.zeros_like(t)), dtype=float) * np.ones(n + 1)
    weights = univariate_weight_matrix(params, xs, method)
    return row_sums(weights * values)


def eval_G(f, params: OperatorParams, x, method: str = "auto") -> float:
    """G_n^beta(f; x) at a simplex point."""
    x = _as_point(x)
    return float(eval_G_many(f, params, [x.x1], [x.x2], method)[0])


def eval_G_many(f, params: OperatorParams, x1s, x2s, method: str = "auto") -> np.ndarray:
    """G_n^beta(f) at many simplex points; the node values are shared and
    the points are processed in memory-bounded chunks."""
    x1s = np.atleast_1d(np.asarray(x1s, dtype=float))
    x2s = np.atleast_1d(np.asarray(x2s, dtype=float))
    if x1s.shape != x2s.shape:
        raise ValueError("coordinate arrays differ in shape")
    values = node_values(f, params.n)
    step = max(1, BATCH_ENTRIES // values.size)
    out = np.empty(x1s.size)
    for start in range(0, x1s.size, step):
        stop = start + step
        w = bivariate_weight_matrix(params, x1s[start:stop], x2s[start:stop], method)
        out[start:stop] = row_sums(w * values)
    return out


def marginal_function(g, axis: int):
    """The bivariate function (t1, t2) -> g(t_axis)."""
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis!r}")

    def lifted(t1, t2):
        t = t1 if axis == 1 else t2
        t = np.asarray(t, dtype=float)
        return g(t, np.zeros_like(t))

    return lifted


def eval_G_marginal(g, axis: int, params: OperatorParams, x) -> float:
    """G applied to a function of one coordinate.

    Agrees with ``eval_Q(g, params, x_axis)``; the bivariate sum collapses to
    the univariate one by the Abel-Jensen identity in the other coordinate.
    """
    x = _as_point(x)
    return eval_G(marginal_function(g, axis), params, x)


@lru_cache(maxsize=8)
def _pair_lattice(n: int) -> tuple[np.ndarray, ...]:
    """All (k1, k2, l1, l2) with |k| + |l| <= n: outer walk over the degree-n
    lattice, inner walk over the degree-(n - |k|) lattice."""
    k1, k2 = lattice_arrays(n)
    parts = []
    for a, b in zip(k1.tolist(), k2.tolist()):
        l1, l2 = lattice_arrays(n - a - b)
        parts.append(np.stack([np.full(l1.size, a), np.full(l1.size, b), l1, l2]))
    out = tuple(np.concatenate(parts, axis=1))
    for arr in out:
        arr.flags.writeable = False
    return out


def difference_kernel(params: OperatorParams, x: SimplexPoint, y: SimplexPoint):
    """Kernel of the ordered-pair expansion of G(f; y) - G(f; x).

    Returns ``(k1, k2, l1, l2, weights)``; the weights are
    s^(1-n) n!/(k! l! r!) x^e (x + k beta)^(k-e) (y - x)^e (y - x + l beta)^(l-e)
    (1-|y|)[1-|y| + r beta]^(r-1) with r = n - |k| - |l|, in log space.
    """
    if not componentwise_leq(x, y):
        raise ValueError(f"difference expansion needs x <= y componentwise, got {x} and {y}")
    n, beta = params.n, params.beta
    k1, k2, l1, l2 = _pair_lattice(n)
    r = n - k1 - k2 - l1 - l2
    lf = log_factorials(n)
    ks = np.arange(n + 1)
    log_w = (math.log1p(n * beta) + lf[n] - lf[k1] - lf[k2] - lf[l1] - lf[l2] - lf[r]
             + log_abel_scaled(x.x1, ks, beta, n)[k1]
             + log_abel_scaled(x.x2, ks, beta, n)[k2]
             + log_abel_scaled(y.x1 - x.x1, ks, beta, n)[l1]
             + log_abel_scaled(y.x2 - x.x2, ks, beta, n)[l2]
             + log_abel_scaled(y.rest, ks, beta, n)[r])
    return k1, k2, l1, l2, np.exp(log_w)


def difference_expansion(f, params: OperatorParams, x, y) -> float:
    """G(f; y) - G(f; x) for x <= y, summed as
    sum_{k,l} [f((k+l)/n) - f(k/n)] * kernel(k, l)."""
    return difference_expansions([f], params, x, y)[0]


def difference_expansions(fs, params: OperatorParams, x, y) -> list[float]:
    """:func:`difference_expansion` for several functions sharing one kernel."""
    x, y = _as_point(x), _as_point(y)
    n = params.n
    k1, k2, l1, l2, w = difference_kernel(params, x, y)
    upper = lattice_position(n, k1 + l1, k2 + l2)
    lower = lattice_position(n, k1, k2)
    out = []
    for f in fs:
        values = node_values(f, n)
        out.append(compensated_sum(w * (values[upper] - values[lower])))
    return out
