"""Abel-type factors u(u + k*beta)^(k-1) and the Cheney-Sharma basis weights.

Two evaluation paths produce the same weights:

* direct: exact integer multinomials times float powers; cheap and accurate
  while nothing overflows.
* log-space: every Abel factor is rescaled by s^k with s = 1 + n*beta, so that
  the normaliser s^(1-n) collapses to a single factor s and each log term
  stays O(log n) instead of O(n log(n*beta)).  One exponentiation per weight.

``auto`` picks direct for n <= DIRECT_MAX_N and n*beta <= DIRECT_MAX_NBETA.
All weight sums go through :func:`compensated_sum` (``math.fsum``).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .core import MultiIndex, OperatorParams, SimplexPoint, lattice_arrays

DIRECT_MAX_N = 20
DIRECT_MAX_NBETA = 5.0
LOG_FACTORIAL_NMAX = 4096

_METHODS = ("auto", "direct", "log")


# -- log factorials ---------------------------------------------------------

_lf_lock = threading.Lock()
_lf_table: np.ndarray | None = None


def _build_log_factorials(nmax: int) -> np.ndarray:
    # log of the exact integer factorial is good to ~1 ulp; cumulative sums
    # of log(k) would drift by O(n) ulps.
    out = np.empty(nmax + 1)
    fact = 1
    out[0] = 0.0
    for k in range(1, nmax + 1):
        fact *= k
        out[k] = math.log(fact)
    out.flags.writeable = False
    return out


def log_factorials(nmax: int = LOG_FACTORIAL_NMAX) -> np.ndarray:
    """Read-only table of log(k!) for k = 0..max(nmax, 4096)."""
    global _lf_table
    table = _lf_table
    if table is None or table.size <= nmax:
        with _lf_lock:
            table = _lf_table
            if table is None or table.size <= nmax:
                table = _build_log_factorials(max(nmax, LOG_FACTORIAL_NMAX))
                _lf_table = table
    return table


@lru_cache(maxsize=32)
def log_multinomials(n: int) -> np.ndarray:
    """log(n! / (k1! k2! (n-|k|)!)) over the degree-n lattice."""
    lf = log_factorials(n)
    k1, k2 = lattice_arrays(n)
    out = lf[n] - lf[k1] - lf[k2] - lf[n - k1 - k2]
    out.flags.writeable = False
    return out


@lru_cache(maxsize=32)
def _multinomials(n: int) -> np.ndarray:
    k1, k2 = lattice_arrays(n)
    out = np.array([float(math.comb(n, a) * math.comb(n - a, b))
                    for a, b in zip(k1.tolist(), k2.tolist())])
    out.flags.writeable = False
    return out


@lru_cache(maxsize=32)
def _log_binomials(n: int) -> np.ndarray:
    lf = log_factorials(n)
    k = np.arange(n + 1)
    out = lf[n] - lf[k] - lf[n - k]
    out.flags.writeable = False
    return out


# -- scalar Abel factors ----------------------------------------------------

def _check_abel_args(u: float, k: int, beta: float) -> None:
    if u < 0:
        raise ValueError(f"Abel factor needs u >= 0, got {u}")
    if beta < 0:
        raise ValueError(f"Abel factor needs beta >= 0, got {beta}")
    if k < 0 or int(k) != k:
        raise ValueError(f"Abel factor needs a nonnegative integer k, got {k}")


def abel_factor(u: float, k: int, beta: float) -> float:
    """u * (u + k*beta)^(k-1), with the value 1 at k = 0 (also when u = 0).

    Raises OverflowError when the result is not representable; use
    :func:`log_abel_factor` then.
    """
    _check_abel_args(u, k, beta)
    if k == 0:
        return 1.0
    if u == 0:
        return 0.0
    if k == 1:
        return float(u)
    try:
        value = u * (u + k * beta) ** (k - 1)
    except OverflowError:
        value = math.inf
    if math.isinf(value):
        raise OverflowError(
            f"abel_factor({u}, {k}, {beta}) overflows; use log_abel_factor")
    return value


def log_abel_factor(u: float, k: int, beta: float) -> float:
    """Natural log of :func:`abel_factor`; ``-inf`` when the factor is 0."""
    _check_abel_args(u, k, beta)
    if k == 0:
        return 0.0
    if u == 0:
        return -math.inf
    if k == 1:
        return math.log(u)
    return math.log(u) + (k - 1) * math.log(u + k * beta)


# -- vectorised factors -----------------------------------------------------

def log_abel_scaled(u, k, beta: float, n: int):
    """log( u (u + k beta)^(k-1) / s^k ) with s = 1 + n*beta, elementwise.

    Needs u + k*beta <= s, which holds whenever u <= 1 and k <= n.  The
    factor (u + k beta)/s is evaluated through log1p near 1 so the (k-1)
    multiplier does not amplify cancellation.
    """
    u = np.asarray(u, dtype=float)
    k = np.asarray(k)
    log_s = math.log1p(n * beta)
    s = 1.0 + n * beta
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (u + k * beta) / s
        log_ratio = np.where(ratio > 0.5,
                             np.log1p((u - 1.0 - (n - k) * beta) / s),
                             np.log(ratio))
        body = (np.log(u) - log_s) + (k - 1) * log_ratio
    out = np.where(u > 0, body, -np.inf)
    return np.where(k == 0, 0.0, out)


def _direct_abel(u, k, beta: float):
    u = np.asarray(u, dtype=float)
    k = np.asarray(k)
    with np.errstate(over="ignore", invalid="ignore"):
        power = np.power(u + k * beta, np.maximum(k - 1, 0))
        return np.where(k == 0, 1.0, u * power)


# -- weight tables ----------------------------------------------------------

def compensated_sum(values) -> float:
    """Error-free accumulated sum (Shewchuk / ``math.fsum``)."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


def row_sums(matrix: np.ndarray) -> np.ndarray:
    return np.array([math.fsum(row) for row in np.atleast_2d(matrix).tolist()])


def choose_method(params: OperatorParams, method: str = "auto") -> str:
    if method not in _METHODS:
        raise ValueError(f"method must be one of {_METHODS}, got {method!r}")
    if method != "auto":
        return method
    if params.n <= DIRECT_MAX_N and params.n * params.beta <= DIRECT_MAX_NBETA:
        return "direct"
    return "log"


def _finite_or_raise(w: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(w)):
        raise OverflowError("direct weight evaluation overflowed; use method='log'")
    return w


def univariate_weight_matrix(params: OperatorParams, xs, method: str = "auto") -> np.ndarray:
    """Weights of Q_n^beta at every x in ``xs``; shape (len(xs), n+1)."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if xs.ndim != 1 or np.any(~np.isfinite(xs)) or np.any(xs < 0) or np.any(xs > 1):
        raise ValueError("univariate points must lie in [0, 1]")
    n, beta = params.n, params.beta
    k = np.arange(n + 1)
    u = xs[:, None]
    v = 1.0 - u
    if choose_method(params, method) == "direct":
        s = 1.0 + n * beta
        binom = np.array([float(math.comb(n, j)) for j in range(n + 1)])
        with np.errstate(over="ignore", invalid="ignore"):
            w = s ** (1 - n) * binom * _direct_abel(u, k, beta) * _direct_abel(v, n - k, beta)
        return _finite_or_raise(w)
    log_w = (math.log1p(n * beta) + _log_binomials(n)
             + log_abel_scaled(u, k, beta, n) + log_abel_scaled(v, n - k, beta, n))
    return np.exp(log_w)


def bivariate_weight_matrix(params: OperatorParams, x1s, x2s, method: str = "auto") -> np.ndarray:
    """Weights of G_n^beta at the points (x1s[i], x2s[i]).

    Returns shape (P, (n+1)(n+2)/2), columns in lattice order.  Points are
    assumed to be validated simplex points.
    """
    x1 = np.atleast_1d(np.asarray(x1s, dtype=float))[:, None]
    x2 = np.atleast_1d(np.asarray(x2s, dtype=float))[:, None]
    rest = np.maximum(0.0, 1.0 - x1 - x2)
    n, beta = params.n, params.beta
    k1, k2 = lattice_arrays(n)
    k3 = n - k1 - k2
    # factors depend on a single exponent: evaluate n+1 of them, then gather
    ks = np.arange(n + 1)
    if choose_method(params, method) == "direct":
        s = 1.0 + n * beta
        with np.errstate(over="ignore", invalid="ignore"):
            w = (s ** (1 - n) * _multinomials(n) * _direct_abel(x1, ks, beta)[:, k1]
                 * _direct_abel(x2, ks, beta)[:, k2] * _direct_abel(rest, ks, beta)[:, k3])
        return _finite_or_raise(w)
    log_w = (math.log1p(n * beta) + log_multinomials(n)
             + log_abel_scaled(x1, ks, beta, n)[:, k1]
             + log_abel_scaled(x2, ks, beta, n)[:, k2]
             + log_abel_scaled(rest, ks, beta, n)[:, k3])
    return np.exp(log_w)


@dataclass(frozen=True)
class WeightTable:
    """Basis weights of one operator at one point.

    ``k2`` is None for the univariate operator, where ``point`` is a float.
    """

    params: OperatorParams
    point: Union[SimplexPoint, float]
    k1: np.ndarray
    k2: np.ndarray | None
    weights: np.ndarray

    @property
    def univariate(self) -> bool:
        return self.k2 is None

    @property
    def entries(self) -> dict:
        if self.univariate:
            return dict(zip(self.k1.tolist(), self.weights.tolist()))
        return {MultiIndex(a, b): w for a, b, w in
                zip(self.k1.tolist(), self.k2.tolist(), self.weights.tolist())}

    def total(self) -> float:
        return compensated_sum(self.weights)

    def to_csv(self) -> str:
        if self.univariate:
            rows = ["k,weight"]
            rows += [f"{k},{w:.17g}" for k, w in zip(self.k1.tolist(), self.weights.tolist())]
        else:
            rows = ["k1,k2,weight"]
            rows += [f"{a},{b},{w:.17g}" for a, b, w in
                     zip(self.k1.tolist(), self.k2.tolist(), self.weights.tolist())]
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        if self.univariate:
            weights = [{"k": k, "weight": w} for k, w in
                       zip(self.k1.tolist(), self.weights.tolist())]
            point = self.point
        else:
            weights = [{"k1": a, "k2": b, "weight": w} for a, b, w in
                       zip(self.k1.tolist(), self.k2.tolist(), self.weights.tolist())]
            point = [self.point.x1, self.point.x2]
        return {"n": self.params.n, "beta": self.params.beta, "x": point, "weights": weights}


def univariate_weights(params: OperatorParams, x: float, method: str = "auto") -> WeightTable:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"univariate point must lie in [0, 1], got {x}")
    w = univariate_weight_matrix(params, [x], method)[0]
    w.flags.writeable = False
    return WeightTable(params, x, np.arange(params.n + 1), None, w)


def bivariate_weights(params: OperatorParams, x: SimplexPoint, method: str = "auto") -> WeightTable:
    if not isinstance(x, SimplexPoint):
        x = SimplexPoint(*x)
    w = bivariate_weight_matrix(params, [x.x1], [x.x2], method)[0]
    w.flags.writeable = False
    k1, k2 = lattice_arrays(params.n)
    return WeightTable(params, x, k1, k2, w)
