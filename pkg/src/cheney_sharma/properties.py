"""Randomised scans of the identities and preservation properties.

Every scan returns a :class:`VerificationReport`.  Randomness is counter
based: draw ``j`` of trial ``i`` is a pure function of ``(seed, stream, i, j)``

    key_i  = mix64(seed XOR i XOR (stream << 56))
    u_ij   = (mix64(key_i + (j + 1) * 0x9E3779B97F4A7C15) >> 11) * 2**-53

with ``mix64`` the splitmix64 finaliser.  Trials can therefore be evaluated
in any order or split across workers and still yield the same report.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .abel import bivariate_weight_matrix, row_sums
from .core import (CORPUS, FunctionDescriptor, LipschitzSpec, OperatorParams,
                   SimplexPoint, lattice_arrays)
from .operators import (BATCH_ENTRIES, difference_expansions, eval_G_many, eval_Q_many,
                        marginal_function)
from .oracles import abel_jensen_residual, bernstein_simplex

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# stream ids keep the sample sets of different sub-checks independent
_STREAM_POINTS, _STREAM_PAIRS, _STREAM_ORDERED, _STREAM_ADDITIVE = range(4)


# -- deterministic sampling -------------------------------------------------

def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def trial_uniforms(seed: int, stream: int, trials: np.ndarray, draw: int) -> np.ndarray:
    """Uniform [0, 1) variate number ``draw`` of each trial index in ``trials``."""
    trials = np.asarray(trials, dtype=np.uint64)
    salt = np.uint64(((seed & MASK64) ^ (stream << 56)) & MASK64)
    key = mix64(trials ^ salt)
    with np.errstate(over="ignore"):
        z = mix64(key + np.uint64(((draw + 1) * GOLDEN) & MASK64))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def _reflect(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # uniform on the unit square -> uniform on the simplex
    flip = a + b > 1.0
    return np.where(flip, 1.0 - a, a), np.where(flip, 1.0 - b, b)


def sample_points(seed: int, count: int, stream: int = _STREAM_POINTS, first_draw: int = 0):
    idx = np.arange(count)
    a = trial_uniforms(seed, stream, idx, first_draw)
    b = trial_uniforms(seed, stream, idx, first_draw + 1)
    return _reflect(a, b)


def sample_pairs(seed: int, count: int):
    """Independent uniform x, y in S (all relative orders occur)."""
    x1, x2 = sample_points(seed, count, _STREAM_PAIRS, 0)
    y1, y2 = sample_points(seed, count, _STREAM_PAIRS, 2)
    return x1, x2, y1, y2


def sample_ordered_pairs(seed: int, count: int, max_attempts: int = 256):
    """Pairs lo <= hi in S: componentwise min/max of two uniform points,
    redrawn while the max leaves the simplex."""
    out = np.full((4, count), np.nan)
    pending = np.arange(count)
    for attempt in range(max_attempts):
        if pending.size == 0:
            break
        a1, a2 = _reflect(trial_uniforms(seed, _STREAM_ORDERED, pending, 4 * attempt),
                          trial_uniforms(seed, _STREAM_ORDERED, pending, 4 * attempt + 1))
        b1, b2 = _reflect(trial_uniforms(seed, _STREAM_ORDERED, pending, 4 * attempt + 2),
                          trial_uniforms(seed, _STREAM_ORDERED, pending, 4 * attempt + 3))
        hi1, hi2 = np.maximum(a1, b1), np.maximum(a2, b2)
        ok = hi1 + hi2 <= 1.0
        out[:, pending[ok]] = np.minimum(a1, b1)[ok], np.minimum(a2, b2)[ok], hi1[ok], hi2[ok]
        pending = pending[~ok]
    if pending.size:
        raise RuntimeError("ordered-pair sampling did not converge")
    return tuple(out)


def sample_additive_pairs(seed: int, count: int):
    """Pairs u, v >= 0 with u + v in S: draw w uniform in S and split each
    coordinate at an independent uniform fraction."""
    idx = np.arange(count)
    w1, w2 = _reflect(trial_uniforms(seed, _STREAM_ADDITIVE, idx, 0),
                      trial_uniforms(seed, _STREAM_ADDITIVE, idx, 1))
    u1 = w1 * trial_uniforms(seed, _STREAM_ADDITIVE, idx, 2)
    u2 = w2 * trial_uniforms(seed, _STREAM_ADDITIVE, idx, 3)
    return u1, u2, w1 - u1, w2 - u2


# -- reports ----------------------------------------------------------------

@dataclass
class VerificationReport:
    """Outcome of one scan.

    ``status`` is ``"passed"``, ``"violated"`` or ``"precondition_failed"``;
    it is not part of the JSON form, where a failed precondition shows up as
    a ``:precondition`` suffix on the check name.
    """

    check: str
    trials: int
    seed: int
    tolerance: float
    max_residual: float = 0.0
    violations: list = field(default_factory=list)
    status: str = "passed"

    @property
    def passed(self) -> bool:
        return self.status == "passed"

    def record_many(self, residuals, describe) -> None:
        """Fold an array of residuals into the report; ``describe(i)`` builds
        the input record of trial ``i`` and is only called for violations."""
        res = np.atleast_1d(np.asarray(residuals, dtype=float))
        res = np.where(np.isnan(res), np.inf, res)
        if res.size and res.max() > self.max_residual:
            self.max_residual = float(res.max())
        for i in np.flatnonzero(res > self.tolerance).tolist():
            self.violations.append({"input": describe(i), "residual": float(res[i])})
        if self.violations and self.status == "passed":
            self.status = "violated"

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "trials": self.trials,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "passed": self.passed,
            "violations": self.violations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _pt(a, b) -> list[float]:
    return [float(a), float(b)]


def _require_trials(trials: int) -> None:
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")


# -- scans ------------------------------------------------------------------

def verify_abel_jensen(trials: int, seed: int, tol: float = 1e-11, m_max: int = 30,
                       betas: Sequence[float] = (0.0, 0.05, 0.3, 1.0)) -> VerificationReport:
    """Abel-Jensen residuals for ``trials`` random (u, v) in [0, 1]^2, every
    m in 1..m_max and every beta."""
    _require_trials(trials)
    idx = np.arange(trials)
    u = trial_uniforms(seed, _STREAM_POINTS, idx, 0)
    v = trial_uniforms(seed, _STREAM_POINTS, idx, 1)
    report = VerificationReport("abel-jensen", trials, seed, tol)
    for beta in betas:
        for m in range(1, m_max + 1):
            report.record_many(abel_jensen_residual(u, v, beta, m),
                               lambda i: {"u": float(u[i]), "v": float(v[i]),
                                          "beta": beta, "m": m})
    return report


def verify_partition(params: OperatorParams, points: int, seed: int,
                     tol: float = 1e-12) -> VerificationReport:
    """Weights sum to one and are nonnegative at random points of S."""
    _require_trials(points)
    x1, x2 = sample_points(seed, points)
    report = VerificationReport("partition", points, seed, tol)
    step = max(1, BATCH_ENTRIES // len(lattice_arrays(params.n)[0]))
    for start in range(0, points, step):
        w = bivariate_weight_matrix(params, x1[start:start + step], x2[start:start + step])
        defect = np.abs(row_sums(w) - 1.0)
        lowest = w.min(axis=1)
        report.record_many(np.maximum(defect, -lowest),
                           lambda i: {"x": _pt(x1[start + i], x2[start + i]),
                                      "min_weight": float(lowest[i])})
    return report


def verify_bernstein_degeneration(n: int, points: int, seed: int, tol: float = 1e-12,
                                  functions: Sequence = CORPUS) -> VerificationReport:
    """At beta = 0, G_n must coincide with the simplex Bernstein polynomial."""
    _require_trials(points)
    params = OperatorParams(n, 0.0)
    x1, x2 = sample_points(seed, points)
    report = VerificationReport("bernstein0", points, seed, tol)
    for f in functions:
        g = eval_G_many(f, params, x1, x2)
        ref = np.array([bernstein_simplex(f, n, SimplexPoint(a, b)) for a, b in zip(x1, x2)])
        report.record_many(np.abs(g - ref),
                           lambda i: {"f": str(f), "n": n, "x": _pt(x1[i], x2[i])})
    return report


def verify_difference_expansion(params: OperatorParams, pairs: int, seed: int,
                                tol: float = 1e-10,
                                functions: Sequence = CORPUS) -> VerificationReport:
    """Ordered-pair expansion against the plain difference G(y) - G(x)."""
    _require_trials(pairs)
    lo1, lo2, hi1, hi2 = sample_ordered_pairs(seed, pairs)
    at_lo = [eval_G_many(f, params, lo1, lo2) for f in functions]
    at_hi = [eval_G_many(f, params, hi1, hi2) for f in functions]
    expanded = np.array([
        difference_expansions(functions, params, SimplexPoint(lo1[i], lo2[i]),
                              SimplexPoint(hi1[i], hi2[i]))
        for i in range(pairs)
    ])
    report = VerificationReport("difference", pairs, seed, tol)
    for j, f in enumerate(functions):
        report.record_many(np.abs(expanded[:, j] - (at_hi[j] - at_lo[j])),
                           lambda i: {"f": str(f), "x": _pt(lo1[i], lo2[i]),
                                      "y": _pt(hi1[i], hi2[i])})
    return report


MARGINAL_FUNCTIONS = (
    FunctionDescriptor.proj(1),                 # t
    FunctionDescriptor.sqrtsum(),               # t^0.5
    FunctionDescriptor.poly([(2, 0, 1.0)]),     # t^2
)


def verify_marginal_collapse(params: OperatorParams, points: int, seed: int,
                             tol: float = 1e-11,
                             functions: Sequence = MARGINAL_FUNCTIONS) -> VerificationReport:
    """G on a function of one coordinate equals Q in that coordinate."""
    _require_trials(points)
    x1, x2 = sample_points(seed, points)
    report = VerificationReport("marginal", points, seed, tol)
    for g in functions:
        for axis, coord in ((1, x1), (2, x2)):
            bivariate = eval_G_many(marginal_function(g, axis), params, x1, x2)
            univariate = eval_Q_many(g, params, coord)
            report.record_many(np.abs(bivariate - univariate),
                               lambda i: {"g": str(g), "axis": axis, "x": _pt(x1[i], x2[i])})
    return report


def estimate_lipschitz_constant(f, mu: float, samples: int, seed: int) -> float:
    """Largest |f(x) - f(y)| / sum_i |x_i - y_i|^mu over random pairs; a lower
    bound for the best Lipschitz constant of order mu."""
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"order must lie in (0, 1], got {mu}")
    _require_trials(samples)
    x1, x2, y1, y2 = sample_pairs(seed, samples)
    denom = np.abs(x1 - y1) ** mu + np.abs(x2 - y2) ** mu
    num = np.abs(np.asarray(f(x1, x2)) - np.asarray(f(y1, y2)))
    keep = denom > 0
    if not keep.any():
        return 0.0
    return float(np.max(num[keep] / denom[keep]))


def verify_lipschitz_preservation(f, spec: LipschitzSpec, params: OperatorParams,
                                  pairs: int, seed: int,
                                  tol: float = 1e-9) -> VerificationReport:
    """|G(f; y) - G(f; x)| <= M (|y1-x1|^mu + |y2-x2|^mu) + tol on random pairs.

    Pairs are independent uniform points, so mixed orders are included.  A
    function outside Lip_M(mu) may legitimately produce violations.
    """
    _require_trials(pairs)
    x1, x2, y1, y2 = sample_pairs(seed, pairs)
    gx = eval_G_many(f, params, x1, x2)
    gy = eval_G_many(f, params, y1, y2)
    excess = np.abs(gy - gx) - spec.bound(y1 - x1, y2 - x2)
    report = VerificationReport("lipschitz", pairs, seed, tol)
    report.record_many(np.maximum(0.0, excess),
                       lambda i: {"x": _pt(x1[i], x2[i]), "y": _pt(y1[i], y2[i])})
    return report


def _modulus_scan(g, report: VerificationReport, seed: int, samples: int,
                  check_sign: bool) -> None:
    # g is a vectorised function on S; the three modulus-of-continuity axioms
    zero = float(np.asarray(g(np.zeros(1), np.zeros(1)))[0])
    report.record_many(abs(zero), lambda i: {"property": "zero", "u": [0.0, 0.0]})

    lo1, lo2, hi1, hi2 = sample_ordered_pairs(seed, samples)
    g_lo, g_hi = g(lo1, lo2), g(hi1, hi2)
    report.record_many(np.maximum(0.0, g_lo - g_hi),
                       lambda i: {"property": "monotone", "u": _pt(lo1[i], lo2[i]),
                                  "v": _pt(hi1[i], hi2[i])})
    if check_sign:
        report.record_many(np.maximum(0.0, -g_lo),
                           lambda i: {"property": "nonnegative", "u": _pt(lo1[i], lo2[i])})

    u1, u2, v1, v2 = sample_additive_pairs(seed, samples)
    s1, s2 = u1 + v1, u2 + v2
    over = s1 + s2 > 1.0  # rounding can push u + v an ulp past the hypotenuse
    s2 = np.where(over, np.maximum(0.0, 1.0 - s1), s2)
    g_u, g_v, g_s = g(u1, u2), g(v1, v2), g(s1, s2)
    report.record_many(np.maximum(0.0, g_s - g_u - g_v),
                       lambda i: {"property": "semiadditive", "u": _pt(u1[i], u2[i]),
                                  "v": _pt(v1[i], v2[i])})


def verify_modulus_axioms(omega, params: OperatorParams, samples: int, seed: int,
                          tol: float = 1e-10) -> VerificationReport:
    """Check that G_n^beta(omega) is again a modulus of continuity.

    omega itself is screened first on the same samples (zero at the origin,
    nonnegative, monotone, semi-additive); if that screen fails the report
    carries status ``precondition_failed`` and G is not evaluated.
    """
    _require_trials(samples)
    pre = VerificationReport("modulus:precondition", samples, seed, tol)
    _modulus_scan(lambda a, b: np.asarray(omega(a, b), dtype=float) * np.ones(np.shape(a)),
                  pre, seed, samples, check_sign=True)
    if not pre.passed:
        pre.status = "precondition_failed"
        return pre

    report = VerificationReport("modulus", samples, seed, tol)
    _modulus_scan(lambda a, b: eval_G_many(omega, params, a, b), report, seed, samples,
                  check_sign=False)
    return report


# -- empirical convergence --------------------------------------------------

@dataclass(frozen=True)
class BetaSchedule:
    """beta_n = c (const), c/n (decay) or c/n^2 (decay2)."""

    kind: str
    c: float

    def __post_init__(self):
        if self.kind not in ("const", "decay", "decay2"):
            raise ValueError(f"unknown beta schedule {self.kind!r}")
        if not (math.isfinite(self.c) and self.c >= 0):
            raise ValueError(f"beta schedule constant must be finite and >= 0, got {self.c}")

    @classmethod
    def parse(cls, text: str) -> "BetaSchedule":
        kind, sep, value = text.partition(":")
        if not sep:
            raise ValueError(f"beta schedule must look like kind:value, got {text!r}")
        return cls(kind, float(value))

    def __call__(self, n: int) -> float:
        if self.kind == "const":
            return self.c
        if self.kind == "decay":
            return self.c / n
        return self.c / (n * n)


def triangular_grid(resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Points (i/r, j/r), i + j <= r."""
    if resolution < 1:
        raise ValueError(f"grid resolution must be >= 1, got {resolution}")
    i, j = lattice_arrays(resolution)
    return i / resolution, j / resolution


def convergence_table(f, n_list: Sequence[int], beta_schedule, grid_resolution: int):
    """Rows (n, beta_n, sup |G(f) - f|) over a uniform triangular grid.

    Empirical only: trends are reported, nothing is asserted.
    """
    if isinstance(beta_schedule, str):
        beta_schedule = BetaSchedule.parse(beta_schedule)
    x1, x2 = triangular_grid(grid_resolution)
    exact = np.asarray(f(x1, x2), dtype=float)
    rows = []
    for n in n_list:
        params = OperatorParams(n, beta_schedule(n))
        err = np.abs(eval_G_many(f, params, x1, x2) - exact)
        rows.append((params.n, params.beta, float(err.max())))
    return rows
