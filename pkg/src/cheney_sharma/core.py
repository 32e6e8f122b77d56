"""Domain types shared by every other module: simplex points, lattice indices,
operator parameters and the closed set of test-function descriptors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

# Slack allowed on x1 + x2 <= 1 before a point is rejected; within it the
# point is pulled back onto the hypotenuse.
SIMPLEX_TOL = 1e-12


class MultiIndex(NamedTuple):
    k1: int
    k2: int

    @property
    def order(self) -> int:
        return self.k1 + self.k2


@dataclass(frozen=True)
class SimplexPoint:
    """A point of the triangle x1, x2 >= 0, x1 + x2 <= 1."""

    x1: float
    x2: float

    def __post_init__(self):
        x1, x2 = float(self.x1), float(self.x2)
        if not (math.isfinite(x1) and math.isfinite(x2)):
            raise ValueError(f"non-finite simplex point ({x1}, {x2})")
        if x1 < 0.0 or x2 < 0.0:
            raise ValueError(f"point ({x1}, {x2}) has a negative coordinate")
        if x1 + x2 > 1.0 + SIMPLEX_TOL:
            raise ValueError(f"point ({x1}, {x2}) lies outside the simplex")
        if x1 + x2 > 1.0:
            x2 = 1.0 - x1
            while x2 > 0.0 and x1 + x2 > 1.0:
                x2 = math.nextafter(x2, 0.0)
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)

    @classmethod
    def parse(cls, text: str) -> "SimplexPoint":
        parts = text.split(",")
        if len(parts) != 2:
            raise ValueError(f"expected 'x1,x2', got {text!r}")
        return cls(float(parts[0]), float(parts[1]))

    @property
    def total(self) -> float:
        return self.x1 + self.x2

    @property
    def rest(self) -> float:
        """Barycentric weight of the origin, 1 - x1 - x2 (never negative)."""
        return max(0.0, 1.0 - self.x1 - self.x2)

    def __iter__(self):
        yield self.x1
        yield self.x2


@dataclass(frozen=True)
class OperatorParams:
    n: int
    beta: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"degree n must be a positive integer, got {self.n!r}")
        beta = float(self.beta)
        if not math.isfinite(beta) or beta < 0.0:
            raise ValueError(f"beta must be finite and nonnegative, got {self.beta!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "beta", beta)


@dataclass(frozen=True)
class LipschitzSpec:
    """Order ``mu`` and constant ``M`` of a Lipschitz class on the simplex."""

    mu: float
    M: float

    def __post_init__(self):
        if not 0.0 < self.mu <= 1.0:
            raise ValueError(f"Lipschitz order must lie in (0, 1], got {self.mu}")
        if not self.M > 0.0:
            raise ValueError(f"Lipschitz constant must be positive, got {self.M}")

    def bound(self, d1, d2):
        """M * (|d1|^mu + |d2|^mu)."""
        return self.M * (np.abs(d1) ** self.mu + np.abs(d2) ** self.mu)


def simplex_lattice(n: int) -> list[MultiIndex]:
    """All (k1, k2) with k1 + k2 <= n, k1 outer and k2 inner."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"lattice degree must be a positive integer, got {n!r}")
    return [MultiIndex(k1, k2) for k1 in range(n + 1) for k2 in range(n - k1 + 1)]


@lru_cache(maxsize=64)
def lattice_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Lattice of degree ``n >= 0`` as two read-only int arrays, same order as
    :func:`simplex_lattice`."""
    k1 = np.repeat(np.arange(n + 1), np.arange(n + 1, 0, -1))
    row_start = k1 * (n + 1) - k1 * (k1 - 1) // 2
    k2 = np.arange(k1.size) - row_start
    k1.flags.writeable = False
    k2.flags.writeable = False
    return k1, k2


def lattice_position(n: int, k1, k2):
    """Position of (k1, k2) inside the degree-n lattice ordering."""
    return k1 * (n + 1) - k1 * (k1 - 1) // 2 + k2


def componentwise_leq(x: SimplexPoint, y: SimplexPoint) -> bool:
    return x.x1 <= y.x1 and x.x2 <= y.x2


# -- function descriptors ---------------------------------------------------

KINDS = ("const", "proj", "poly", "absdist", "sqrtsum", "minsum", "expsum")


@dataclass(frozen=True)
class FunctionDescriptor:
    """A closed family of test functions on the simplex.

    Descriptors round-trip through the textual grammar accepted by the CLI::

        const:<c> | proj:1 | proj:2 | poly:i,j,c[;i,j,c]... |
        absdist:<a1>,<a2>,<mu> | sqrtsum | minsum:<cap> | expsum

    Instances are callable on scalars or numpy arrays, ``f(x1, x2)``.  A
    one-variable use (the univariate operator) evaluates ``f(t, 0)``.
    """

    kind: str
    args: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}")
        kind, args = self.kind, self.args
        if kind == "const":
            (c,) = args
            _require_finite(c)
        elif kind == "proj":
            (axis,) = args
            if axis not in (1, 2):
                raise ValueError(f"projection axis must be 1 or 2, got {axis!r}")
        elif kind == "poly":
            if not args:
                raise ValueError("poly needs at least one term")
            for i, j, c in args:
                if int(i) != i or int(j) != j or i < 0 or j < 0:
                    raise ValueError(f"poly exponents must be nonnegative integers: {(i, j)}")
                _require_finite(c)
        elif kind == "absdist":
            a1, a2, mu = args
            _require_finite(a1, a2, mu)
            if not 0.0 < mu <= 1.0:
                raise ValueError(f"absdist order must lie in (0, 1], got {mu}")
            if a1 < 0 or a2 < 0 or a1 + a2 > 1.0:
                raise ValueError(f"absdist anchor ({a1}, {a2}) is not in the simplex")
        elif kind == "minsum":
            (cap,) = args
            _require_finite(cap)
            if not cap > 0:
                raise ValueError(f"minsum cap must be positive, got {cap}")
        elif args:
            raise ValueError(f"{kind} takes no arguments")

    # constructors
    @classmethod
    def const(cls, c: float) -> "FunctionDescriptor":
        return cls("const", (float(c),))

    @classmethod
    def proj(cls, axis: int) -> "FunctionDescriptor":
        return cls("proj", (int(axis),))

    @classmethod
    def poly(cls, terms: Iterable[tuple[int, int, float]]) -> "FunctionDescriptor":
        return cls("poly", tuple((int(i), int(j), float(c)) for i, j, c in terms))

    @classmethod
    def absdist(cls, a1: float, a2: float, mu: float) -> "FunctionDescriptor":
        return cls("absdist", (float(a1), float(a2), float(mu)))

    @classmethod
    def sqrtsum(cls) -> "FunctionDescriptor":
        return cls("sqrtsum")

    @classmethod
    def minsum(cls, cap: float) -> "FunctionDescriptor":
        return cls("minsum", (float(cap),))

    @classmethod
    def expsum(cls) -> "FunctionDescriptor":
        return cls("expsum")

    @classmethod
    def parse(cls, text: str) -> "FunctionDescriptor":
        head, sep, body = text.strip().partition(":")
        try:
            if head in ("sqrtsum", "expsum"):
                if sep:
                    raise ValueError(f"{head} takes no arguments")
                return cls(head)
            if not sep:
                raise ValueError("missing ':' and arguments")
            if head == "const":
                return cls.const(float(body))
            if head == "proj":
                return cls.proj(int(body))
            if head == "minsum":
                return cls.minsum(float(body))
            if head == "absdist":
                a1, a2, mu = (float(v) for v in body.split(","))
                return cls.absdist(a1, a2, mu)
            if head == "poly":
                terms = []
                for chunk in body.split(";"):
                    i, j, c = chunk.split(",")
                    terms.append((int(i), int(j), float(c)))
                return cls.poly(terms)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"bad function descriptor {text!r}: {exc}") from None
        raise ValueError(f"bad function descriptor {text!r}: unknown kind {head!r}")

    def __str__(self) -> str:
        if not self.args:
            return self.kind
        if self.kind == "poly":
            return "poly:" + ";".join(f"{i},{j},{c!r}" for i, j, c in self.args)
        return f"{self.kind}:" + ",".join(repr(a) for a in self.args)

    def __call__(self, x1, x2):
        kind, args = self.kind, self.args
        if kind == "const":
            return args[0] + np.zeros_like(np.add(x1, x2), dtype=float)
        if kind == "proj":
            out = x1 if args[0] == 1 else x2
            return np.asarray(out, dtype=float) + 0.0
        if kind == "poly":
            return sum(c * np.power(x1, i) * np.power(x2, j) for i, j, c in args)
        if kind == "absdist":
            a1, a2, mu = args
            return np.abs(np.subtract(x1, a1)) ** mu + np.abs(np.subtract(x2, a2)) ** mu
        if kind == "sqrtsum":
            return np.sqrt(np.add(x1, x2))
        if kind == "minsum":
            return np.minimum(args[0], np.add(x1, x2))
        return np.exp(np.add(x1, x2))


def _require_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite coefficient {v!r}")


def eval_function(f: FunctionDescriptor, x: SimplexPoint) -> float:
    return float(f(x.x1, x.x2))


# Functions used wherever a check runs "over the corpus".
CORPUS: tuple[FunctionDescriptor, ...] = (
    FunctionDescriptor.const(2.5),
    FunctionDescriptor.proj(1),
    FunctionDescriptor.proj(2),
    FunctionDescriptor.poly([(2, 0, 1.0), (1, 1, -0.5), (0, 3, 2.0)]),
    FunctionDescriptor.absdist(0.5, 0.5, 1.0),
    FunctionDescriptor.absdist(0.2, 0.3, 0.5),
    FunctionDescriptor.sqrtsum(),
    FunctionDescriptor.minsum(0.6),
    FunctionDescriptor.expsum(),
)
