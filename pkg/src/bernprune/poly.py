"""Sparse multivariate polynomials in the power basis, and axis-aligned boxes."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

MultiIndex = tuple[int, ...]


class DimensionError(ValueError):
    """Operands or points disagree on the number of variables."""


class Polynomial:
    """Immutable sparse polynomial ``sum_K a_K x^K`` over ``n`` variables.

    Terms are stored as a mapping from exponent tuples to float coefficients.
    Exact zeros are dropped on construction, so two polynomials with the same
    value function and the same arithmetic history compare equal termwise.
    """

    __slots__ = ("n", "_terms", "_degree", "_exps", "_coeffs")

    def __init__(self, n: int, terms: Mapping[MultiIndex, float] | None = None):
        if n < 0:
            raise DimensionError("variable count must be non-negative")
        clean: dict[MultiIndex, float] = {}
        for k, c in (terms or {}).items():
            k = tuple(int(e) for e in k)
            if len(k) != n:
                raise DimensionError(f"exponent {k} has length {len(k)}, expected {n}")
            if any(e < 0 for e in k):
                raise ValueError(f"negative exponent in {k}")
            c = float(c)
            if c != 0.0:
                clean[k] = c
        self.n = n
        self._terms = clean
        self._degree: MultiIndex | None = None
        self._exps: np.ndarray | None = None
        self._coeffs: np.ndarray | None = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, value: float, n: int) -> "Polynomial":
        return cls(n, {(0,) * n: value})

    @classmethod
    def variable(cls, i: int, n: int) -> "Polynomial":
        k = [0] * n
        k[i] = 1
        return cls(n, {tuple(k): 1.0})

    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls(n)

    # -- structure --------------------------------------------------------

    @property
    def terms(self) -> dict[MultiIndex, float]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree_vector(self) -> MultiIndex:
        """Componentwise maximum exponent ``L``."""
        if self._degree is None:
            if self._terms:
                self._degree = tuple(int(v) for v in self.exponents.max(axis=0))
            else:
                self._degree = (0,) * self.n
        return self._degree

    @property
    def total_degree(self) -> int:
        return max((sum(k) for k in self._terms), default=0)

    @property
    def exponents(self) -> np.ndarray:
        if self._exps is None:
            if self._terms:
                self._exps = np.array(list(self._terms), dtype=np.int64).reshape(-1, self.n)
            else:
                self._exps = np.zeros((0, self.n), dtype=np.int64)
            self._coeffs = np.fromiter(self._terms.values(), dtype=float, count=len(self._terms))
        return self._exps

    @property
    def coefficients(self) -> np.ndarray:
        self.exponents
        return self._coeffs

    def constant_term(self) -> float:
        return self._terms.get((0,) * self.n, 0.0)

    def is_constant(self) -> bool:
        return all(sum(k) == 0 for k in self._terms)

    def dense(self) -> np.ndarray:
        """Coefficient tensor of shape ``L + 1``."""
        a = np.zeros(tuple(l + 1 for l in self.degree_vector))
        if self._terms:
            a[tuple(self.exponents.T)] = self.coefficients
        return a

    # -- evaluation -------------------------------------------------------

    def __call__(self, x) -> float:
        return self.evaluate(x)

    def evaluate(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionError(f"point has shape {x.shape}, expected ({self.n},)")
        return float(self.evaluate_many(x[None, :])[0])

    def evaluate_many(self, xs) -> np.ndarray:
        """Evaluate at each row of an ``(N, n)`` array."""
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 2 or xs.shape[1] != self.n:
            raise DimensionError(f"points have shape {xs.shape}, expected (N, {self.n})")
        if not self._terms:
            return np.zeros(len(xs))
        exps = self.exponents
        mono = np.ones((len(xs), len(exps)))
        for i in range(self.n):
            col = exps[:, i]
            if col.any():
                mono *= xs[:, i : i + 1] ** col[None, :]
        return mono @ self.coefficients

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Polynomial"):
        if other.n != self.n:
            raise DimensionError(f"variable counts differ: {self.n} vs {other.n}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial.constant(float(other), self.n)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0.0) + c
        return Polynomial(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.n, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0.0) - c
        return Polynomial(self.n, out)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def scale(self, factor: float) -> "Polynomial":
        factor = float(factor)
        return Polynomial(self.n, {k: c * factor for k, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[MultiIndex, float] = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0.0) + c1 * c2
        return Polynomial(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Polynomial":
        if isinstance(exponent, bool) or not isinstance(exponent, (int, np.integer)):
            raise TypeError("polynomial exponent must be an integer")
        if exponent < 0:
            raise ValueError("polynomial exponent must be non-negative")
        result = Polynomial.constant(1.0, self.n)
        base = self
        e = int(exponent)
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        return f"Polynomial({self.n}, {self._terms!r})"

    # -- calculus ---------------------------------------------------------

    def derivative(self, i: int) -> "Polynomial":
        out = {}
        for k, c in self._terms.items():
            if k[i]:
                kk = list(k)
                kk[i] -= 1
                out[tuple(kk)] = c * k[i]
        return Polynomial(self.n, out)

    def gradient(self) -> list["Polynomial"]:
        return [self.derivative(i) for i in range(self.n)]

    def shift(self, center: Sequence[float], max_total_degree: int | None = None) -> "Polynomial":
        """Return ``q(y) = p(y + center)``, optionally truncated in total degree."""
        c = [float(v) for v in center]
        if len(c) != self.n:
            raise DimensionError("center has wrong length")
        out: dict[MultiIndex, float] = {}
        for k, a in self._terms.items():
            ranges = []
            for ki in k:
                top = ki if max_total_degree is None else min(ki, max_total_degree)
                ranges.append(range(top + 1))
            for alpha in itertools.product(*ranges):
                if max_total_degree is not None and sum(alpha) > max_total_degree:
                    continue
                w = a
                for ki, ai, ci in zip(k, alpha, c):
                    if ki != ai:
                        w *= math.comb(ki, ai) * ci ** (ki - ai)
                out[alpha] = out.get(alpha, 0.0) + w
        return Polynomial(self.n, out)

    def affine(self, offset: Sequence[float], scale: Sequence[float]) -> "Polynomial":
        """Return ``q(t) = p(offset + scale * t)`` (componentwise)."""
        if len(scale) != self.n:
            raise DimensionError("scale has wrong length")
        shifted = self.shift(offset)
        s = [float(v) for v in scale]
        out = {}
        for k, a in shifted.items():
            w = a
            for ki, si in zip(k, s):
                if ki:
                    w *= si ** ki
            out[k] = w
        return Polynomial(self.n, out)


def taylor_quadratic(p: Polynomial, center: Sequence[float]) -> Polynomial:
    """Degree-2 Taylor polynomial of ``p`` at ``center``, expanded in the power basis.

    Polynomials of total degree at most two are returned unchanged.
    """
    if len(center) != p.n:
        raise DimensionError("center has wrong length")
    if p.total_degree <= 2:
        return p
    c = [float(v) for v in center]
    local = p.shift(c, max_total_degree=2)
    return local.shift([-v for v in c])


def lipschitz_bound(p: Polynomial, box: "Box") -> float:
    """2-norm Lipschitz constant of ``p`` on ``box`` from Bernstein bounds of each partial."""
    from .bernstein import bound_range

    if box.n != p.n:
        raise DimensionError("box and polynomial dimensions differ")
    total = 0.0
    for d in p.gradient():
        lo, hi = bound_range(d, box)
        m = max(abs(lo), abs(hi))
        total += m * m
    return math.sqrt(total)


@dataclass(frozen=True)
class Box:
    """Axis-aligned hyperrectangle ``[lower_1, upper_1] x ... x [lower_n, upper_n]``."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    _volume: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi):
            raise DimensionError("lower and upper bounds differ in length")
        for i, (a, b) in enumerate(zip(lo, hi)):
            if not (a <= b):
                raise ValueError(f"interval {i} is inverted: [{a}, {b}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "_volume", math.prod(b - a for a, b in zip(lo, hi)))

    @classmethod
    def from_intervals(cls, intervals: Iterable[Sequence[float]]) -> "Box":
        intervals = list(intervals)
        return cls(tuple(a for a, _ in intervals), tuple(b for _, b in intervals))

    @classmethod
    def cube(cls, lo: float, hi: float, n: int) -> "Box":
        return cls((lo,) * n, (hi,) * n)

    @property
    def n(self) -> int:
        return len(self.lower)

    @property
    def lo(self) -> np.ndarray:
        return np.array(self.lower)

    @property
    def hi(self) -> np.ndarray:
        return np.array(self.upper)

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    def volume(self) -> float:
        return self._volume

    def center(self) -> np.ndarray:
        return (self.lo + self.hi) / 2.0

    def half_diagonal(self) -> float:
        return float(np.linalg.norm(self.widths) / 2.0)

    def corners(self) -> np.ndarray:
        return np.array(list(itertools.product(*zip(self.lower, self.upper))))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def is_orthant_pure(self) -> bool:
        """True when no interval has 0 strictly inside it."""
        return all(not (a < 0.0 < b) for a, b in zip(self.lower, self.upper))

    def orthant_pieces(self) -> list["Box"]:
        """Split every interval straddling 0 at 0."""
        choices = []
        for a, b in zip(self.lower, self.upper):
            choices.append([(a, 0.0), (0.0, b)] if a < 0.0 < b else [(a, b)])
        return [Box.from_intervals(c) for c in itertools.product(*choices)]

    def widest_axis(self, scale: Sequence[float] | None = None) -> int:
        w = self.widths
        if scale is not None:
            s = np.asarray(scale, dtype=float)
            w = np.where(s > 0, w / np.where(s > 0, s, 1.0), w)
        return int(np.argmax(w))

    def bisect(self, axis: int) -> tuple["Box", "Box"]:
        mid = 0.5 * (self.lower[axis] + self.upper[axis])
        lo_hi = list(self.upper)
        lo_hi[axis] = mid
        hi_lo = list(self.lower)
        hi_lo[axis] = mid
        return Box(self.lower, tuple(lo_hi)), Box(tuple(hi_lo), self.upper)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(count, self.n))
