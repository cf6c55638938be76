"""Bernstein range enclosures over boxes.

Coefficients of a monomial ``x^k`` in the degree-``l`` Bernstein basis over
``[a, b]`` are blossom values: the average of ``a^(k-j) b^j`` under
hypergeometric weights.  All weights are non-negative, so over an interval
that does not straddle zero the sum has no cancellation.  The full tensor of
a multivariate polynomial is assembled by one mode product per axis.

:func:`fast_minmax` never forms the full tensor of a large polynomial.  It
works on the implicit form (a sum of rank-one tensors, one per term) and
uses the per-orthant monotonicity of monomial coefficients: an axis along
which every term's increment has the same sign is monotone for the whole
tensor, so its extreme index is known and the axis collapses.  What is left
is either small enough to enumerate or bounded term by term.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .poly import Box, DimensionError, Polynomial

DEFAULT_TENSOR_CAP = 20_000_000
DEFAULT_DENSE_LIMIT = 4096
DEFAULT_TAU = 1e-9


class TensorTooLarge(RuntimeError):
    """Requested Bernstein tensor exceeds the configured entry cap."""


class NotInOrthant(ValueError):
    """A box straddles zero in some coordinate where an orthant box is required."""


@lru_cache(maxsize=None)
def _log_binom_table(top: int) -> np.ndarray:
    k = np.arange(top + 1)
    return gammaln(top + 1) - gammaln(k + 1) - gammaln(top - k + 1)


@lru_cache(maxsize=512)
def _blossom_weights(l: int, k: int) -> np.ndarray:
    """W[i, j] = C(i, j) C(l-i, k-j) / C(l, k); rows sum to one."""
    i = np.arange(l + 1)[:, None]
    j = np.arange(k + 1)[None, :]
    valid = (j <= i) & (k - j <= l - i)
    lg = gammaln
    with np.errstate(invalid="ignore"):
        logw = (
            lg(i + 1) - lg(j + 1) - lg(np.maximum(i - j, 0) + 1)
            + lg(l - i + 1) - lg(k - j + 1) - lg(np.maximum(l - i - k + j, 0) + 1)
            - _log_binom_table(l)[k]
        )
    w = np.where(valid, np.exp(np.where(valid, logw, 0.0)), 0.0)
    w.flags.writeable = False
    return w


def monomial_bernstein(k: int, l: int, a: float, b: float) -> np.ndarray:
    """Degree-``l`` Bernstein coefficients of ``x^k`` over ``[a, b]``."""
    if k > l:
        raise ValueError("exponent exceeds Bernstein degree")
    if k == 0:
        return np.ones(l + 1)
    j = np.arange(k + 1)
    with np.errstate(over="ignore"):
        vals = np.power(a, k - j) * np.power(b, j)
    return _blossom_weights(l, k) @ vals


def axis_matrix(l: int, a: float, b: float, rows=None) -> np.ndarray:
    """Matrix mapping power coefficients (rows ``k``) to Bernstein coefficients."""
    m = np.zeros((l + 1, l + 1))
    for k in range(l + 1) if rows is None else rows:
        m[k] = monomial_bernstein(int(k), l, a, b)
    return m


@dataclass(frozen=True)
class BernsteinForm:
    degree: tuple[int, ...]
    box: Box
    coeffs: np.ndarray

    def corner(self, upper_mask) -> float:
        idx = tuple(l if u else 0 for l, u in zip(self.degree, upper_mask))
        return float(self.coeffs[idx])


def bernstein_coefficients(p: Polynomial, box: Box, cap: int = DEFAULT_TENSOR_CAP,
                           degree=None) -> BernsteinForm:
    """Full Bernstein coefficient tensor of ``p`` over ``box``.

    ``degree`` may raise the Bernstein degree above ``p.degree_vector``.
    """
    if box.n != p.n:
        raise DimensionError("box and polynomial dimensions differ")
    L = tuple(p.degree_vector if degree is None else degree)
    if any(l < d for l, d in zip(L, p.degree_vector)):
        raise ValueError("Bernstein degree below polynomial degree")
    size = int(np.prod([l + 1 for l in L], dtype=np.float64))
    if size > cap:
        raise TensorTooLarge(f"{size} coefficients exceed cap {cap}")
    coeffs = np.zeros(tuple(l + 1 for l in L))
    if not p.is_zero:
        coeffs[tuple(p.exponents.T)] = p.coefficients
        exps = p.exponents
        for i, (l, a, b) in enumerate(zip(L, box.lower, box.upper)):
            if l == 0:
                continue
            rows = np.unique(exps[:, i])
            m = axis_matrix(l, a, b, rows)
            coeffs = np.moveaxis(np.tensordot(coeffs, m, axes=([i], [0])), -1, i)
    return BernsteinForm(L, box, coeffs)


def enclosure(form: BernsteinForm) -> tuple[float, float]:
    return float(form.coeffs.min()), float(form.coeffs.max())


def _weak_sign(v: np.ndarray):
    """+1 / -1 if every entry is >= 0 / <= 0 (and some entry nonzero), 0 if all zero, None if mixed."""
    pos = bool((v > 0).any())
    neg = bool((v < 0).any())
    if pos and neg:
        return None
    return 1 if pos else (-1 if neg else 0)


class _Implicit:
    """Implicit Bernstein form: coefficient tensor = sum_T c_T * outer(vec[T, axis])."""

    def __init__(self, p: Polynomial, box: Box):
        self.L = p.degree_vector
        self.box = box
        self.vec_cache: list[dict[int, np.ndarray]] = [dict() for _ in range(p.n)]
        self.vsign: list[dict[int, object]] = [dict() for _ in range(p.n)]
        self.isign: list[dict[int, object]] = [dict() for _ in range(p.n)]
        for i in range(p.n):
            for k in np.unique(p.exponents[:, i]):
                k = int(k)
                v = monomial_bernstein(k, self.L[i], box.lower[i], box.upper[i])
                self.vec_cache[i][k] = v
                self.vsign[i][k] = _weak_sign(v)
                self.isign[i][k] = _weak_sign(np.diff(v)) if len(v) > 1 else 0

    def monotone_direction(self, terms, axis, free):
        """+1 nondecreasing, -1 nonincreasing, 0 constant, None unknown along ``axis``."""
        direction = 0
        for k, c in terms:
            s = self.isign[axis][k[axis]]
            if s == 0:
                continue
            if s is None:
                return None
            for j in free:
                if j == axis:
                    continue
                vs = self.vsign[j][k[j]]
                if vs is None:
                    return None
                s *= vs
            s = s * (1 if c > 0 else -1)
            if s == 0:
                continue
            if direction == 0:
                direction = s
            elif direction != s:
                return None
        return direction

    def extreme(self, p: Polynomial, sense: int, dense_limit: int) -> float:
        """Lower (sense=-1) or upper (sense=+1) bound on the coefficient extremum."""
        terms = [(k, c) for k, c in p.items()]
        free = list(range(p.n))
        while True:
            fixed = {}
            for axis in free:
                d = self.monotone_direction(terms, axis, free)
                if d is None:
                    continue
                if d == 0:
                    fixed[axis] = 0
                else:
                    # min at the low end of a nondecreasing axis; max at the high end
                    low_end = (d > 0) == (sense < 0)
                    fixed[axis] = 0 if low_end else self.L[axis]
            if not fixed:
                break
            merged: dict[tuple, float] = {}
            for k, c in terms:
                w = c
                for axis, idx in fixed.items():
                    w *= self.vec_cache[axis][k[axis]][idx]
                key = tuple(e if a not in fixed else 0 for a, e in enumerate(k))
                merged[key] = merged.get(key, 0.0) + w
            terms = [(k, c) for k, c in merged.items() if c != 0.0]
            free = [a for a in free if a not in fixed]
            for a in fixed:
                self.vec_cache[a].setdefault(0, np.ones(self.L[a] + 1))
                self.vsign[a].setdefault(0, 1)
                self.isign[a].setdefault(0, 0)
            if not terms or not free:
                break
        if not terms:
            return 0.0
        if not free:
            return float(sum(c for _, c in terms))
        size = int(np.prod([self.L[a] + 1 for a in free], dtype=np.float64))
        if size <= dense_limit:
            shape = tuple(self.L[a] + 1 for a in free)
            t = np.zeros(shape)
            for k, c in terms:
                t[tuple(k[a] for a in free)] += c
            for pos, a in enumerate(free):
                rows = sorted({k[a] for k, _ in terms})
                m = np.zeros((self.L[a] + 1, self.L[a] + 1))
                for r in rows:
                    m[r] = self.vec_cache[a][r]
                t = np.moveaxis(np.tensordot(t, m, axes=([pos], [0])), -1, pos)
            return float(t.min() if sense < 0 else t.max())
        total = 0.0
        for k, c in terms:
            lo, hi = c, c
            for a in free:
                v = self.vec_cache[a][k[a]]
                vlo, vhi = float(v.min()), float(v.max())
                cand = (lo * vlo, lo * vhi, hi * vlo, hi * vhi)
                lo, hi = min(cand), max(cand)
            total += lo if sense < 0 else hi
        return total


def fast_minmax(p: Polynomial, box: Box, dense_limit: int = DEFAULT_DENSE_LIMIT) -> tuple[float, float]:
    """Bounds ``lo <= min b_K`` and ``hi >= max b_K`` over an orthant box.

    Polynomials whose full tensor has at most ``dense_limit`` entries are
    handled exactly through :func:`bernstein_coefficients`.
    """
    if box.n != p.n:
        raise DimensionError("box and polynomial dimensions differ")
    if not box.is_orthant_pure():
        raise NotInOrthant(f"box {box} straddles zero")
    if p.is_zero:
        return 0.0, 0.0
    if p.is_constant():
        c = p.constant_term()
        return c, c
    size = np.prod([l + 1 for l in p.degree_vector], dtype=np.float64)
    if size <= dense_limit:
        return enclosure(bernstein_coefficients(p, box))
    imp = _Implicit(p, box)
    return imp.extreme(p, -1, dense_limit), imp.extreme(p, +1, dense_limit)


def bound_range(p: Polynomial, box: Box, dense_limit: int = DEFAULT_DENSE_LIMIT) -> tuple[float, float]:
    """Sound range bounds on any box, taking the hull over its orthant pieces."""
    lo, hi = np.inf, -np.inf
    for piece in box.orthant_pieces():
        a, b = fast_minmax(p, piece, dense_limit)
        lo, hi = min(lo, a), max(hi, b)
    return float(lo), float(hi)


@dataclass(frozen=True)
class EnclosureFeatures:
    p_min: float
    p_max: float
    grad_min: float
    grad_max: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p_min, self.p_max, self.grad_min, self.grad_max])


def features(p: Polynomial, box: Box, dense_limit: int = DEFAULT_DENSE_LIMIT) -> EnclosureFeatures:
    """Range bounds of ``p`` and the aggregated bounds of its partial derivatives."""
    p_min, p_max = fast_minmax(p, box, dense_limit)
    g_lo, g_hi = np.inf, -np.inf
    for d in p.gradient():
        lo, hi = fast_minmax(d, box, dense_limit)
        g_lo, g_hi = min(g_lo, lo), max(g_hi, hi)
    return EnclosureFeatures(p_min, p_max, float(g_lo), float(g_hi))


class SignClass(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    AMBIGUOUS = "ambiguous"


def classify_bounds(lo: float, hi: float, tau: float = DEFAULT_TAU) -> SignClass:
    if lo > tau:
        return SignClass.POSITIVE
    if hi < -tau:
        return SignClass.NEGATIVE
    return SignClass.AMBIGUOUS


def sign_classify(p: Polynomial, box: Box, tau: float = DEFAULT_TAU,
                  dense_limit: int = DEFAULT_DENSE_LIMIT) -> SignClass:
    return classify_bounds(*fast_minmax(p, box, dense_limit), tau)
