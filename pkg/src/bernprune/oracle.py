"""Slow reference adjudicators used by the test-suite and the bench harness.

Nothing here shares code paths with the solver's shortcuts: evaluation is
term by term, and Bernstein coefficients come from the textbook binomial
double sum rather than the blossom weights used by :mod:`bernprune.bernstein`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .poly import Box, Polynomial

TAU = 1e-9


class OracleBudgetExceeded(RuntimeError):
    pass


def naive_evaluate(p: Polynomial, x: Sequence[float]) -> float:
    total = 0.0
    for k, a in p.items():
        term = a
        for xi, ki in zip(x, k):
            term *= float(xi) ** ki
        total += term
    return total


def naive_evaluate_grid(p: Polynomial, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, float)
    out = np.zeros(len(pts))
    for k, a in p.items():
        term = np.full(len(pts), a)
        for i, ki in enumerate(k):
            if ki:
                term = term * pts[:, i] ** ki
        out += term
    return out


def _axis_matrix(l: int, lo: float, hi: float) -> np.ndarray:
    """M[k, i] = sum_j C(k,j)/C(l,j) (hi-lo)^j C(i,j) lo^(i-j)  (row k: Bernstein index)."""
    w = hi - lo
    m = np.zeros((l + 1, l + 1))
    for k in range(l + 1):
        for i in range(l + 1):
            s = 0.0
            for j in range(min(k, i) + 1):
                s += math.comb(k, j) / math.comb(l, j) * w ** j * math.comb(i, j) * lo ** (i - j)
            m[k, i] = s
    return m


def literal_bernstein(p: Polynomial, box: Box, degree=None) -> np.ndarray:
    """Full coefficient tensor from the binomial double sum, applied one axis at a time."""
    L = tuple(p.degree_vector if degree is None else degree)
    size = math.prod(l + 1 for l in L)
    if size > 2_000_000:
        raise OracleBudgetExceeded("coefficient tensor too large for the oracle")
    t = np.zeros(tuple(l + 1 for l in L))
    for k, a in p.items():
        t[k] += a
    for axis, (l, lo, hi) in enumerate(zip(L, box.lower, box.upper)):
        m = _axis_matrix(l, lo, hi)
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [axis])), 0, axis)
    return t


def literal_enclosure(p: Polynomial, box: Box) -> tuple[float, float]:
    t = literal_bernstein(p, box)
    return float(t.min()), float(t.max())


def grid_points(box: Box, resolution: int) -> np.ndarray:
    axes = [np.linspace(a, b, resolution) if b > a else np.array([a]) for a, b in zip(box.lower, box.upper)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, box.n)


def grid_extrema(p: Polynomial, box: Box, resolution: int, budget: int = 10_000_000):
    """Exhaustive lattice search: ``(min, argmin, max, argmax)``.

    The minimum found is an upper bound on the true minimum (and the maximum a
    lower bound on the true maximum).
    """
    if resolution < 1 or resolution ** box.n > budget:
        raise OracleBudgetExceeded(f"{resolution}^{box.n} lattice points exceed budget {budget}")
    pts = grid_points(box, resolution)
    vals = naive_evaluate_grid(p, pts)
    i, j = int(np.argmin(vals)), int(np.argmax(vals))
    return float(vals[i]), pts[i], float(vals[j]), pts[j]


class VerdictKind(enum.Enum):
    SAT_POINT = "sat"
    PROVEN_UNSAT = "unsat"
    INCONCLUSIVE = "inconclusive"


@dataclass
class OracleVerdict:
    kind: VerdictKind
    point: np.ndarray | None = None


def _worst(constraints, pts) -> np.ndarray:
    return np.max(np.stack([naive_evaluate_grid(c, pts) for c in constraints]), axis=0)


def search_sat(constraints: Sequence[Polynomial], box: Box, resolution: int = 101,
               zoom_rounds: int = 12, keep: int = 8, tau: float = TAU) -> np.ndarray | None:
    """Lattice search followed by repeated local zoom around the best points."""
    pts = grid_points(box, resolution)
    worst = _worst(constraints, pts)
    hit = np.flatnonzero(worst <= tau)
    if len(hit):
        return pts[hit[0]]
    half = np.asarray(box.widths) / max(resolution - 1, 1)
    seeds = pts[np.argsort(worst, kind="stable")[:keep]]
    for _ in range(zoom_rounds):
        new = []
        for s in seeds:
            lo = np.maximum(s - half, box.lo)
            hi = np.minimum(s + half, box.hi)
            new.append(grid_points(Box(tuple(lo), tuple(hi)), 9))
        cand = np.concatenate(new)
        w = _worst(constraints, cand)
        hit = np.flatnonzero(w <= tau)
        if len(hit):
            return cand[hit[0]]
        seeds = cand[np.argsort(w, kind="stable")[:keep]]
        half = half / 4.0
    return None


def prove_unsat(constraints: Sequence[Polynomial], box: Box, depth: int = 14, node_budget: int = 50_000,
                tau: float = TAU) -> bool:
    """Exhaustive bisection with full-tensor enclosures; True when every leaf is excluded."""
    stack = [(box, 0)]
    nodes = 0
    while stack:
        b, d = stack.pop()
        nodes += 1
        if nodes > node_budget:
            return False
        if any(literal_enclosure(c, b)[0] > tau for c in constraints):
            continue
        if d >= depth:
            return False
        axis = int(np.argmax(np.asarray(b.widths) / np.maximum(box.widths, 1e-300)))
        mid = 0.5 * (b.lower[axis] + b.upper[axis])
        lo_u = list(b.upper)
        lo_u[axis] = mid
        hi_l = list(b.lower)
        hi_l[axis] = mid
        stack.append((Box(tuple(hi_l), b.upper), d + 1))
        stack.append((Box(b.lower, tuple(lo_u)), d + 1))
    return True


def adjudicate(constraints: Sequence[Polynomial], box: Box, resolution: int = 101, depth: int = 14,
               tau: float = TAU) -> OracleVerdict:
    if box.n > 3:
        raise OracleBudgetExceeded("the oracle handles at most three variables")
    if not constraints:
        return OracleVerdict(VerdictKind.SAT_POINT, box.center())
    x = search_sat(constraints, box, resolution, tau=tau)
    if x is not None:
        return OracleVerdict(VerdictKind.SAT_POINT, x)
    if prove_unsat(constraints, box, depth, tau=tau):
        return OracleVerdict(VerdictKind.PROVEN_UNSAT)
    return OracleVerdict(VerdictKind.INCONCLUSIVE)


def random_polynomial(rng: np.random.Generator, n: int, degree: int, terms: int | None = None,
                      scale: float = 1.0) -> Polynomial:
    """Random polynomial of total degree at most ``degree`` with U(-scale, scale) coefficients."""
    import itertools
    monos = [k for k in itertools.product(range(degree + 1), repeat=n) if sum(k) <= degree]
    if terms is not None and terms < len(monos):
        idx = rng.choice(len(monos), size=terms, replace=False)
        monos = [monos[i] for i in sorted(idx)]
    coeffs = rng.uniform(-scale, scale, size=len(monos))
    return Polynomial(n, {k: float(c) for k, c in zip(monos, coeffs)})


def random_problem(rng: np.random.Generator, max_n: int = 2, max_degree: int = 4, max_m: int = 3):
    """Random feasibility instance on a random box; offsets vary the SAT/UNSAT mix."""
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    lo = rng.uniform(-2.0, 0.5, size=n)
    hi = lo + rng.uniform(0.5, 2.5, size=n)
    box = Box(tuple(lo), tuple(hi))
    cons = []
    for _ in range(m):
        d = int(rng.integers(1, max_degree + 1))
        p = random_polynomial(rng, n, d, terms=int(rng.integers(2, 7)))
        cons.append(p + float(rng.uniform(0.0, 1.5)))
    return cons, box
