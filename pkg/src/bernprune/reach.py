"""Template-polyhedron reachability for discrete-time polynomial maps.

Each step bounds every template direction ``a`` by minimizing ``-a . f(x)``
over the bounding box of the previous set.  The box relaxation drops the
non-axis rows of the previous polytope, which keeps every face sound even
though the optimizer only reports an approximate minimum.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .bernstein import bound_range
from .optimizer import OptimizerConfig, optimize_objective
from .parser import ParseError, parse_expr
from .poly import Box, Polynomial

log = logging.getLogger(__name__)


class EmptySet(RuntimeError):
    pass


@dataclass(frozen=True)
class PolytopeH:
    """``{x : A x <= b}``; rows ``0..n-1`` are ``+e_i``, rows ``n..2n-1`` are ``-e_i``."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ValueError("A must be m x n and b of length m")
        n = A.shape[1]
        if A.shape[0] < 2 * n or not np.array_equal(A[: 2 * n], np.vstack([np.eye(n), -np.eye(n)])):
            raise ValueError("the first 2n template rows must be +e_i then -e_i")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def contains(self, x, tol: float = 1e-9) -> bool:
        return bool(np.all(self.A @ np.asarray(x, float) <= self.b + tol))

    def contains_many(self, xs, tol: float = 1e-9) -> np.ndarray:
        return np.all(np.asarray(xs, float) @ self.A.T <= self.b + tol, axis=1)


def axis_template(n: int) -> np.ndarray:
    return np.vstack([np.eye(n), -np.eye(n)])


def octagon_template(n: int) -> np.ndarray:
    rows = [axis_template(n)]
    for i, j in itertools.combinations(range(n), 2):
        for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            r = np.zeros(n)
            r[i], r[j] = si, sj
            rows.append(r[None, :])
    return np.vstack(rows)


TEMPLATES = {"axis": axis_template, "axis+octagon": octagon_template}


def polytope_from_box(box: Box, template: np.ndarray | None = None) -> PolytopeH:
    """Tightest ``b`` for ``template`` around ``box`` (support function of the box)."""
    A = axis_template(box.n) if template is None else np.asarray(template, float)
    lo, hi = box.lo, box.hi
    b = np.array([float(np.sum(np.where(a > 0, a * hi, a * lo))) for a in A])
    return PolytopeH(A, b)


def bounding_box(Q: PolytopeH) -> Box:
    n = Q.n
    upper = Q.b[:n]
    lower = -Q.b[n: 2 * n]
    if np.any(lower > upper):
        raise EmptySet("axis bounds are inverted")
    return Box(tuple(float(v) for v in lower), tuple(float(v) for v in upper))


def volume(Q: PolytopeH) -> float:
    """Volume of the axis-row box, used as a consistent size proxy."""
    return bounding_box(Q).volume()


@dataclass(frozen=True)
class PolyMap:
    components: tuple[Polynomial, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        n = len(comps)
        if n == 0 or any(c.n != n for c in comps):
            raise ValueError("map needs n components over n variables")
        object.__setattr__(self, "components", comps)

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def degree(self) -> tuple[int, ...]:
        return tuple(max(c.degree_vector[i] for c in self.components) for i in range(self.n))

    def __call__(self, xs) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, float))
        return np.stack([c.evaluate_many(xs) for c in self.components], axis=1)

    def direction(self, a) -> Polynomial:
        """``a . f`` as a polynomial."""
        out = Polynomial.zero(self.n)
        for ai, c in zip(a, self.components):
            if ai != 0.0:
                out = out + c.scale(float(ai))
        return out


@dataclass
class ReachConfig:
    epsilon: float = 1e-4  # relative to the volume of the step's bounding box
    policy: str = "round-robin"
    node_budget: int = 100_000


@dataclass
class StepReport:
    step: int
    slack: np.ndarray  # optimizer error bound per face
    volume: float
    bernstein_faces: int = 0  # faces where the direct Bernstein bound was tighter


def reach_step(Q: PolytopeH, f: PolyMap, template: np.ndarray, cfg: ReachConfig | None = None):
    """Over-approximate ``f(Q)`` with the given template.

    Each face takes the larger of two sound lower bounds on ``-a . f``: the
    optimizer's minimum less its error bound, and the Bernstein enclosure
    minimum over the box.  Returns ``(Q_next, slack, bernstein_faces)``.
    """
    cfg = cfg or ReachConfig()
    A = np.asarray(template, float)
    if A.shape[1] != Q.n or not np.array_equal(A[: 2 * Q.n], axis_template(Q.n)):
        raise ValueError("template must start with the axis rows")
    R = bounding_box(Q)
    ocfg = OptimizerConfig(epsilon=cfg.epsilon, epsilon_relative=True, policy=cfg.policy, node_budget=cfg.node_budget)
    b = np.empty(len(A))
    slack = np.zeros(len(A))
    bern_faces = 0
    for i, a in enumerate(A):
        g = -f.direction(a)
        bern_lo = bound_range(g, R)[0]
        opt_lo = -math.inf
        if not g.is_constant() and R.volume() > 0.0:
            res = optimize_objective(g, R, (), ocfg)
            slack[i] = res.error_bound
            if res.complete:
                opt_lo = res.p_min_hat - res.error_bound
        if bern_lo >= opt_lo:
            bern_faces += 1
        b[i] = -max(opt_lo, bern_lo)
    Qn = PolytopeH(A, b)
    bounding_box(Qn)
    return Qn, slack, bern_faces


def reach(Q0: PolytopeH, f: PolyMap, template: np.ndarray, steps: int, cfg: ReachConfig | None = None):
    """Returns ``(polytopes, reports)``; polytopes has ``steps + 1`` entries unless the set empties."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    qs = [Q0]
    reports = [StepReport(0, np.zeros(len(Q0.b)), volume(Q0))]
    for k in range(1, steps + 1):
        try:
            Qn, slack, bern_faces = reach_step(qs[-1], f, template, cfg)
        except EmptySet:
            log.warning("reachable set became empty at step %d", k)
            break
        qs.append(Qn)
        reports.append(StepReport(k, slack, volume(Qn), bern_faces))
    return qs, reports


def simulate(f: PolyMap, x0: np.ndarray, steps: int) -> np.ndarray:
    """Trajectories, shape ``(steps + 1, count, n)``."""
    xs = [np.asarray(x0, float)]
    for _ in range(steps):
        xs.append(f(xs[-1]))
    return np.stack(xs)


# -- model files ------------------------------------------------------------

@dataclass
class ReachModel:
    variables: list[str]
    f: PolyMap
    template: str
    init: Box
    steps: int
    epsilon: float | None = None
    name: str = ""

    def template_matrix(self) -> np.ndarray:
        return TEMPLATES[self.template](len(self.variables))

    def initial_polytope(self) -> PolytopeH:
        return polytope_from_box(self.init, self.template_matrix())


def parse_model_text(text: str, name: str = "") -> ReachModel:
    variables = None
    maps: list[tuple[str, int, int]] = []
    inits: list[tuple[float, float]] = []
    template = "axis"
    steps = None
    epsilon = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        col = raw.index(rest) + 1 if rest else 1
        if key == "vars":
            variables = rest.split()
            if not variables or len(set(variables)) != len(variables):
                raise ParseError("vars: names must be non-empty and distinct", lineno, col)
        elif key == "map":
            maps.append((rest, lineno, col))
        elif key == "template":
            if rest not in TEMPLATES:
                raise ParseError(f"template: expected one of {sorted(TEMPLATES)}", lineno, col)
            template = rest
        elif key == "init":
            parts = rest.split()
            try:
                lo, hi = (float(v) for v in parts)
            except ValueError:
                raise ParseError(f"init[{len(inits)}]: expected two numbers", lineno, col) from None
            if lo > hi:
                raise ParseError(f"init[{len(inits)}]: lower bound exceeds upper bound", lineno, col)
            inits.append((lo, hi))
        elif key == "steps":
            try:
                steps = int(rest)
            except ValueError:
                raise ParseError("steps: expected an integer", lineno, col) from None
            if steps < 0:
                raise ParseError("steps: must be non-negative", lineno, col)
        elif key == "epsilon":
            try:
                epsilon = float(rest)
            except ValueError:
                raise ParseError("epsilon: expected a number", lineno, col) from None
            if not epsilon > 0:
                raise ParseError("epsilon: must be positive", lineno, col)
        else:
            raise ParseError(f"unknown directive {key!r}", lineno, 1)
    if variables is None:
        raise ParseError("vars: missing", 1, 1)
    n = len(variables)
    if len(maps) != n:
        raise ParseError(f"map: expected {n} components, found {len(maps)}", 1, 1)
    if len(inits) != n:
        raise ParseError(f"init: expected {n} intervals, found {len(inits)}", 1, 1)
    if steps is None:
        raise ParseError("steps: missing", 1, 1)
    comps = tuple(parse_expr(e, variables, ln, c) for e, ln, c in maps)
    return ReachModel(variables, PolyMap(comps), template, Box.from_intervals(inits), steps, epsilon, name)


def parse_model(path) -> ReachModel:
    p = Path(path)
    return parse_model_text(p.read_text(encoding="utf-8"), p.stem)


def run_model(model: ReachModel, cfg: ReachConfig | None = None, steps: int | None = None):
    cfg = cfg or ReachConfig()
    if model.epsilon is not None:
        cfg = ReachConfig(epsilon=model.epsilon, policy=cfg.policy, node_budget=cfg.node_budget)
    return reach(model.initial_polytope(), model.f, model.template_matrix(),
                 model.steps if steps is None else steps, cfg)


def reach_csv(polytopes: Sequence[PolytopeH], reports: Sequence[StepReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    m = len(polytopes[0].b)
    w.writerow(["step"] + [f"b{i}" for i in range(m)] + ["max_slack", "volume"])
    for Q, rep in zip(polytopes, reports):
        w.writerow([rep.step] + [repr(float(v)) for v in Q.b] + [repr(float(rep.slack.max(initial=0.0))),
                                                                 repr(float(rep.volume))])
    return buf.getvalue()
