"""Box-constrained polynomial optimization through critical-point feasibility.

Interior extrema are critical points, so the solver is asked for every region
where ``dp/dx_i <= 0`` and ``-dp/dx_i <= 0`` cannot be excluded.  Region
centers plus a lattice over the box faces form the candidate set; the best
candidates are reported together with the a-priori error bound
``2 * omega * sqrt(n) * eps^(1/n)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bernstein import DEFAULT_TAU
from .parser import ProblemFile
from .poly import Box, Polynomial, lipschitz_bound
from .solver import BranchPrune, SolverConfig, solve_constraints

log = logging.getLogger(__name__)


class Infeasible(RuntimeError):
    """No candidate point satisfies the constraints."""


@dataclass
class OptimizerConfig:
    epsilon: float | None = None  # absolute; None takes the problem's epsilon
    epsilon_relative: bool = False  # scale epsilon by the box volume
    policy: str = "round-robin"
    guide: str | None = None
    seed: int = 0
    node_budget: int = 400_000
    max_boundary_points: int = 2_000_000
    tau: float = DEFAULT_TAU


@dataclass
class OptResult:
    p_min_hat: float
    x_min: np.ndarray
    p_max_hat: float
    x_max: np.ndarray
    error_bound: float
    critical_regions: int
    boundary_samples: int
    lipschitz: float = 0.0
    epsilon: float = 0.0
    complete: bool = True  # False when the region search ran out of budget
    stats: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "min": {"value": float(self.p_min_hat), "point": [float(v) for v in self.x_min]},
            "max": {"value": float(self.p_max_hat), "point": [float(v) for v in self.x_max]},
            "error_bound": float(self.error_bound),
            "stats": {
                **self.stats,
                "critical_regions": self.critical_regions,
                "boundary_samples": self.boundary_samples,
                "lipschitz": float(self.lipschitz),
                "epsilon": float(self.epsilon),
                "complete": self.complete,
            },
        }


def grad_constraints(p: Polynomial) -> list[Polynomial]:
    """``(dp/dx_1, -dp/dx_1, ..., dp/dx_n, -dp/dx_n)``; all hold iff the gradient vanishes."""
    out = []
    for d in p.gradient():
        out.extend((d, -d))
    return out


def sample_distance(n: int, eps: float) -> float:
    return 2.0 * math.sqrt(n) * eps ** (1.0 / n)


def error_bound(omega: float, n: int, eps: float) -> float:
    return 2.0 * omega * math.sqrt(n) * eps ** (1.0 / n)


def _axis_points(lo: float, hi: float, step: float) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    k = max(1, math.ceil((hi - lo) / step - 1e-12))
    pts = np.linspace(lo, hi, k + 1)
    pts[0], pts[-1] = lo, hi
    return pts


def boundary_step(n: int, eps: float) -> float:
    """Face lattice step: ``h``, shrunk in high dimension so that every
    face point is within the error bound's radius of a sample."""
    h = sample_distance(n, eps)
    if n >= 6:
        h = min(h, 2.0 * h / math.sqrt(n - 1))
    return h


def sample_boundaries(box: Box, eps: float, max_points: int | None = None) -> np.ndarray:
    """Lattice points on all ``2n`` faces, corners included, duplicates removed."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    n = box.n
    step = boundary_step(n, eps)
    axes = [_axis_points(a, b, step) for a, b in zip(box.lower, box.upper)]
    if max_points is not None:
        est = 2 * sum(int(np.prod([len(axes[j]) for j in range(n) if j != i])) for i in range(n))
        if est > max_points:
            raise ValueError(f"boundary lattice of {est} points exceeds limit {max_points}")
    chunks = []
    for i in range(n):
        others = [axes[j] for j in range(n) if j != i]
        grid = np.stack(np.meshgrid(*others, indexing="ij"), axis=-1).reshape(-1, n - 1) if others else np.zeros((1, 0))
        for v in (box.lower[i], box.upper[i]):
            pts = np.insert(grid, i, v, axis=1)
            chunks.append(pts)
    pts = np.concatenate(chunks)
    return np.unique(pts, axis=0)


def optimize_objective(objective: Polynomial, box: Box, constraints: Sequence[Polynomial] = (),
                       cfg: OptimizerConfig | None = None, epsilon: float = 1e-3) -> OptResult:
    cfg = cfg or OptimizerConfig()
    n = box.n
    eps = cfg.epsilon if cfg.epsilon is not None else epsilon
    if cfg.epsilon_relative:
        eps = eps * box.volume()
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    constraints = list(constraints)
    tau = cfg.tau
    radius = 0.5 * sample_distance(n, eps)
    scfg = SolverConfig(epsilon=eps, epsilon_relative=False, policy=cfg.policy, guide=cfg.guide,
                        seed=cfg.seed, tau=tau,
                        endgame=BranchPrune(resolution=1e-12, max_depth=400, node_budget=cfg.node_budget))
    out = solve_constraints(grad_constraints(objective) + constraints, box, scfg, collect_radius=radius)
    complete = out.stats.get("endgame_nodes", 0) < cfg.node_budget
    if not complete:
        log.warning("critical-region search hit its node budget; the error bound is not guaranteed")
    regions = list(out.candidates)
    if constraints:
        # constrained extrema sit on the constraint surface, which neither the
        # critical regions nor the box faces need to meet; cover the feasible set too
        cover = solve_constraints(constraints, box, scfg, collect_radius=radius)
        complete = complete and cover.stats.get("endgame_nodes", 0) < cfg.node_budget
        regions.extend(cover.candidates)
    centers = np.array([b.center() for b in regions]).reshape(-1, n)
    boundary = sample_boundaries(box, eps, cfg.max_boundary_points)
    pts = np.concatenate([centers, boundary])
    if constraints:
        ok = np.ones(len(pts), dtype=bool)
        for c in constraints:
            ok &= c.evaluate_many(pts) <= tau
        pts = pts[ok]
    if len(pts) == 0:
        raise Infeasible("no candidate point satisfies the constraints")
    vals = objective.evaluate_many(pts)
    imin, imax = int(np.argmin(vals)), int(np.argmax(vals))
    omega = max(lipschitz_bound(objective, box), tau)
    return OptResult(
        p_min_hat=float(vals[imin]), x_min=pts[imin].copy(),
        p_max_hat=float(vals[imax]), x_max=pts[imax].copy(),
        error_bound=error_bound(omega, n, eps),
        critical_regions=len(out.candidates), boundary_samples=len(boundary),
        lipschitz=omega, epsilon=eps, complete=complete,
        stats={"iterations": out.stats.get("iterations", 0), "endgame_nodes": out.stats.get("endgame_nodes", 0)},
    )


def optimize(problem: ProblemFile, cfg: OptimizerConfig | None = None) -> OptResult:
    if problem.objective is None:
        raise ValueError("problem has no objective")
    return optimize_objective(problem.objective, problem.box, problem.constraints, cfg, problem.epsilon)
