"""Benchmark suites: the shipped PVS-style problems, random instances and scaling sweeps."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Iterator

import numpy as np

from .oracle import VerdictKind, adjudicate, random_problem
from .parser import ProblemFile, parse_problem_text
from .poly import Box, Polynomial
from .solver import SolveOutcome, SolverConfig, solve

CSV_COLUMNS = ["instance", "verdict", "expected", "wall_time", "iterations", "pruned_volume"]


@dataclass
class Instance:
    name: str
    problem: ProblemFile
    expected: str | None = None


def data_path(*parts: str):
    return resources.files("bernprune").joinpath("data", *parts)


def golden_verdicts() -> dict:
    return json.loads(data_path("pvs", "golden.json").read_text(encoding="utf-8"))


def pvs_instances() -> list[Instance]:
    golden = golden_verdicts()
    out = []
    for name in golden["order"]:
        text = data_path("pvs", f"{name}.problem").read_text(encoding="utf-8")
        out.append(Instance(name, parse_problem_text(text), golden["verdicts"][name]))
    return out


def order_family(order: int, shift: float) -> Polynomial:
    """``x1^d + x2^d + x1^2 - x1 x2 + x2^2 + shift``; for even ``d`` its minimum on [-1,1]^2 is ``shift`` at 0."""
    if order < 2 or order % 2:
        raise ValueError("order must be even and at least 2")
    return Polynomial(2, {(order, 0): 1.0, (0, order): 1.0, (2, 0): 1.0, (1, 1): -1.0, (0, 2): 1.0,
                          (0, 0): shift})


def chain_family(n: int, order: int, shift: float) -> Polynomial:
    """``sum x_i^d + 0.25 sum x_i x_{i+1} + shift``.

    The chain terms lie in ``[-0.25 (n-1), 0.25 (n-1)]`` on the unit cube, so
    ``shift > 0.25 (n-1)`` is infeasible and ``shift < 0`` is feasible at 0.
    """
    terms = {}
    for i in range(n):
        k = [0] * n
        k[i] = order
        terms[tuple(k)] = 1.0
    for i in range(n - 1):
        k = [0] * n
        k[i] = k[i + 1] = 1
        terms[tuple(k)] = 0.25
    terms[(0,) * n] = terms.get((0,) * n, 0.0) + shift
    return Polynomial(n, terms)


def _unit_problem(p: Polynomial, epsilon: float = 1e-3) -> ProblemFile:
    n = p.n
    return ProblemFile([f"x{i + 1}" for i in range(n)], Box.cube(-1.0, 1.0, n), [p], epsilon=epsilon)


def scaling_instances(orders=(10, 20, 50, 100, 200), dims=(2, 4, 6, 8, 10)) -> list[Instance]:
    out = []
    for d in orders:
        out.append(Instance(f"order{d}_unsat", _unit_problem(order_family(d, 0.01)), "unsat"))
        out.append(Instance(f"order{d}_sat", _unit_problem(order_family(d, -0.01)), "sat"))
    for n in dims:
        out.append(Instance(f"dim{n}_unsat", _unit_problem(chain_family(n, 6, 2.3)), "unsat"))
        out.append(Instance(f"dim{n}_sat", _unit_problem(chain_family(n, 6, -0.5)), "sat"))
    return out


def random_instances(count: int = 50, seed: int = 0) -> list[Instance]:
    """Random feasibility problems; expected verdicts come from the oracle (None when inconclusive)."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        cons, box = random_problem(rng)
        v = adjudicate(cons, box)
        expected = {VerdictKind.SAT_POINT: "sat", VerdictKind.PROVEN_UNSAT: "unsat"}.get(v.kind)
        names = [f"x{j + 1}" for j in range(box.n)]
        out.append(Instance(f"random{i:03d}", ProblemFile(names, box, cons), expected))
    return out


SUITES: dict[str, Callable[..., list[Instance]]] = {
    "pvs": pvs_instances,
    "random": random_instances,
    "scaling": scaling_instances,
}


def run_instance(inst: Instance, cfg: SolverConfig | None = None) -> tuple[dict, SolveOutcome]:
    cfg = cfg or SolverConfig(epsilon=inst.problem.epsilon)
    t0 = time.perf_counter()
    out = solve(inst.problem, cfg)
    wall = time.perf_counter() - t0
    row = {
        "instance": inst.name,
        "verdict": out.status.value,
        "expected": inst.expected or "",
        "wall_time": round(wall, 6),
        "iterations": out.stats.get("iterations", 0),
        "pruned_volume": out.stats.get("pruned_volume", 0.0),
    }
    return row, out


def run_suite(instances, cfg_for: Callable[[Instance], SolverConfig] | None = None) -> Iterator[dict]:
    for inst in instances:
        yield run_instance(inst, cfg_for(inst) if cfg_for else None)[0]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
