"""Branch-and-prune feasibility solver for ``p_i(x) <= 0, x in box``.

Regions live in a max-volume priority queue.  Each popped region is first
checked against every constraint with Bernstein bounds; surviving ambiguity
is attacked with one refinement action (quadratic under/over-approximation or
a split) chosen by a policy.  Regions that fall below the volume threshold go
to an endgame that bisects down to a fixed resolution.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import json
import logging
import math
import re
import shlex
import subprocess
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .abstraction import DEFAULT_CLASSIFY_DEPTH, Action, apply_action
from .bernstein import DEFAULT_DENSE_LIMIT, DEFAULT_TAU, fast_minmax, features
from .parser import ProblemFile, export_smtlib2
from .poly import Box, Polynomial

log = logging.getLogger(__name__)


class Status(str, enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class BranchPrune:
    """In-process endgame: bisect until widths fall below ``resolution`` (relative per axis)."""

    resolution: float = 1e-4
    max_depth: int = 60
    node_budget: int = 200_000
    corner_tests: int = 8  # test box corners when n is at most this

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")


@dataclass(frozen=True)
class ExternalSMT:
    """Delegate each surviving region to an SMT solver command.

    ``command`` may contain ``{file}``; otherwise the path is appended.
    """

    command: str
    timeout: float = 60.0


@dataclass
class SolverConfig:
    epsilon: float = 1e-3
    epsilon_relative: bool = True  # epsilon scales with the volume of the input box
    max_iterations: int = 200_000
    endgame: BranchPrune | ExternalSMT = field(default_factory=BranchPrune)
    guide: str | None = None  # path to a guide model
    policy: str = "auto"  # auto | guide | round-robin | random
    seed: int = 0
    workers: int = 1
    tau: float = DEFAULT_TAU
    classify_depth: int = DEFAULT_CLASSIFY_DEPTH
    dense_limit: int = DEFAULT_DENSE_LIMIT

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class Certificate:
    """``constraint`` is positive on ``box``: its lower bound there is ``lower > tau``.

    ``kind`` names the bound: ``bernstein`` (Bernstein enclosure of the
    constraint itself), ``under-approx`` (enclosure of ``bound``, a quadratic
    lying below the constraint on the region it was built for) or
    ``external`` (an SMT solver answered unsat).
    """

    box: Box
    constraint: int
    lower: float
    kind: str = "bernstein"
    bound: Polynomial | None = None


@dataclass
class SolveOutcome:
    status: Status
    witness: np.ndarray | None = None
    residuals: np.ndarray | None = None
    certificate: list[Certificate] = field(default_factory=list)
    reason: str | None = None
    remaining_volume: float = 0.0
    stats: dict = field(default_factory=dict)
    candidates: list[Box] = field(default_factory=list)  # collect mode only

    def to_json_dict(self) -> dict:
        out: dict = {"status": self.status.value}
        if self.witness is not None:
            out["witness"] = [float(v) for v in self.witness]
            out["residuals"] = [float(v) for v in self.residuals]
        if self.status is Status.UNSAT:
            kinds = Counter(c.kind for c in self.certificate)
            out["certificate_summary"] = {
                "boxes": len(self.certificate),
                "volume": float(sum(c.box.volume() for c in self.certificate)),
                "kinds": dict(sorted(kinds.items())),
                "min_lower_bound": float(min((c.lower for c in self.certificate), default=0.0)),
            }
        if self.status is Status.UNKNOWN:
            out["reason"] = self.reason
            out["remaining_volume"] = float(self.remaining_volume)
        out["stats"] = self.stats
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


# -- regions and policies ---------------------------------------------------

@dataclass
class Region:
    box: Box
    negative: frozenset = frozenset()  # constraints proven <= tau on the whole box
    neg_history: tuple = ()  # negative volume filed per constraint by ancestors


def partition_orthants(box: Box) -> list[Box]:
    """Split every interval that straddles zero at zero."""
    return box.orthant_pieces()


def select_poly(candidates: Sequence[int], neg_history: Sequence[float]) -> int:
    """Constraint with the least negative volume in the region's ancestry; lowest index on ties."""
    if not candidates:
        raise ValueError("no candidate constraints")
    return min(candidates, key=lambda i: (neg_history[i] if i < len(neg_history) else 0.0, i))


class RegionQueue:
    """Max-volume priority queue; insertion order breaks volume ties."""

    def __init__(self):
        self._heap: list = []
        self._count = itertools.count()

    def push(self, region: Region):
        heapq.heappush(self._heap, (-region.box.volume(), next(self._count), region))

    def pop(self) -> Region:
        return heapq.heappop(self._heap)[2]

    def peek_volume(self) -> float:
        return -self._heap[0][0] if self._heap else 0.0

    def __len__(self):
        return len(self._heap)

    def regions(self) -> list[Region]:
        return [r for _, _, r in sorted(self._heap)]

    def total_volume(self) -> float:
        return float(sum(-v for v, _, _ in self._heap))


def pop_region(queue: RegionQueue) -> Region:
    return queue.pop()


class ActionPolicy:
    needs_features = False

    def choose(self, feats) -> Action:
        raise NotImplementedError


class RoundRobinPolicy(ActionPolicy):
    def __init__(self):
        self._next = 0

    def choose(self, feats) -> Action:
        a = Action(self._next % 3)
        self._next += 1
        return a


class RandomPolicy(ActionPolicy):
    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(seed)

    def choose(self, feats) -> Action:
        return Action(int(self.rng.integers(3)))


class GuidePolicy(ActionPolicy):
    needs_features = True

    def __init__(self, model):
        self.model = model

    def choose(self, feats) -> Action:
        from .guide import best_action
        return best_action(self.model, feats)


class FixedPolicy(ActionPolicy):
    def __init__(self, action: Action):
        self.action = Action(action)

    def choose(self, feats) -> Action:
        return self.action


def make_policy(cfg: SolverConfig) -> ActionPolicy:
    kind = cfg.policy
    if kind == "auto":
        kind = "guide" if cfg.guide else "round-robin"
    if kind == "guide":
        if not cfg.guide:
            raise ValueError("guide policy requires a model path")
        from .guide import load_model
        return GuidePolicy(load_model(cfg.guide))
    if kind == "round-robin":
        if cfg.policy == "auto":
            log.warning("no guide model given; using round-robin action selection")
        return RoundRobinPolicy()
    if kind == "random":
        return RandomPolicy(cfg.seed)
    raise ValueError(f"unknown policy {cfg.policy!r}")


# -- main loop --------------------------------------------------------------

@dataclass
class StepRecord:
    popped_volume: float
    discarded_volume: float = 0.0
    negative_volume: float = 0.0
    refiled_volume: float = 0.0
    action: Action | None = None
    constraint: int | None = None
    witness: Region | None = None


class SolverState:
    """Queue of ambiguous regions plus the certificate and negative ledgers."""

    def __init__(self, constraints: Sequence[Polynomial], box: Box, cfg: SolverConfig,
                 policy: ActionPolicy | None = None):
        self.constraints = list(constraints)
        self.m = len(self.constraints)
        self.box = box
        self.cfg = cfg
        self.tau = cfg.tau
        self.policy = policy if policy is not None else make_policy(cfg)
        self.queue = RegionQueue()
        self.certificate: list[Certificate] = []
        self.witnesses: list[Region] = []
        self.neg_volume = [0.0] * self.m
        self.iterations = 0
        self.actions: Counter = Counter()
        for piece in partition_orthants(box):
            self.queue.push(Region(piece, frozenset(), (0.0,) * self.m))

    def bounds(self, i: int, box: Box) -> tuple[float, float]:
        return fast_minmax(self.constraints[i], box, self.cfg.dense_limit)

    def _certify(self, i: int, box: Box, lo: float | None = None, bound: Polynomial | None = None):
        own = self.bounds(i, box)[0] if lo is None else lo
        if own > self.tau:
            self.certificate.append(Certificate(box, i, own, "bernstein"))
            return
        ulo = fast_minmax(bound, box, self.cfg.dense_limit)[0]
        if not ulo > self.tau:
            raise AssertionError("positive box without a positive bound")
        self.certificate.append(Certificate(box, i, ulo, "under-approx", bound))

    def step(self) -> StepRecord:
        region = self.queue.pop()
        self.iterations += 1
        vol = region.box.volume()
        rec = StepRecord(vol)
        negative = set(region.negative)
        ambiguous = []
        for i in range(self.m):
            if i in negative:
                continue
            lo, hi = self.bounds(i, region.box)
            if lo > self.tau:
                self.certificate.append(Certificate(region.box, i, lo, "bernstein"))
                rec.discarded_volume = vol
                rec.constraint = i
                return rec
            if hi <= self.tau:
                negative.add(i)
                self.neg_volume[i] += vol
            else:
                ambiguous.append(i)
        if not ambiguous:
            region = Region(region.box, frozenset(negative), region.neg_history)
            self.witnesses.append(region)
            rec.negative_volume = vol
            rec.witness = region
            return rec
        i = select_poly(ambiguous, region.neg_history)
        p = self.constraints[i]
        feats = features(p, region.box, self.cfg.dense_limit) if self.policy.needs_features else None
        action = self.policy.choose(feats)
        self.actions[action.name] += 1
        rec.action, rec.constraint = action, i
        part, _ = apply_action(p, region.box, action, self.cfg.classify_depth, self.tau)
        for b in part.positive:
            self._certify(i, b, bound=part.under)
            rec.discarded_volume += b.volume()
        hist = list(region.neg_history)
        neg_vol = sum(b.volume() for b in part.negative)
        hist[i] += neg_vol
        hist = tuple(hist)
        for b in part.negative:
            self.neg_volume[i] += b.volume()
            child = Region(b, frozenset(negative | {i}), hist)
            rec.negative_volume += b.volume()
            if len(child.negative) == self.m:
                self.witnesses.append(child)
                if rec.witness is None:
                    rec.witness = child
            else:
                self.queue.push(child)
        for b in part.ambiguous:
            self.queue.push(Region(b, frozenset(negative), hist))
            rec.refiled_volume += b.volume()
        return rec


def residuals_at(constraints: Sequence[Polynomial], x) -> np.ndarray:
    return np.array([p.evaluate(x) for p in constraints], dtype=float)


def _verified(constraints, x, tau) -> np.ndarray | None:
    r = residuals_at(constraints, x)
    return r if np.all(r <= tau) else None


# -- endgame ----------------------------------------------------------------

@dataclass
class EndgameResult:
    witness: np.ndarray | None = None
    residuals: np.ndarray | None = None
    certificate: list[Certificate] = field(default_factory=list)
    undecided: list[Box] = field(default_factory=list)
    leaves: list[Box] = field(default_factory=list)  # collect mode
    nodes: int = 0
    exhausted: bool = False


def _first_feasible(constraints, box: Box, corners: bool, tau: float):
    """First of (center, corners...) with every residual <= tau, or None."""
    pts = box.center()[None, :]
    if corners:
        pts = np.concatenate([pts, box.corners()])
    ok = np.ones(len(pts), dtype=bool)
    for p in constraints:
        ok &= p.evaluate_many(pts) <= tau
        if not ok.any():
            return None
    for x in pts[ok]:
        r = _verified(constraints, x, tau)
        if r is not None:
            return x, r
    return None


def endgame_region(region: Region, constraints: Sequence[Polynomial], root: Box, eg: BranchPrune,
                   tau: float = DEFAULT_TAU, dense_limit: int = DEFAULT_DENSE_LIMIT,
                   collect_radius: float | None = None, node_budget: int | None = None) -> EndgameResult:
    """Depth-first bisection of one region.

    Decision mode stops at the first verified point.  Collect mode
    (``collect_radius`` set) skips point tests and returns every unpruned
    leaf whose half-diagonal is at most ``collect_radius``.
    """
    res = EndgameResult()
    budget = eg.node_budget if node_budget is None else node_budget
    min_width = np.asarray(root.widths) * eg.resolution
    corners = region.box.n <= eg.corner_tests
    m = len(constraints)
    stack = [(region.box, 0, region.negative, None)]
    while stack:
        box, depth, negative, known = stack.pop()
        res.nodes += 1
        negative = set(negative)
        pruned = False
        for i in range(m):
            if i in negative:
                continue
            lo, hi = known[i] if known is not None else fast_minmax(constraints[i], box, dense_limit)
            if lo > tau:
                res.certificate.append(Certificate(box, i, lo, "bernstein"))
                pruned = True
                break
            if hi <= tau:
                negative.add(i)
        if pruned:
            continue
        if collect_radius is not None:
            if box.half_diagonal() <= collect_radius or len(negative) == m:
                res.leaves.append(box)
                continue
        else:
            hit = _first_feasible(constraints, box, corners, tau)
            if hit is not None:
                res.witness, res.residuals = np.asarray(hit[0], float), hit[1]
                return res
        resolved = bool(np.all(np.asarray(box.widths) <= min_width))
        if resolved or depth >= eg.max_depth or res.nodes >= budget:
            if collect_radius is not None and not resolved and depth < eg.max_depth:
                res.exhausted = True
            res.undecided.append(box)
            if res.nodes >= budget:
                res.exhausted = True
                res.undecided.extend(item[0] for item in stack)
                return res
            continue
        axis = box.widest_axis(root.widths)
        children = []
        for child in reversed(box.bisect(axis)):
            # bounds are computed once here and reused when the child is popped;
            # the child with the smaller worst lower bound is explored first
            bounds = {i: fast_minmax(constraints[i], child, dense_limit) for i in range(m) if i not in negative}
            score = max((b[0] for b in bounds.values()), default=-math.inf)
            children.append((score, child, bounds))
        if collect_radius is None and children[1][0] > children[0][0]:
            children.reverse()
        for _, child, bounds in children:
            stack.append((child, depth + 1, frozenset(negative), bounds))
    return res


def endgame_branch_prune(regions: Sequence[Region], constraints: Sequence[Polynomial], root: Box,
                         eg: BranchPrune | None = None, tau: float = DEFAULT_TAU,
                         dense_limit: int = DEFAULT_DENSE_LIMIT, workers: int = 1) -> SolveOutcome:
    """Resolve sub-threshold regions by bisection; Sat, Unsat or Unknown."""
    eg = eg or BranchPrune()
    results = _run_endgames(regions, constraints, root, eg, tau, dense_limit, None, workers)
    certs: list[Certificate] = []
    undecided: list[Box] = []
    nodes = 0
    exhausted = False
    for r in results:
        nodes += r.nodes
        if r.witness is not None:
            return SolveOutcome(Status.SAT, r.witness, r.residuals, stats={"endgame_nodes": nodes})
        certs.extend(r.certificate)
        undecided.extend(r.undecided)
        exhausted = exhausted or r.exhausted
    stats = {"endgame_nodes": nodes}
    if undecided:
        reason = "node budget exhausted" if exhausted else "resolution limit reached"
        return SolveOutcome(Status.UNKNOWN, certificate=certs, reason=reason,
                            remaining_volume=float(sum(b.volume() for b in undecided)), stats=stats)
    return SolveOutcome(Status.UNSAT, certificate=certs, stats=stats)


def _endgame_job(args):
    return endgame_region(*args)


def _run_endgames(regions, constraints, root, eg, tau, dense_limit, collect_radius, workers):
    """Run region endgames in order; with several workers, in a process pool."""
    if workers <= 1 or len(regions) < 2:
        out = []
        budget = eg.node_budget
        for k, reg in enumerate(regions):
            r = endgame_region(reg, constraints, root, eg, tau, dense_limit, collect_radius, max(budget, 1))
            budget -= r.nodes
            out.append(r)
            if r.witness is not None and collect_radius is None:
                break
            if budget <= 0 and k + 1 < len(regions):
                # unvisited regions stay undecided
                r.exhausted = True
                r.undecided.extend(rest.box for rest in regions[k + 1:])
                break
        return out
    from concurrent.futures import ProcessPoolExecutor
    per_region = max(eg.node_budget // len(regions), 1)
    jobs = [(reg, constraints, root, eg, tau, dense_limit, collect_radius, per_region) for reg in regions]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_endgame_job, jobs))


# -- external endgame -------------------------------------------------------

_DEFINE_FUN = re.compile(r"\(define-fun\s+(\S+)\s+\(\)\s+Real\s+")


def _parse_smt_real(text: str) -> Fraction:
    """Parse an SMT-LIB real term: decimals, ``(- t)`` and ``(/ a b)``."""
    toks = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def term():
        nonlocal pos
        tok = toks[pos]
        pos += 1
        if tok != "(":
            return Fraction(tok)
        op = toks[pos]
        pos += 1
        args = []
        while toks[pos] != ")":
            args.append(term())
        pos += 1
        if op == "-" and len(args) == 1:
            return -args[0]
        if op == "-":
            return args[0] - sum(args[1:])
        if op == "/" and len(args) == 2:
            return args[0] / args[1]
        if op == "+":
            return sum(args, Fraction(0))
        raise ValueError(f"unsupported model term operator {op!r}")

    return term()


def parse_smt_model(text: str, names: Sequence[str]) -> np.ndarray | None:
    values = {}
    for mt in _DEFINE_FUN.finditer(text):
        start = mt.end()
        depth = 0
        end = start
        while end < len(text):
            ch = text[end]
            if ch == "(":
                depth += 1
            elif ch == ")":
                if depth == 0:
                    break
                depth -= 1
            end += 1
        try:
            values[mt.group(1)] = float(_parse_smt_real(text[start:end]))
        except (ValueError, ZeroDivisionError, IndexError):
            return None
    if not all(n in values for n in names):
        return None
    return np.array([values[n] for n in names])


def external_endgame(regions: Sequence[Region], problem: ProblemFile, eg: ExternalSMT,
                     tau: float = DEFAULT_TAU) -> SolveOutcome:
    certs: list[Certificate] = []
    unknown: list[Box] = []
    for reg in regions:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "region.smt2"
            path.write_text(export_smtlib2(problem, reg.box), encoding="utf-8")
            cmd = eg.command.format(file=str(path)) if "{file}" in eg.command else f"{eg.command} {shlex.quote(str(path))}"
            try:
                proc = subprocess.run(cmd, shell=True, capture_output=True, text=True, timeout=eg.timeout)
                out = proc.stdout
            except subprocess.TimeoutExpired:
                out = ""
        first = out.strip().splitlines()[0].strip() if out.strip() else ""
        if first == "unsat":
            certs.append(Certificate(reg.box, -1, float("nan"), "external"))
        elif first == "sat":
            x = parse_smt_model(out, problem.variables)
            r = _verified(problem.constraints, x, tau) if x is not None and reg.box.contains(x, 1e-12) else None
            if r is not None:
                return SolveOutcome(Status.SAT, x, r)
            unknown.append(reg.box)
        else:
            unknown.append(reg.box)
    if unknown:
        return SolveOutcome(Status.UNKNOWN, certificate=certs, reason="external solver inconclusive",
                            remaining_volume=float(sum(b.volume() for b in unknown)))
    return SolveOutcome(Status.UNSAT, certificate=certs)


# -- driver -----------------------------------------------------------------

def _constant_screen(constraints, tau):
    """Index of a constraint that is a positive constant, if any."""
    for i, p in enumerate(constraints):
        if p.is_constant() and p.constant_term() > tau:
            return i
    return None


def solve_constraints(constraints: Sequence[Polynomial], box: Box, cfg: SolverConfig | None = None,
                      problem: ProblemFile | None = None, policy: ActionPolicy | None = None,
                      collect_radius: float | None = None) -> SolveOutcome:
    """Decide ``exists x in box: all p_i(x) <= 0``.

    With ``collect_radius`` the solver does not stop at a witness; it
    returns in ``candidates`` every region it could not exclude, refined to
    that half-diagonal (plus regions where all constraints hold).
    """
    cfg = cfg or SolverConfig()
    tau = cfg.tau
    constraints = list(constraints)
    if any(p.n != box.n for p in constraints):
        raise ValueError("constraint dimension differs from box dimension")
    eps = cfg.epsilon * box.volume() if cfg.epsilon_relative else cfg.epsilon
    stats: dict = {"iterations": 0}
    if not constraints:
        x = box.center()
        if collect_radius is not None:
            return SolveOutcome(Status.SAT, x, np.zeros(0), candidates=[box], stats=stats)
        return SolveOutcome(Status.SAT, x, np.zeros(0), stats=stats)
    k = _constant_screen(constraints, tau)
    if k is not None:
        c = constraints[k].constant_term()
        return SolveOutcome(Status.UNSAT, certificate=[Certificate(box, k, c)], stats=stats)
    state = SolverState(constraints, box, cfg, policy)
    collect = collect_radius is not None
    while len(state.queue) and state.queue.peek_volume() >= eps:
        if state.iterations >= cfg.max_iterations:
            stats.update(_state_stats(state))
            return SolveOutcome(Status.UNKNOWN, certificate=state.certificate, reason="iteration budget exhausted",
                                remaining_volume=state.queue.total_volume(), stats=stats)
        rec = state.step()
        if rec.witness is not None and not collect:
            x = rec.witness.box.center()
            r = _verified(constraints, x, tau)
            if r is not None:
                stats.update(_state_stats(state))
                stats["phase"] = "refinement"
                return SolveOutcome(Status.SAT, x, r, stats=stats)
            # rounding pushed a residual over tau; let the endgame look at it
            state.queue.push(Region(rec.witness.box, frozenset(), rec.witness.neg_history))
            state.witnesses.pop()
    stats.update(_state_stats(state))
    survivors = state.queue.regions()
    if collect:
        eg = cfg.endgame if isinstance(cfg.endgame, BranchPrune) else BranchPrune()
        results = _run_endgames(survivors, constraints, box, eg, tau, cfg.dense_limit, collect_radius, cfg.workers)
        cands = [w.box for w in state.witnesses]
        for r in results:
            cands.extend(r.leaves)
            cands.extend(r.undecided)
        stats["endgame_nodes"] = sum(r.nodes for r in results)
        stats["candidate_regions"] = len(cands)
        status = Status.SAT if cands else Status.UNSAT
        return SolveOutcome(status, candidates=cands, stats=stats,
                            certificate=state.certificate + [c for r in results for c in r.certificate])
    if not survivors:
        return SolveOutcome(Status.UNSAT, certificate=state.certificate, stats=stats)
    if isinstance(cfg.endgame, ExternalSMT):
        if problem is None:
            raise ValueError("external endgame needs the problem file")
        out = external_endgame(survivors, problem, cfg.endgame, tau)
    else:
        out = endgame_branch_prune(survivors, constraints, box, cfg.endgame, tau, cfg.dense_limit, cfg.workers)
    out.certificate = state.certificate + out.certificate
    out.stats = {**stats, **out.stats, "endgame_regions": len(survivors)}
    if out.status is Status.SAT:
        out.stats["phase"] = "endgame"
    return out


def _state_stats(state: SolverState) -> dict:
    return {
        "iterations": state.iterations,
        "pruned_volume": float(sum(c.box.volume() for c in state.certificate)),
        "negative_volume": float(sum(state.neg_volume)),
        "actions": {a.name.lower(): state.actions.get(a.name, 0) for a in Action},
    }


def solve(problem: ProblemFile, cfg: SolverConfig | None = None, policy: ActionPolicy | None = None) -> SolveOutcome:
    if cfg is None:
        cfg = SolverConfig(epsilon=problem.epsilon)
    return solve_constraints(problem.constraints, problem.box, cfg, problem=problem, policy=policy)


def verify_certificate(outcome: SolveOutcome, constraints: Sequence[Polynomial], box: Box,
                       tau: float = DEFAULT_TAU, fraction: float = 1.0, seed: int = 0) -> bool:
    """Re-check an Unsat certificate: coverage plus full-tensor positivity on a sample of entries."""
    from .bernstein import bernstein_coefficients, enclosure
    total = sum(c.box.volume() for c in outcome.certificate)
    if abs(total - box.volume()) > 1e-6 * box.volume():
        return False
    rng = np.random.default_rng(seed)
    for c in outcome.certificate:
        if c.kind == "external":
            continue
        if fraction < 1.0 and rng.random() > fraction:
            continue
        p = constraints[c.constraint]
        for piece in c.box.orthant_pieces():
            if c.kind == "bernstein":
                lo = enclosure(bernstein_coefficients(p, piece))[0]
            else:
                # p = (p - U) + U with p - U >= 0 up to rounding
                gap = enclosure(bernstein_coefficients(p - c.bound, piece))[0]
                lo = enclosure(bernstein_coefficients(c.bound, piece))[0] + min(gap, 0.0)
            if not lo > tau:
                return False
    return True
