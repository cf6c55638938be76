"""Quadratic under/over-approximations and the three refinement actions."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

from .bernstein import DEFAULT_TAU, SignClass, bound_range, sign_classify
from .poly import Box, DimensionError, Polynomial, taylor_quadratic

DEFAULT_CLASSIFY_DEPTH = 4


class Action(enum.IntEnum):
    """Refinement actions, ordered for tie-breaking."""

    UNDER_APPROX = 0
    OVER_APPROX = 1
    SPLIT = 2


@dataclass(frozen=True)
class QuadraticBounds:
    """``under <= p <= over`` everywhere on ``box``."""

    under: Polynomial
    over: Polynomial
    box: Box


@dataclass
class RegionPartition:
    positive: list[Box] = field(default_factory=list)
    negative: list[Box] = field(default_factory=list)
    ambiguous: list[Box] = field(default_factory=list)
    # the quadratic that certified ``positive`` (UnderApprox only)
    under: Polynomial | None = None

    def volumes(self) -> tuple[float, float, float]:
        return (
            sum(b.volume() for b in self.positive),
            sum(b.volume() for b in self.negative),
            sum(b.volume() for b in self.ambiguous),
        )


def quadratic_bounds(p: Polynomial, box: Box) -> QuadraticBounds:
    """Taylor quadratic at the box center shifted by Bernstein bounds of the remainder."""
    if box.n != p.n:
        raise DimensionError("box and polynomial dimensions differ")
    t2 = taylor_quadratic(p, box.center())
    if t2 is p:
        return QuadraticBounds(p, p, box)
    r_lo, r_hi = bound_range(p - t2, box)
    under = t2 + r_lo if r_lo != 0.0 else t2
    over = t2 + r_hi if r_hi != 0.0 else t2
    return QuadraticBounds(under, over, box)


def classify_quadratic(q: Polynomial, box: Box, depth: int = DEFAULT_CLASSIFY_DEPTH,
                       tau: float = DEFAULT_TAU, scale: Sequence[float] | None = None):
    """Bisect ``box`` up to ``depth`` times, sorting leaves by the sign of ``q``.

    Returns ``(negative, positive, undecided)`` lists of boxes.
    """
    if q.total_degree > 2:
        raise ValueError("classify_quadratic expects a polynomial of degree at most 2")
    neg: list[Box] = []
    pos: list[Box] = []
    und: list[Box] = []
    scale = box.widths if scale is None else scale
    stack = [(piece, depth) for piece in reversed(box.orthant_pieces())]
    while stack:
        b, d = stack.pop()
        s = sign_classify(q, b, tau)
        if s is SignClass.POSITIVE:
            pos.append(b)
        elif s is SignClass.NEGATIVE:
            neg.append(b)
        elif d <= 0:
            und.append(b)
        else:
            left, right = b.bisect(b.widest_axis(scale))
            stack.append((right, d - 1))
            stack.append((left, d - 1))
    return neg, pos, und


def apply_action(p: Polynomial, box: Box, action: Action, depth: int = DEFAULT_CLASSIFY_DEPTH,
                 tau: float = DEFAULT_TAU, scale: Sequence[float] | None = None,
                 bounds: QuadraticBounds | None = None):
    """Apply one refinement action; returns ``(partition, volume_reduction)``."""
    action = Action(action)
    if action is Action.SPLIT:
        left, right = box.bisect(box.widest_axis(scale))
        return RegionPartition(ambiguous=[left, right]), 0.0
    qb = bounds if bounds is not None else quadratic_bounds(p, box)
    if action is Action.UNDER_APPROX:
        neg, pos, und = classify_quadratic(qb.under, box, depth, tau, scale)
        part = RegionPartition(positive=pos, ambiguous=neg + und, under=qb.under)
    else:
        neg, pos, und = classify_quadratic(qb.over, box, depth, tau, scale)
        part = RegionPartition(negative=neg, ambiguous=pos + und)
    remaining = sum(b.volume() for b in part.ambiguous)
    return part, box.volume() - remaining
