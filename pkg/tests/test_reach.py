import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bernprune.parser import ParseError, parse_expr
from bernprune.poly import Box
from bernprune.reach import (EmptySet, PolyMap, PolytopeH, ReachConfig, axis_template, bounding_box,
                             octagon_template, parse_model_text, polytope_from_box, reach, reach_csv, reach_step,
                             simulate, volume)
from conftest import random_poly

NAMES = ["x", "y"]


def pmap(*exprs):
    return PolyMap(tuple(parse_expr(e, NAMES) for e in exprs))


def test_bounding_box_axis_template():
    Q = PolytopeH(axis_template(2), np.array([1.0, 1.0, 0.0, 0.0]))
    assert bounding_box(Q) == Box.from_intervals([(0, 1), (0, 1)])


def test_bounding_box_ignores_diagonals():
    Q = polytope_from_box(Box.cube(0, 1, 2), octagon_template(2))
    tight = PolytopeH(Q.A, np.concatenate([Q.b[:4], Q.b[4:] - 0.3]))
    assert bounding_box(tight) == Box.from_intervals([(0, 1), (0, 1)])
    assert volume(tight) == pytest.approx(1.0)


def test_inverted_bounds_are_empty():
    with pytest.raises(EmptySet):
        bounding_box(PolytopeH(axis_template(1), np.array([0.0, -1.0])))


def test_template_must_start_with_axes():
    with pytest.raises(ValueError):
        PolytopeH(np.array([[1.0, 1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]), np.zeros(4))


def test_octagon_rows():
    A = octagon_template(3)
    assert A.shape == (6 + 3 * 4, 3)


def test_halving_map_contains_image():
    f = pmap("0.5*x", "0.5*y")
    Q0 = polytope_from_box(Box.cube(0.9, 1.1, 2))
    Q1, slack, _ = reach_step(Q0, f, axis_template(2))
    R = bounding_box(Q1)
    assert np.all(np.asarray(R.lo) <= 0.45 + 1e-12)
    assert np.all(np.asarray(R.hi) >= 0.55 - 1e-12)
    # faces are loose by at most twice the optimizer's bound
    exact = np.array([0.55, 0.55, -0.45, -0.45])
    assert np.all(Q1.b - exact <= 2 * slack + 1e-12)


def test_identity_map_keeps_set():
    f = pmap("x", "y")
    Q0 = polytope_from_box(Box.from_intervals([(-1, 2), (0, 0.5)]))
    Q1, slack, _ = reach_step(Q0, f, axis_template(2))
    assert np.all(Q1.b >= Q0.b - 1e-12)
    assert np.all(Q1.b - Q0.b <= slack + 1e-12)


def test_zero_steps():
    Q0 = polytope_from_box(Box.cube(0, 1, 2))
    qs, reports = reach(Q0, pmap("x", "y"), axis_template(2), 0)
    assert len(qs) == 1 and qs[0] is Q0
    assert reports[0].step == 0


def test_negative_steps_rejected():
    with pytest.raises(ValueError):
        reach(polytope_from_box(Box.cube(0, 1, 1)), PolyMap((parse_expr("x", ["x"]),)), axis_template(1), -1)


def test_contraction_three_steps():
    f = pmap("0.5*x", "0.5*y")
    qs, reports = reach(polytope_from_box(Box.cube(0.9, 1.1, 2)), f, axis_template(2), 3)
    w0 = np.asarray(bounding_box(qs[0]).widths)
    w3 = np.asarray(bounding_box(qs[3]).widths)
    accumulated = sum(2 * r.slack.max() for r in reports)
    assert np.all(w3 >= w0 / 8 - 1e-12)
    assert np.all(w3 <= w0 / 8 + accumulated)


def test_random_quadratic_map_one_step(rng):
    box = Box.cube(-1, 1, 2)
    comps = tuple(random_poly(rng, 2, 2, 5) for _ in range(2))
    f = PolyMap(comps)
    Q1, _, _ = reach_step(polytope_from_box(box, octagon_template(2)), f, octagon_template(2))
    xs = rng.uniform(-1, 1, size=(5000, 2))
    assert Q1.contains_many(f(xs)).all()


@settings(max_examples=15)
@given(seed=st.integers(0, 10_000), steps=st.integers(1, 3))
def test_sampled_trajectories_stay_inside(seed, steps):
    rng = np.random.default_rng(seed)
    comps = tuple(random_poly(rng, 2, 2, 4, scale=0.4) for _ in range(2))
    f = PolyMap(comps)
    init = Box.cube(-0.5, 0.5, 2)
    qs, _ = reach(polytope_from_box(init), f, axis_template(2), steps, ReachConfig(epsilon=1e-3))
    traj = simulate(f, rng.uniform(-0.5, 0.5, size=(500, 2)), len(qs) - 1)
    for k, Q in enumerate(qs):
        assert Q.contains_many(traj[k]).all()


def test_octagon_no_looser_than_axis_rows():
    f = pmap("x - 0.1*x*y", "y + 0.1*x^2")
    Q0 = polytope_from_box(Box.cube(0, 1, 2), octagon_template(2))
    Qo, _, _ = reach_step(Q0, f, octagon_template(2))
    Qa, _, _ = reach_step(polytope_from_box(Box.cube(0, 1, 2)), f, axis_template(2))
    assert np.allclose(Qo.b[:4], Qa.b)


def test_slack_shrinks_with_epsilon():
    f = pmap("x^2 - y", "x*y")
    Q0 = polytope_from_box(Box.cube(-1, 1, 2))
    s = [reach_step(Q0, f, axis_template(2), ReachConfig(epsilon=e))[1].max() for e in (1e-2, 1e-3, 1e-4)]
    assert s[0] > s[1] > s[2]


MODEL = """# test system
vars x y
map 0.5*x
map 0.5*y + 0.1*x^2
template axis+octagon
init 0 1
init -1 1
steps 4
"""


def test_model_parse():
    m = parse_model_text(MODEL, "t")
    assert m.variables == ["x", "y"] and m.steps == 4 and m.template == "axis+octagon"
    assert m.template_matrix().shape == (8, 2)
    assert m.init == Box.from_intervals([(0, 1), (-1, 1)])


@pytest.mark.parametrize("text, line", [
    (MODEL.replace("map 0.5*x\n", "map 0.5*x +\n"), 3),
    (MODEL.replace("template axis+octagon", "template hexagon"), 5),
    (MODEL.replace("init 0 1", "init 1 0"), 6),
    (MODEL.replace("steps 4", "steps -2"), 8),
    (MODEL.replace("steps 4", "stepz 4"), 8),
    (MODEL.replace("map 0.5*x\n", "map 0.5*z\n"), 3),
])
def test_model_errors(text, line):
    with pytest.raises(ParseError) as info:
        parse_model_text(text)
    assert info.value.line == line


def test_model_missing_component():
    with pytest.raises(ParseError):
        parse_model_text(MODEL.replace("map 0.5*x\n", ""))


def test_csv_layout():
    m = parse_model_text(MODEL)
    qs, reports = reach(m.initial_polytope(), m.f, m.template_matrix(), 2)
    lines = reach_csv(qs, reports).splitlines()
    assert lines[0].split(",") == ["step"] + [f"b{i}" for i in range(8)] + ["max_slack", "volume"]
    assert len(lines) == 4
    assert [ln.split(",")[0] for ln in lines[1:]] == ["0", "1", "2"]
