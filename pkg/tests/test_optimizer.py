import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from battery import BATTERY, load
from bernprune.optimizer import (Infeasible, OptimizerConfig, boundary_step, error_bound, grad_constraints,
                                 optimize, optimize_objective, sample_boundaries, sample_distance)
from bernprune.parser import parse_expr, parse_problem_text
from bernprune.poly import Box, Polynomial
from bernprune.solver import SolverConfig, Status, solve_constraints


def test_grad_constraints_of_square():
    p = parse_expr("x^2", ["x"])
    d, nd = grad_constraints(p)
    assert d == parse_expr("2*x", ["x"])
    assert nd == parse_expr("-2*x", ["x"])


def test_grad_constraints_count():
    p = parse_expr("x*y*z + x^3", ["x", "y", "z"])
    assert len(grad_constraints(p)) == 6


def test_affine_objective_has_no_critical_region():
    p = parse_expr("3*x - y + 2", ["x", "y"])
    out = solve_constraints(grad_constraints(p), Box.cube(-1, 1, 2), SolverConfig(epsilon=1e-4))
    assert out.status is Status.UNSAT


def test_critical_region_of_bowl_contains_origin():
    p = parse_expr("x^2 + y^2", ["x", "y"])
    res = optimize_objective(p, Box.cube(-1, 1, 2), cfg=OptimizerConfig(epsilon=1e-3))
    assert res.critical_regions >= 1
    assert res.p_min_hat <= res.error_bound


def test_boundary_of_unit_interval():
    pts = sample_boundaries(Box.from_intervals([(0, 1)]), 1e-3)
    assert sorted(pts[:, 0].tolist()) == [0.0, 1.0]


def test_boundary_lattice_half_step():
    eps = (0.5 / (2 * math.sqrt(2))) ** 2  # h = 0.5
    assert sample_distance(2, eps) == pytest.approx(0.5)
    pts = sample_boundaries(Box.cube(0, 1, 2), eps)
    assert len(pts) == 8
    assert {tuple(p) for p in pts} == {(0, 0), (0, 0.5), (0, 1), (0.5, 0), (0.5, 1), (1, 0), (1, 0.5), (1, 1)}


def test_boundary_rejects_bad_eps():
    with pytest.raises(ValueError):
        sample_boundaries(Box.cube(0, 1, 2), 0.0)
    with pytest.raises(ValueError):
        sample_boundaries(Box.cube(0, 1, 3), 1e-9, max_points=100)


@settings(max_examples=30)
@given(n=st.integers(1, 4), logeps=st.floats(-6, -1), w=st.floats(0.1, 5.0))
def test_boundary_points_lie_on_faces_with_bounded_spacing(n, logeps, w):
    box = Box.cube(-w / 2, w / 2, n)
    eps = 10 ** logeps
    try:
        pts = sample_boundaries(box, eps, max_points=200_000)
    except ValueError:
        return
    on_face = np.isclose(np.abs(pts), w / 2).any(axis=1)
    assert on_face.all()
    # every face point is within half a step (per free coordinate) of a sample
    rng = np.random.default_rng(0)
    h = boundary_step(n, eps)
    probe = rng.uniform(-w / 2, w / 2, size=(50, n))
    probe[np.arange(50), rng.integers(0, n, 50)] = w / 2
    d = np.min(np.linalg.norm(probe[:, None, :] - pts[None, :, :], axis=2), axis=1)
    assert (d <= 0.5 * h * math.sqrt(max(n - 1, 1)) + 1e-9).all()


def test_min_square_within_bound():
    p = parse_expr("x^2", ["x"])
    res = optimize_objective(p, Box.cube(-1, 1, 1), cfg=OptimizerConfig(epsilon=1e-4))
    # omega = 2, n = 1: 2 * 2 * 1 * 1e-4
    assert res.error_bound == pytest.approx(4e-4)
    assert abs(res.p_min_hat) <= res.error_bound


def test_max_cubic_is_two():
    p = parse_expr("x^3 - 3*x", ["x"])
    res = optimize_objective(p, Box.cube(-2, 2, 1), cfg=OptimizerConfig(epsilon=1e-4))
    assert res.p_max_hat == pytest.approx(2.0, abs=1e-9)
    assert res.p_min_hat == pytest.approx(-2.0, abs=1e-9)


def test_constrained_min_on_corner():
    prob = parse_problem_text("vars x1 x2\nbox 0 1\nbox 0 1\nconstraint -x1\nobjective x1 + x2\n")
    res = optimize(prob, OptimizerConfig(epsilon=1e-3))
    assert res.p_min_hat == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(res.x_min, [0, 0])


def test_extremizers_satisfy_constraints():
    prob = parse_problem_text("vars x y\nbox -1 1\nbox -1 1\nconstraint x^2 + y^2 - 0.5\n"
                              "objective x + y\n")
    res = optimize(prob, OptimizerConfig(epsilon=1e-3))
    for x in (res.x_min, res.x_max):
        assert prob.constraints[0].evaluate(x) <= 1e-9
    # true extrema are -1 and 1 on the disk's rim
    assert -1.0 - 1e-9 <= res.p_min_hat <= -1.0 + res.error_bound
    assert 1.0 - res.error_bound <= res.p_max_hat <= 1.0 + 1e-9


def test_infeasible_constraints():
    prob = parse_problem_text("vars x\nbox -1 1\nconstraint x^2 + 1\nobjective x\n")
    with pytest.raises(Infeasible):
        optimize(prob)


def test_missing_objective():
    prob = parse_problem_text("vars x\nbox -1 1\nconstraint x\n")
    with pytest.raises(ValueError):
        optimize(prob)


def test_error_bound_formula():
    assert error_bound(3.0, 4, 1e-4) == pytest.approx(2 * 3.0 * 2 * 0.1)


@pytest.mark.parametrize("entry", BATTERY[::3], ids=lambda e: e[0])
def test_battery_subset_within_bound(entry):
    name, p, box, pmin, pmax = load(entry)
    res = optimize_objective(p, box, cfg=OptimizerConfig(epsilon=1e-3))
    assert res.complete
    assert abs(res.p_min_hat - pmin) <= res.error_bound
    assert abs(res.p_max_hat - pmax) <= res.error_bound
    # reported values are attained at the reported points
    assert p.evaluate(res.x_min) == pytest.approx(res.p_min_hat)
    assert p.evaluate(res.x_max) == pytest.approx(res.p_max_hat)


def test_json_matches_schema():
    jsonschema = pytest.importorskip("jsonschema")
    import json
    from bernprune.bench import data_path
    schema = json.loads(data_path("schemas", "optimize.schema.json").read_text())
    p = parse_expr("x*y", ["x", "y"])
    res = optimize_objective(p, Box.cube(-1, 1, 2), cfg=OptimizerConfig(epsilon=1e-3))
    jsonschema.validate(json.loads(json.dumps(res.to_json_dict())), schema)


def test_relative_epsilon_scales_with_volume():
    p = Polynomial(1, {(2,): 1.0})
    res = optimize_objective(p, Box.cube(0, 4, 1), cfg=OptimizerConfig(epsilon=1e-3, epsilon_relative=True))
    assert res.epsilon == pytest.approx(4e-3)
