import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bernprune.abstraction import Action
from bernprune.oracle import VerdictKind, adjudicate, random_problem
from bernprune.parser import parse_problem_text
from bernprune.poly import Box, Polynomial
from bernprune.solver import (BranchPrune, ExternalSMT, FixedPolicy, RandomPolicy, Region, RegionQueue,
                              SolverConfig, SolverState, Status, endgame_branch_prune, parse_smt_model,
                              partition_orthants, pop_region, select_poly, solve, solve_constraints,
                              verify_certificate)

X = Polynomial.variable(0, 1)
UNIT = Box((0.0,), (1.0,))


def test_partition_orthants():
    assert len(partition_orthants(Box.cube(-1, 1, 2))) == 4
    b = Box((0.0, 2.0), (1.0, 3.0))
    assert partition_orthants(b) == [b]
    assert len(partition_orthants(Box((-1.0, 0.0, -2.0), (1.0, 1.0, 0.0)))) == 2


@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(0.01, 3)), min_size=1, max_size=4))
def test_partition_orthants_covers(ivs):
    box = Box.from_intervals([(a, a + w) for a, w in ivs])
    pieces = partition_orthants(box)
    assert all(p.is_orthant_pure() for p in pieces)
    assert sum(p.volume() for p in pieces) == pytest.approx(box.volume(), rel=1e-12)


def test_select_poly_and_pop():
    assert select_poly([0], (0.0,)) == 0
    assert select_poly([0, 1, 2], (0.0, 0.0, 0.0)) == 0
    assert select_poly([0, 1, 2], (0.5, 0.1, 0.3)) == 1
    q = RegionQueue()
    for w in (1.0, 4.0, 2.0):
        q.push(Region(Box((0.0,), (w,))))
    assert pop_region(q).box.volume() == 4.0


def test_first_step_discards_positive():
    out = solve_constraints([X ** 2 + 1], UNIT)
    assert out.status is Status.UNSAT
    assert len(out.certificate) == 1 and out.certificate[0].box == UNIT


def test_negative_constraint_sat_at_center():
    out = solve_constraints([-(X ** 2) - 1], UNIT)
    assert out.status is Status.SAT
    assert out.witness[0] == 0.5 and out.residuals[0] == pytest.approx(-1.25)


def test_touching_pair():
    out = solve_constraints([X - 0.5, 0.5 - X], UNIT)
    assert out.status is Status.SAT and out.witness[0] == pytest.approx(0.5)


def test_endgame_examples():
    out = endgame_branch_prune([Region(UNIT)], [X - 2], UNIT)
    assert out.status is Status.SAT and out.stats["endgame_nodes"] == 1
    tiny = Box((-1e-2,), (1e-2,))
    out = solve_constraints([X ** 2 + 1e-6], tiny)
    assert out.status is Status.UNSAT and verify_certificate(out, [X ** 2 + 1e-6], tiny)
    out = solve_constraints([X ** 2], Box((-1.0,), (1.0,)))
    assert out.status is Status.SAT and out.witness[0] == 0.0


def test_solve_problem_examples():
    pf = parse_problem_text("vars x1 x2\nbox -1 1\nbox -1 1\nconstraint x1^2 + x2^2 + 1\n")
    assert solve(pf).status is Status.UNSAT
    pf = parse_problem_text("vars x1\nbox 0 1\nconstraint x1 - 10\n")
    out = solve(pf)
    assert out.status is Status.SAT and out.residuals[0] <= -9


def test_unknown_when_budget_runs_out():
    p = (X - 1 / 3) ** 2 + 2e-9
    out = solve_constraints([p], UNIT, SolverConfig(endgame=BranchPrune(node_budget=1)))
    assert out.status is Status.UNKNOWN
    assert out.remaining_volume > 0 and out.reason == "node budget exhausted"
    full = solve_constraints([p], UNIT)
    assert full.status is Status.UNSAT and verify_certificate(full, [p], UNIT)


def test_unknown_at_resolution_limit():
    # with no slack a tangency at a non-dyadic point is never hit nor excluded
    out = solve_constraints([(X - 1 / 3) ** 2], UNIT, SolverConfig(tau=0.0))
    assert out.status is Status.UNKNOWN and out.reason == "resolution limit reached"


def test_budget_between_regions_never_claims_unsat():
    regions = [Region(Box((0.0,), (0.5,))), Region(Box((0.5,), (1.0,)))]
    out = endgame_branch_prune(regions, [X + 1], UNIT, BranchPrune(node_budget=1))
    assert out.status is Status.UNKNOWN
    assert out.remaining_volume == pytest.approx(0.5)
    out = endgame_branch_prune(regions, [X + 1], UNIT, BranchPrune(node_budget=2))
    assert out.status is Status.UNSAT


def test_step_conservation_and_monotone_queue(rng):
    for _ in range(20):
        cons, box = random_problem(rng)
        state = SolverState(cons, box, SolverConfig(), RandomPolicy(int(rng.integers(1000))))
        max_vol = state.queue.peek_volume()
        total = state.queue.total_volume()
        for _ in range(15):
            if not len(state.queue):
                break
            rec = state.step()
            parts = rec.discarded_volume + rec.negative_volume + rec.refiled_volume
            if rec.witness is None or rec.action is not None:
                assert parts == pytest.approx(rec.popped_volume, rel=1e-9)
            assert state.queue.peek_volume() <= max_vol * (1 + 1e-12)
            assert state.queue.total_volume() <= total * (1 + 1e-12)
            max_vol, total = state.queue.peek_volume(), state.queue.total_volume()


def check_outcome(out, cons, box, tau=1e-9):
    if out.status is Status.SAT:
        assert box.contains(out.witness, 1e-12)
        assert np.all(np.array([c.evaluate(out.witness) for c in cons]) <= tau)
    elif out.status is Status.UNSAT:
        assert verify_certificate(out, cons, box)


def test_agreement_with_oracle_and_random_policy():
    rng = np.random.default_rng(7)
    for k in range(60):
        cons, box = random_problem(rng)
        ref = adjudicate(cons, box)
        for cfg, pol in ((SolverConfig(), None), (SolverConfig(policy="random", seed=k), None),
                         (SolverConfig(), FixedPolicy(Action.SPLIT))):
            out = solve_constraints(cons, box, cfg, policy=pol)
            check_outcome(out, cons, box)
            if ref.kind is VerdictKind.SAT_POINT:
                assert out.status is Status.SAT
            elif ref.kind is VerdictKind.PROVEN_UNSAT:
                assert out.status is Status.UNSAT


def test_workers_give_same_verdicts():
    rng = np.random.default_rng(11)
    for _ in range(6):
        cons, box = random_problem(rng)
        a = solve_constraints(cons, box, SolverConfig(epsilon=0.05))
        b = solve_constraints(cons, box, SolverConfig(epsilon=0.05, workers=2))
        assert a.status == b.status
        check_outcome(b, cons, box)


def test_json_validates_against_schema():
    import json

    import jsonschema
    from bernprune.bench import data_path
    schema = json.loads(data_path("schemas", "solve.schema.json").read_text())
    for cons, box in (([X ** 2 + 1], UNIT), ([X - 0.2], UNIT),
                      ([(X - 1 / 3) ** 2], UNIT)):
        cfg = SolverConfig(endgame=BranchPrune(node_budget=50))
        jsonschema.validate(json.loads(solve_constraints(cons, box, cfg).to_json()), schema)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(epsilon=0)
    with pytest.raises(ValueError):
        BranchPrune(resolution=0)
    with pytest.raises(ValueError):
        SolverConfig(workers=0)


def test_parse_smt_model():
    text = "sat\n(\n  (define-fun x () Real\n    (/ 1.0 3.0))\n  (define-fun y () Real\n    (- 2.5))\n)\n"
    assert np.allclose(parse_smt_model(text, ["x", "y"]), [1 / 3, -2.5])
    assert parse_smt_model("sat\n", ["x"]) is None


def stub_solver(tmp_path, reply):
    script = tmp_path / "stub.py"
    script.write_text(f"import sys\nprint({reply!r})\n")
    return f"{sys.executable} {script}"


def test_external_endgame_unsat_and_sat(tmp_path):
    pf = parse_problem_text("vars x\nbox 0 1\nconstraint x^2 + 1\n")
    cfg = SolverConfig(epsilon=2.0, endgame=ExternalSMT(stub_solver(tmp_path, "unsat")))
    out = solve(pf, cfg)
    assert out.status is Status.UNSAT and {c.kind for c in out.certificate} == {"external"}
    pf = parse_problem_text("vars x\nbox 0 1\nconstraint x - 0.5\nconstraint 0.5 - x\n")
    reply = "sat\n((define-fun x () Real 0.5))"
    out = solve(pf, SolverConfig(epsilon=2.0, endgame=ExternalSMT(stub_solver(tmp_path, reply))))
    assert out.status is Status.SAT and out.witness[0] == 0.5
    # a model that fails re-evaluation is not trusted
    reply = "sat\n((define-fun x () Real 0.9))"
    out = solve(pf, SolverConfig(epsilon=2.0, endgame=ExternalSMT(stub_solver(tmp_path, reply))))
    assert out.status is Status.UNKNOWN
