import json
import subprocess
import sys

import pytest

from bernprune.bench import data_path, golden_verdicts
from bernprune.cli import main

UNSAT = "vars x y\nbox -1 1\nbox -1 1\nconstraint x^2 + y^2 + 0.5\n"
SAT = "vars x y\nbox -1 1\nbox -1 1\nconstraint x^2 + y^2 - 0.5\nconstraint x - y\n"
OPT = "vars x\nbox -2 2\nobjective x^3 - 3*x\nepsilon 1e-4\n"


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return _write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def schema(name):
    return json.loads(data_path("schemas", f"{name}.schema.json").read_text())


def test_unsat_exit_and_line(capsys, write):
    code, out, _ = run(capsys, "solve", "--problem", write("u.problem", UNSAT))
    assert code == 1 and out.strip() == "unsat"


def test_sat_exit_and_line(capsys, write):
    code, out, _ = run(capsys, "solve", "--problem", write("s.problem", SAT))
    assert code == 0
    assert out.startswith("sat x = (") and "residuals = (" in out


def test_unknown_exit(capsys, write):
    stub = write("stub.py", "print('unknown')\n")
    # a tangent constraint survives refinement, so the external endgame is consulted
    path = write("k.problem", "vars x\nbox 0 1\nconstraint (x - 0.3333333)^2 + 2e-9\nepsilon 0.5\n")
    code, out, _ = run(capsys, "solve", "--problem", path, "--endgame", f"smt:{sys.executable} {stub} {{file}}")
    assert code == 2 and out.startswith("unknown (")


def test_malformed_reports_line_and_column(capsys, write):
    path = write("bad.problem", "vars x\nbox -1 1\nconstraint x^2 + * 3\n")
    code, _, err = run(capsys, "solve", "--problem", path)
    assert code == 3
    assert f"{path}:3:" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "solve", "--problem", str(tmp_path / "nope.problem"))
    assert code == 3 and "nope.problem" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["solve"])
    assert info.value.code == 3
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 3


def test_bad_endgame(capsys, write):
    code, _, _ = run(capsys, "solve", "--problem", write("s.problem", SAT), "--endgame", "cad")
    assert code == 3


def test_bad_config_is_usage_error(capsys, write):
    code, _, _ = run(capsys, "solve", "--problem", write("s.problem", SAT), "--workers", "0")
    assert code == 3


def test_solve_json_validates(capsys, write):
    jsonschema = pytest.importorskip("jsonschema")
    for text, status in ((SAT, "sat"), (UNSAT, "unsat")):
        _, out, _ = run(capsys, "solve", "--problem", write("p.problem", text), "--json")
        doc = json.loads(out)
        assert doc["status"] == status
        jsonschema.validate(doc, schema("solve"))


def test_solve_is_deterministic(capsys, write):
    path = write("s.problem", SAT)
    outs = {run(capsys, "solve", "--problem", path, "--json", "--seed", "5", "--policy", "random")[1]
            for _ in range(2)}
    assert len(outs) == 1


def test_optimize_text_and_json(capsys, write):
    path = write("o.problem", OPT)
    code, out, _ = run(capsys, "optimize", "--problem", path)
    assert code == 0
    assert out.splitlines()[1].startswith("max 2.0")
    code, out, _ = run(capsys, "optimize", "--problem", path, "--json")
    doc = json.loads(out)
    assert doc["max"]["value"] == pytest.approx(2.0)
    jsonschema = pytest.importorskip("jsonschema")
    jsonschema.validate(doc, schema("optimize"))


def test_optimize_infeasible(capsys, write):
    code, out, _ = run(capsys, "optimize", "--problem", write("i.problem", OPT + "constraint x^2 + 1\n"))
    assert code == 1 and out.strip() == "infeasible"


def test_optimize_needs_objective(capsys, write):
    code, _, _ = run(capsys, "optimize", "--problem", write("n.problem", SAT))
    assert code == 3


def test_export_smt(capsys, write, tmp_path):
    out_path = tmp_path / "p.smt2"
    code, _, _ = run(capsys, "export-smt", "--problem", write("s.problem", SAT), "--out", str(out_path))
    text = out_path.read_text()
    assert code == 0
    assert "(declare-const x Real)" in text and "(check-sat)" in text


def test_reach_csv(capsys, write, tmp_path):
    model = "vars x y\nmap 0.5*x\nmap 0.5*y\ninit 0.9 1.1\ninit 0.9 1.1\nsteps 3\n"
    out_path = tmp_path / "r.csv"
    code, _, _ = run(capsys, "reach", "--model", write("m.model", model), "--out", str(out_path))
    lines = out_path.read_text().splitlines()
    assert code == 0 and len(lines) == 5
    assert lines[0].startswith("step,b0,b1,b2,b3")


def test_reach_bad_model(capsys, write):
    code, _, err = run(capsys, "reach", "--model", write("m.model", "vars x\nmap x +\ninit 0 1\nsteps 1\n"))
    assert code == 3 and ":2:" in err


def test_gen_data_twice_identical(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run(capsys, "gen-data", "--count", "100", "--seed", "7", "--out", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 101


def test_train_and_eval_guide(capsys, tmp_path):
    data, held, model = tmp_path / "d.csv", tmp_path / "h.csv", tmp_path / "m.json"
    run(capsys, "gen-data", "--count", "200", "--seed", "1", "--out", str(data))
    run(capsys, "gen-data", "--count", "100", "--seed", "2", "--out", str(held))
    code, out, _ = run(capsys, "train-guide", "--data", str(data), "--out", str(model), "--epochs", "5",
                       "--val-data", str(held))
    assert code == 0 and out.startswith("train accuracy ")
    first = model.read_bytes()
    run(capsys, "train-guide", "--data", str(data), "--out", str(model), "--epochs", "5", "--val-data", str(held))
    assert model.read_bytes() == first
    code, out, _ = run(capsys, "eval-guide", "--model", str(model), "--data", str(held))
    acc = float(out)
    assert code == 0 and 0.0 <= acc <= 1.0
    assert len(out.strip().split(".")[1]) == 4


def test_eval_guide_bad_model(capsys, tmp_path, write):
    data = tmp_path / "d.csv"
    run(capsys, "gen-data", "--count", "10", "--seed", "1", "--out", str(data))
    code, _, _ = run(capsys, "eval-guide", "--model", write("m.json", "{}"), "--data", str(data))
    assert code == 3


def test_solve_with_shipped_guide(capsys, write):
    guide = str(data_path("guide", "quadratic.json"))
    code, out, _ = run(capsys, "solve", "--problem", write("u.problem", UNSAT), "--guide", guide)
    assert code == 1


def test_bench_pvs(capsys, tmp_path):
    out_path = tmp_path / "pvs.csv"
    code, _, _ = run(capsys, "bench", "--suite", "pvs", "--out", str(out_path))
    lines = out_path.read_text().splitlines()
    assert code == 0
    assert lines[0] == "instance,verdict,expected,wall_time,iterations,pruned_volume"
    rows = [ln.split(",") for ln in lines[1:]]
    golden = golden_verdicts()
    assert [r[0] for r in rows] == golden["order"]
    assert all(r[1] == r[2] == golden["verdicts"][r[0]] for r in rows)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "bernprune", "solve"], capture_output=True, text=True)
    assert r.returncode == 3


def test_log_level_env(tmp_path):
    path = tmp_path / "s.problem"
    path.write_text(SAT)
    r = subprocess.run([sys.executable, "-m", "bernprune", "solve", "--problem", str(path)],
                       capture_output=True, text=True, env={"POLYAR_LOG": "ERROR", "PATH": ""})
    assert r.returncode == 0 and "round-robin" not in r.stderr
    r = subprocess.run([sys.executable, "-m", "bernprune", "solve", "--problem", str(path)],
                       capture_output=True, text=True, env={"PATH": ""})
    assert "round-robin" in r.stderr
