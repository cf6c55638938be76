"""Command-line front end: ``bernprune <subcommand> ...``.

Exit codes: 0 sat / success, 1 unsat, 2 unknown or inconclusive, 3 usage or
parse error, 4 internal error.  ``POLYAR_LOG`` sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

EXIT_SAT = 0
EXIT_UNSAT = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 3
EXIT_INTERNAL = 4

log = logging.getLogger("bernprune")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt_vec(v) -> str:
    return "(" + ", ".join(repr(float(x)) for x in v) + ")"


def _read_problem(path):
    from .parser import ParseError, parse_problem_text
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return parse_problem_text(text)
    except ParseError as exc:
        raise UsageError(f"{path}:{exc}") from exc


def _write(out, text: str):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# -- subcommands ------------------------------------------------------------

def cmd_solve(args) -> int:
    from .solver import BranchPrune, ExternalSMT, SolverConfig, Status, solve
    problem = _read_problem(args.problem)
    if args.endgame == "bernstein":
        endgame = BranchPrune()
    elif args.endgame.startswith("smt:") and args.endgame[4:].strip():
        endgame = ExternalSMT(args.endgame[4:].strip(), timeout=args.smt_timeout)
    else:
        raise UsageError("--endgame must be 'bernstein' or 'smt:<command>'")
    policy = args.policy or ("guide" if args.guide else "auto")
    cfg = SolverConfig(epsilon=problem.epsilon if args.eps is None else args.eps, endgame=endgame,
                       guide=args.guide, policy=policy, seed=args.seed, workers=args.workers)
    out = solve(problem, cfg)
    if args.json:
        sys.stdout.write(out.to_json() + "\n")
    elif out.status is Status.SAT:
        print(f"sat x = {_fmt_vec(out.witness)} residuals = {_fmt_vec(out.residuals)}")
    elif out.status is Status.UNSAT:
        print("unsat")
    else:
        print(f"unknown ({out.reason})")
    return {Status.SAT: EXIT_SAT, Status.UNSAT: EXIT_UNSAT, Status.UNKNOWN: EXIT_UNKNOWN}[out.status]


def cmd_optimize(args) -> int:
    from .optimizer import Infeasible, OptimizerConfig, optimize
    problem = _read_problem(args.problem)
    if problem.objective is None:
        raise UsageError(f"{args.problem}: no objective line")
    cfg = OptimizerConfig(epsilon=args.eps, policy=args.policy, seed=args.seed)
    try:
        res = optimize(problem, cfg)
    except Infeasible:
        print("infeasible")
        return EXIT_UNSAT
    if args.json:
        sys.stdout.write(json.dumps(res.to_json_dict(), sort_keys=True) + "\n")
    else:
        print(f"min {res.p_min_hat!r} at {_fmt_vec(res.x_min)}")
        print(f"max {res.p_max_hat!r} at {_fmt_vec(res.x_max)}")
        print(f"error bound {res.error_bound!r}")
    return EXIT_SAT if res.complete else EXIT_UNKNOWN


def cmd_reach(args) -> int:
    from .parser import ParseError
    from .reach import ReachConfig, parse_model_text, reach_csv, run_model
    try:
        text = Path(args.model).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{args.model}: {exc.strerror or exc}") from exc
    try:
        model = parse_model_text(text, Path(args.model).stem)
    except ParseError as exc:
        raise UsageError(f"{args.model}:{exc}") from exc
    cfg = ReachConfig() if args.eps is None else ReachConfig(epsilon=args.eps)
    if args.eps is not None:
        model.epsilon = None
    qs, reports = run_model(model, cfg, args.steps)
    _write(args.out, reach_csv(qs, reports))
    return EXIT_SAT


def cmd_gen_data(args) -> int:
    from .guide import generate_dataset, write_dataset_csv
    if args.count <= 0:
        raise UsageError("--count must be positive")
    samples = generate_dataset(args.count, seed=args.seed, template=args.template,
                               domain=(args.domain[0], args.domain[1]), per_poly=args.per_poly, depth=args.depth)
    write_dataset_csv(samples, args.out)
    return EXIT_SAT


def _load_dataset(path):
    from .guide import read_dataset_csv
    try:
        return read_dataset_csv(path)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_train_guide(args) -> int:
    from .guide import TrainConfig, save_model, train
    x, y = _load_dataset(args.data)
    xv = yv = None
    if args.val_data:
        xv, yv = _load_dataset(args.val_data)
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch_size, learning_rate=args.lr,
                      dropout_p=args.dropout, seed=args.seed)
    if len(x) < cfg.batch_size:
        raise UsageError(f"{args.data}: {len(x)} samples is fewer than one batch of {cfg.batch_size}")
    model = train(x, y, cfg, xv, yv,
                  on_epoch=lambda e, loss: log.info("epoch %d loss %.6f", e + 1, loss))
    save_model(model, args.out)
    msg = f"train accuracy {model.train_accuracy:.4f}"
    if model.val_accuracy is not None:
        msg += f" validation accuracy {model.val_accuracy:.4f}"
    print(msg)
    return EXIT_SAT


def cmd_eval_guide(args) -> int:
    from .guide import ModelFormatError, accuracy_of, load_model
    try:
        model = load_model(args.model)
    except OSError as exc:
        raise UsageError(f"{args.model}: {exc.strerror or exc}") from exc
    except ModelFormatError as exc:
        raise UsageError(f"{args.model}: {exc}") from exc
    x, y = _load_dataset(args.data)
    if not len(x):
        raise UsageError(f"{args.data}: no samples")
    print(f"{accuracy_of(model, x, y):.4f}")
    return EXIT_SAT


def cmd_export_smt(args) -> int:
    from .parser import export_smtlib2
    _write(args.out, export_smtlib2(_read_problem(args.problem)))
    return EXIT_SAT


def cmd_bench(args) -> int:
    from .bench import SUITES, rows_to_csv, run_suite
    from .solver import SolverConfig
    if args.suite == "random":
        instances = SUITES["random"](count=args.count, seed=args.seed)
    else:
        instances = SUITES[args.suite]()

    def cfg_for(inst):
        return SolverConfig(epsilon=inst.problem.epsilon, guide=args.guide,
                            policy="guide" if args.guide else "round-robin", seed=args.seed, workers=args.workers)

    rows = list(run_suite(instances, cfg_for))
    _write(args.out, rows_to_csv(rows))
    bad = [r["instance"] for r in rows if r["expected"] and r["verdict"] != r["expected"]]
    if bad:
        log.error("verdict mismatch on %s", ", ".join(bad))
        return EXIT_UNKNOWN
    return EXIT_SAT


# -- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bernprune", description="Polynomial constraint solving with Bernstein pruning.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="decide a problem file")
    s.add_argument("--problem", required=True)
    s.add_argument("--eps", type=float, help="volume threshold relative to the box (default: the file's epsilon)")
    s.add_argument("--guide", help="trained guide model (JSON)")
    s.add_argument("--policy", choices=["round-robin", "random", "guide"])
    s.add_argument("--endgame", default="bernstein", help="bernstein or smt:<command>")
    s.add_argument("--smt-timeout", type=float, default=60.0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("optimize", help="bound the objective of a problem file")
    o.add_argument("--problem", required=True)
    o.add_argument("--eps", type=float, help="absolute critical-region volume (default: the file's epsilon)")
    o.add_argument("--policy", default="round-robin", choices=["round-robin", "random"])
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--json", action="store_true")
    o.set_defaults(func=cmd_optimize)

    r = sub.add_parser("reach", help="template reachability for a model file")
    r.add_argument("--model", required=True)
    r.add_argument("--out", help="CSV path (default stdout)")
    r.add_argument("--steps", type=int)
    r.add_argument("--eps", type=float)
    r.set_defaults(func=cmd_reach)

    g = sub.add_parser("gen-data", help="generate labelled guide samples")
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--template", default="quadratic", choices=["quadratic", "quartic"])
    g.add_argument("--domain", type=float, nargs=2, default=[-2.0, 2.0], metavar=("LO", "HI"))
    g.add_argument("--per-poly", type=int, default=6)
    g.add_argument("--depth", type=int, default=4)
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train-guide", help="train the guide network")
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--val-data")
    t.add_argument("--epochs", type=int, default=100)
    t.add_argument("--batch-size", type=int, default=64)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--dropout", type=float, default=0.5)
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(func=cmd_train_guide)

    e = sub.add_parser("eval-guide", help="accuracy of a guide model on a dataset")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.set_defaults(func=cmd_eval_guide)

    x = sub.add_parser("export-smt", help="write SMT-LIB2 for a problem file")
    x.add_argument("--problem", required=True)
    x.add_argument("--out")
    x.set_defaults(func=cmd_export_smt)

    b = sub.add_parser("bench", help="run a benchmark suite and print CSV")
    b.add_argument("--suite", required=True, choices=["pvs", "random", "scaling"])
    b.add_argument("--out")
    b.add_argument("--count", type=int, default=50, help="instances in the random suite")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--guide")
    b.add_argument("--workers", type=int, default=1)
    b.set_defaults(func=cmd_bench)
    return p


def configure_logging():
    level = os.environ.get("POLYAR_LOG", "WARNING").upper()
    if not isinstance(logging.getLevelName(level), int):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # configuration checks in the library raise ValueError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
