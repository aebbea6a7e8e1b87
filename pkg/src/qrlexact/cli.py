"""Command-line front end: ``qrlexact <subcommand> [options]``.

Exit codes: 0 success, 2 invalid arguments, 3 resource limit, 4 no crossover.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from typing import Any, Sequence

import numpy as np

from .bench import Method, fit_scaling, run_bench
from .combinatorics import PARAM_NAMES, enumerate_classes, multiplicity
from .errors import (
    MultiplicityOverflowError,
    NoCrossoverError,
    QRLError,
    ResourceLimitError,
)
from .models import ModelKind, ModelSpec, PolicyPoint
from .optimize import OptimConfig, find_crossover, make_evaluator, maximise
from .oracle import oracle_enumerate, oracle_sum
from .returns import analytic_return

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_NO_CROSSOVER = 0, 2, 3, 4


class UsageError(QRLError, ValueError):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _int_range(text: str) -> list[int]:
    """``"4:14"`` (inclusive) or ``"8,16,32"``."""
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected 'lo:hi' or a comma list of integers, got {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--model", default="QubitClosed",
                   help="QubitClosed | QubitAntiperiodic | QutritLadder | FourLevel")
    p.add_argument("--N", type=int, default=4, help="number of time steps")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--epsilon-prime", type=float, default=0.5)
    p.add_argument("--initial", default=None, help="initial state index or label")
    p.add_argument("--final", default=None, help="final state index or label")
    p.add_argument("--policy", default=None,
                   help="comma-separated coordinates; random (see --seed) when omitted")
    p.add_argument("--out", default=None, help="write output here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-timing", action="store_true",
                   help="report zero timings so output is reproducible")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="qrlexact",
                                     description="Exact expected returns of measured quantum walks.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("evaluate", parents=[common], help="closed-form expected return")

    p = sub.add_parser("oracle", parents=[common], help="brute-force expected return")
    p.add_argument("--list", action="store_true", help="dump every trajectory as CSV")
    p.add_argument("--prune", action="store_true", help="skip zero-probability prefixes")
    p.add_argument("--naive", action="store_true", help="plain running sum")
    p.add_argument("--cap", type=int, default=10**8)

    def optim_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--resolution", type=int, default=None)
        p.add_argument("--dim", type=int, default=None,
                       help="policy coordinates (qutrit: 1 common or 3)")
        p.add_argument("--method", choices=("analytic", "oracle"), default="analytic")
        p.add_argument("--d-sep", type=float, default=0.05)

    p = sub.add_parser("optimise", parents=[common], help="maximise J over the policy cube")
    optim_flags(p)

    p = sub.add_parser("sweep", parents=[common], help="maximise over a range of epsilon or N")
    optim_flags(p)
    p.add_argument("--param", choices=("epsilon", "epsilon_prime", "N"), default="epsilon")
    p.add_argument("--values", required=True, help="comma list, or lo:hi:count for a linspace")

    p = sub.add_parser("crossover", parents=[common], help="locate the argmax jump in epsilon")
    optim_flags(p)
    p.add_argument("--range", dest="eps_range", default="2.40,2.55")
    p.add_argument("--tol-eps", type=float, default=1e-4)

    sub.add_parser("count", parents=[common], help="list trajectory classes and multiplicities")

    p = sub.add_parser("bench", parents=[common], help="time the class sum against the oracle")
    p.add_argument("--analytic-n", default="8,12,16,24,32,48,64")
    p.add_argument("--oracle-n", default="4:14")
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--methods", default="analytic,oracle_blind,oracle_pruned")
    p.add_argument("--cap", type=int, default=10**8)
    return parser


def _spec(args: argparse.Namespace, **overrides: Any) -> ModelSpec:
    fields = dict(model_kind=args.model, N=args.N, epsilon=args.epsilon,
                  epsilon_prime=args.epsilon_prime, initial=args.initial, final=args.final)
    fields.update(overrides)
    return ModelSpec(**fields)


def _policy(args: argparse.Namespace, spec: ModelSpec) -> PolicyPoint:
    if args.policy is not None:
        return PolicyPoint(tuple(_floats(args.policy)))
    rng = np.random.default_rng(args.seed)
    return PolicyPoint(tuple(rng.random(spec.model_kind.policy_sizes[-1])))


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _elapsed(args: argparse.Namespace, t0: int) -> int:
    return 0 if args.no_timing else time.perf_counter_ns() - t0


def cmd_evaluate(args: argparse.Namespace) -> str:
    spec = _spec(args)
    p = _policy(args, spec)
    t0 = time.perf_counter_ns()
    rv = analytic_return(spec, p)
    out = {"j": rv.j, "evaluations": rv.evaluations, "wall_time_ns": _elapsed(args, t0),
           "model": spec.to_dict(), "policy": list(p.coords)}
    if args.format == "csv":
        return _csv_text(["j", "evaluations", "wall_time_ns"], [[rv.j, rv.evaluations, out["wall_time_ns"]]])
    return _json_text(out)


def cmd_oracle(args: argparse.Namespace) -> str:
    spec = _spec(args)
    p = _policy(args, spec)
    if args.list:
        rows = [["|".join(spec.model_kind.labels[s] for s in t.states), repr(t.probability), repr(t.reward)]
                for t in oracle_enumerate(spec, p, prune=args.prune, cap=args.cap)]
        return _csv_text(["states", "probability", "reward"], rows)
    t0 = time.perf_counter_ns()
    j, terms = oracle_sum(spec, p, prune=args.prune, naive=args.naive, cap=args.cap,
                          threads=args.threads)
    out = {"j": j, "sequences": terms, "wall_time_ns": _elapsed(args, t0),
           "model": spec.to_dict(), "policy": list(p.coords)}
    if args.format == "csv":
        return _csv_text(["j", "sequences", "wall_time_ns"], [[j, terms, out["wall_time_ns"]]])
    return _json_text(out)


def _config(args: argparse.Namespace, **extra: Any) -> OptimConfig:
    return OptimConfig(grid_resolution=args.resolution, d_sep=args.d_sep, **extra)


def _dim(args: argparse.Namespace, spec: ModelSpec) -> int:
    dim = args.dim or spec.model_kind.policy_sizes[-1]
    if dim not in spec.model_kind.policy_sizes:
        raise UsageError(f"{spec.model_kind.value} accepts --dim in {spec.model_kind.policy_sizes}")
    return dim


def cmd_optimise(args: argparse.Namespace) -> str:
    spec = _spec(args)
    ev = make_evaluator(spec, args.method, threads=args.threads)
    res = maximise(spec, ev, _config(args), dim=_dim(args, spec))
    return _json_text(res.to_dict())


def _sweep_values(text: str, as_int: bool) -> list[float]:
    parts = text.split(":")
    if len(parts) == 3:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        vals = list(np.linspace(lo, hi, n))
    else:
        vals = _floats(text)
    return [int(round(v)) for v in vals] if as_int else [float(v) for v in vals]


def cmd_sweep(args: argparse.Namespace) -> str:
    base = _spec(args)
    dim = _dim(args, base)
    rows = []
    for v in _sweep_values(args.values, args.param == "N"):
        spec = base.with_(**{args.param: v})
        res = maximise(spec, make_evaluator(spec, args.method, threads=args.threads),
                       _config(args), dim=dim)
        rows.append([v, *res.argmax.coords, res.j_max, res.plateau_fraction, res.degenerate])
    header = ["sweep_value", *(f"x{i}" for i in range(dim)), "j_max", "plateau_fraction", "degenerate"]
    if args.format == "json":
        return _json_text([dict(zip(header, r)) for r in rows])
    return _csv_text(header, rows)


def cmd_crossover(args: argparse.Namespace) -> str:
    spec = _spec(args)
    lo, hi = _floats(args.eps_range)
    res = find_crossover(spec, (lo, hi), _config(args, tol_eps=args.tol_eps),
                         evaluator_factory=lambda s: make_evaluator(s, args.method, threads=args.threads),
                         dim=_dim(args, spec))
    return _json_text(res.to_dict())


def cmd_count(args: argparse.Namespace) -> str:
    spec = _spec(args)
    kind = spec.model_kind
    if kind is ModelKind.FOUR_LEVEL:
        header = ["n0", "n1", "n1p", "n2", "c01", "c01p", "multiplicity"]
    else:
        header = [f"n_{lab}" for lab in kind.labels] + list(PARAM_NAMES[kind]) + ["multiplicity"]
    rows, total = [], 0
    for cls in enumerate_classes(spec):
        m = multiplicity(spec, cls)
        total += m
        if kind is ModelKind.FOUR_LEVEL:
            rows.append([*cls.occupations, cls.params[3], cls.params[4], m])
        else:
            rows.append([*cls.occupations, *cls.params, m])
    if args.format == "json":
        return _json_text({"classes": [dict(zip(header, r)) for r in rows],
                           "total_configurations": len(rows), "total_trajectories": total})
    text = _csv_text(header, rows)
    return text + _csv_text(["total_configurations", "total_trajectories"], [[len(rows), total]])


def cmd_bench(args: argparse.Namespace) -> str:
    kind = ModelKind.parse(args.model)
    methods = [Method(m.strip()) for m in args.methods.split(",") if m.strip()]
    policy = None
    records = []
    groups = [([Method.ANALYTIC], _int_range(args.analytic_n)),
              ([m for m in methods if m is not Method.ANALYTIC], _int_range(args.oracle_n))]
    for group, ns in groups:
        group = [m for m in group if m in methods]
        if not group:
            continue
        specs = [_spec(args, N=n, model_kind=kind) for n in ns]
        if policy is None:
            policy = _policy(args, specs[0])
        records += run_bench(specs, policy, args.repetitions, group, cap=args.cap,
                             timing=not args.no_timing)
    header = ["model_kind", "N", "method", "wall_time_ns", "term_count", "j_value", "skipped"]
    rows = [[r.to_row()[h] for h in header] for r in records]
    if args.format == "json":
        out: dict[str, Any] = {"records": [dict(zip(header, r)) for r in rows]}
        if not args.no_timing:
            try:
                base, exponent = fit_scaling(records)
                out["fit"] = {"exponential_base": base, "powerlaw_exponent": exponent}
            except ValueError as exc:
                out["fit"] = {"error": str(exc)}
        return _json_text(out)
    return _csv_text(header, rows)


COMMANDS = {
    "evaluate": cmd_evaluate,
    "oracle": cmd_oracle,
    "optimise": cmd_optimise,
    "sweep": cmd_sweep,
    "crossover": cmd_crossover,
    "count": cmd_count,
    "bench": cmd_bench,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _emit(args, COMMANDS[args.command](args))
    except (ResourceLimitError, MultiplicityOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NoCrossoverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CROSSOVER
    except (QRLError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
