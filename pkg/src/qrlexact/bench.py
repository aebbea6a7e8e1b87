"""Timing comparison between the class sum and brute-force enumeration."""

from __future__ import annotations

import statistics
import time
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from .models import ModelSpec, PolicyPoint
from .oracle import DEFAULT_CAP, oracle_sum, sequence_count
from .returns import analytic_return


class Method(str, Enum):
    ANALYTIC = "analytic"
    ORACLE_BLIND = "oracle_blind"
    ORACLE_PRUNED = "oracle_pruned"


@dataclass(frozen=True)
class BenchRecord:
    model_kind: str
    N: int
    method: Method
    wall_time_ns: int
    term_count: int
    j_value: float
    skipped: bool = False

    def to_row(self) -> dict:
        row = asdict(self)
        row["method"] = self.method.value
        return row


def _runner(spec: ModelSpec, policy: PolicyPoint, method: Method) -> Callable[[], tuple[float, int]]:
    if method is Method.ANALYTIC:
        def run() -> tuple[float, int]:
            # a cold call: enumeration and multiplicities are part of the cost
            rv = analytic_return(spec, policy, cached=False)
            return rv.j, rv.evaluations
        return run
    prune = method is Method.ORACLE_PRUNED
    return lambda: oracle_sum(spec, policy, prune=prune, threads=1)


def time_call(fn: Callable[[], tuple[float, int]], repetitions: int) -> tuple[int, float, int]:
    """One warm-up, then the median of ``repetitions`` monotonic timings."""
    fn()
    times = []
    for _ in range(repetitions):
        t0 = time.perf_counter_ns()
        j, terms = fn()
        times.append(time.perf_counter_ns() - t0)
    return int(statistics.median(times)), j, terms


def run_bench(spec_range: Iterable[ModelSpec], policy: PolicyPoint | Sequence[float],
              repetitions: int = 5, methods: Sequence[Method | str] = tuple(Method),
              cap: int = DEFAULT_CAP, timing: bool = True) -> list[BenchRecord]:
    """Benchmark every method on every spec, single-threaded.

    Oracle cells beyond ``cap`` sequences are emitted with ``skipped=True``.
    With ``timing=False`` each cell runs once and reports zero time, which
    makes the output reproducible byte for byte.
    """
    methods = [Method(m) for m in methods]
    policy = policy if isinstance(policy, PolicyPoint) else PolicyPoint(tuple(policy))
    out = []
    for spec in spec_range:
        for method in methods:
            kind = spec.model_kind.value
            if method is not Method.ANALYTIC and sequence_count(spec) > cap:
                out.append(BenchRecord(kind, spec.N, method, 0, sequence_count(spec),
                                       float("nan"), skipped=True))
                continue
            fn = _runner(spec, policy, method)
            if timing:
                ns, j, terms = time_call(fn, repetitions)
            else:
                (j, terms), ns = fn(), 0
            out.append(BenchRecord(kind, spec.N, method, ns, terms, float(j)))
    return out


def fit_exponential(ns: Sequence[float], times: Sequence[float]) -> float:
    """Base ``b`` of the least-squares fit ``log t = a + N log b``."""
    slope = np.polyfit(np.asarray(ns, float), np.log(np.asarray(times, float)), 1)[0]
    return float(np.exp(slope))


def fit_powerlaw(ns: Sequence[float], times: Sequence[float]) -> float:
    """Exponent ``k`` of the least-squares fit ``log t = a + k log N``."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(times, float)), 1)[0])


def fit_scaling(records: Iterable[BenchRecord]) -> tuple[float, float]:
    """``(exponential base of the oracle, power-law exponent of the class sum)``.

    The blind oracle is preferred; pruned timings are used only when no
    blind rows exist.  Each side needs at least four timed rows.
    """
    rows = [r for r in records if not r.skipped]
    oracle = [r for r in rows if r.method is Method.ORACLE_BLIND] or \
        [r for r in rows if r.method is Method.ORACLE_PRUNED]
    analytic = [r for r in rows if r.method is Method.ANALYTIC]
    if len(oracle) < 4 or len(analytic) < 4:
        raise ValueError(
            f"need at least 4 records per method, got {len(oracle)} oracle and {len(analytic)} analytic"
        )
    base = fit_exponential([r.N for r in oracle], [r.wall_time_ns for r in oracle])
    exponent = fit_powerlaw([r.N for r in analytic], [r.wall_time_ns for r in analytic])
    return base, exponent


def agreement_failures(records: Iterable[BenchRecord], rel: float = 1e-10) -> list[tuple[int, str]]:
    """Cells where a method's value departs from another method's on the same ``N``."""
    by_n: dict[tuple[str, int], list[BenchRecord]] = {}
    for r in records:
        if not r.skipped:
            by_n.setdefault((r.model_kind, r.N), []).append(r)
    bad = []
    for (_, n), group in sorted(by_n.items()):
        ref = group[0].j_value
        for r in group[1:]:
            if abs(r.j_value - ref) > rel * max(1.0, abs(ref)):
                bad.append((n, r.method.value))
    return bad
