"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the status lines are written
straight to the terminal.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from qrlexact import (
    ModelKind,
    ModelSpec,
    NoCrossoverError,
    analytic_return,
    enumerate_classes,
    flow_violations,
    j_qutrit_common,
    j_qutrit_three,
    multiplicity,
    oracle_return,
)
from qrlexact.bench import Method, agreement_failures, fit_scaling, run_bench
from qrlexact.combinatorics import fourlevel_table
from qrlexact.optimize import find_crossover, maximise

SEED = 424242

# rows (n0, n1, n1p, n2, c01, c01p, multiplicity) of the reference N=5 listing
REFERENCE_N5 = [
    (1, 0, 4, 1, 0, 1, 2), (1, 1, 3, 1, 1, 0, 2), (1, 4, 0, 1, 1, 0, 2),
    (1, 0, 3, 2, 0, 1, 2), (1, 1, 2, 2, 1, 0, 2), (1, 3, 0, 2, 1, 0, 2),
    (1, 0, 2, 3, 0, 1, 2), (1, 1, 1, 3, 1, 0, 2), (1, 2, 0, 3, 1, 0, 2),
    (1, 0, 1, 4, 0, 1, 1), (1, 1, 0, 4, 1, 0, 1),
    (2, 0, 3, 1, 0, 1, 4), (2, 1, 2, 1, 1, 0, 2), (2, 3, 0, 1, 1, 0, 4),
    (2, 0, 2, 2, 0, 1, 4), (2, 1, 1, 2, 1, 0, 2), (2, 2, 0, 2, 1, 0, 4),
    (2, 0, 1, 3, 0, 1, 3), (2, 1, 0, 3, 1, 0, 3),
    (3, 0, 2, 1, 0, 1, 5), (3, 1, 1, 1, 1, 0, 2), (3, 2, 0, 1, 1, 0, 5),
    (3, 0, 1, 2, 0, 1, 5), (3, 1, 0, 2, 1, 0, 5),
    (4, 0, 1, 1, 0, 1, 5), (4, 1, 0, 1, 1, 0, 5),
]


@pytest.fixture
def report(capsys):
    def emit(name: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, detail
    return emit


def test_oracle_equivalence(report):
    rng = np.random.default_rng(SEED)
    cells = {
        ModelKind.QUBIT_CLOSED: range(1, 13),
        ModelKind.QUBIT_ANTIPERIODIC: range(1, 13),
        ModelKind.QUTRIT_LADDER: range(2, 10),
        ModelKind.FOUR_LEVEL: range(2, 8),
    }
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    for kind, ns in cells.items():
        k = kind.policy_sizes[-1]
        for N in ns:
            for _ in range(50):
                spec = ModelSpec(kind, N, epsilon=rng.uniform(-1, 2), epsilon_prime=rng.uniform(-1, 2))
                p = tuple(rng.random(k))
                o = oracle_return(spec, p)
                a = analytic_return(spec, p).j
                worst = max(worst, abs(a - o) / max(1.0, abs(o)))
                count += 1
    elapsed = time.perf_counter() - t0
    report("oracle equivalence", worst <= 1e-10 and elapsed < 120,
           f"{count} points, worst scaled error {worst:.2e}, {elapsed:.1f}s")


def test_fourlevel_n5_listing(report):
    t0 = time.perf_counter()
    rows = fourlevel_table(5)
    elapsed = time.perf_counter() - t0
    got = {r[:6]: r[6] for r in rows}
    mismatched = [r for r in REFERENCE_N5 if got.get(r[:6]) != r[6]]
    total = sum(r[6] for r in rows)
    ok = len(rows) == 26 and total == 78 and not mismatched and elapsed < 1
    report("four-level N=5 class listing", ok,
           f"{len(rows)} classes (expected 26), {total} trajectories (expected 78), "
           f"{len(mismatched)} of {len(REFERENCE_N5)} reference rows differ, {elapsed:.2f}s")


def test_epsilon_cancellation(report):
    rng = np.random.default_rng(SEED + 1)
    worst_pair, worst_analytic = 0.0, 0.0
    for N in range(3, 9):
        for _ in range(20):
            x = float(rng.random())
            vals = [oracle_return(ModelSpec("QutritLadder", N, epsilon=e), (x,)) for e in (0.1, 0.5, 0.9)]
            worst_pair = max(worst_pair, max(vals) - min(vals))
            ref = j_qutrit_common(N, x).j
            worst_analytic = max(worst_analytic, max(abs(v - ref) for v in vals))
    report("epsilon cancellation", worst_pair <= 1e-10 and worst_analytic <= 1e-10,
           f"max pairwise gap {worst_pair:.2e}, max gap to analytic {worst_analytic:.2e}")


def test_swap_symmetry(report):
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    for _ in range(100):
        N = int(rng.integers(3, 9))
        eps = float(rng.uniform(-1, 2))
        x, y, z = rng.random(3)
        worst = max(worst, abs(j_qutrit_three(N, eps, x, y, z).j - j_qutrit_three(N, 1 - eps, y, x, z).j))
    report("swap symmetry", worst <= 1e-12, f"max |J_eps(x,y,z) - J_(1-eps)(y,x,z)| = {worst:.2e}")


def test_antiperiodic_saturation(report):
    found = {N: maximise(ModelSpec("QubitAntiperiodic", N)).argmax for N in range(2, 9)}
    bad = {N: p[0] for N, p in found.items() if abs(p[0] - 1.0) > 1e-6}
    detail = ", ".join(f"N={N}: ({p[0]:.6f}, {p[1]:.6f})" for N, p in found.items())
    report("anti-periodic x+ saturation", not bad, detail)


def test_closed_chain_zeno_trend(report):
    pts = [maximise(ModelSpec("QubitClosed", N)).argmax for N in (4, 8, 16, 32)]
    xp = [p[0] for p in pts]
    xm = [p[1] for p in pts]
    decreasing = all(a > b for a, b in zip(xp, xp[1:])) and all(a > b for a, b in zip(xm, xm[1:]))
    iso_err = 0.0
    for N in (4, 8, 16, 32):
        f = lambda q, N=N: N * q[:, 0] * (1 - q[:, 0]) ** N
        iso_err = max(iso_err, abs(maximise(None, f, dim=1).argmax[0] - 1 / (N + 1)))
    report("closed-chain maximiser trend", decreasing and iso_err <= 1e-8,
           f"x+ {[round(v, 4) for v in xp]}, x- {[round(v, 4) for v in xm]}, "
           f"isolated-term error {iso_err:.1e}")


def test_fourlevel_degeneracy(report):
    spec = ModelSpec("FourLevel", 8, epsilon=2.4, epsilon_prime=1.0)
    t0 = time.perf_counter()
    try:
        res = find_crossover(spec, (2.40, 2.55))
    except NoCrossoverError as exc:
        best = [maximise(spec.with_(epsilon=e)) for e in (2.40, 2.475, 2.55)]
        report("four-level crossover in (2.47, 2.48)", False,
               f"no crossover: {exc}; max J over the range "
               f"{max(b.j_max for b in best):.4f} (expected 0.644)")
        return
    elapsed = time.perf_counter() - t0
    sep = res.argmax_low.distance(res.argmax_high)
    ok = 2.47 < res.epsilon_star < 2.48 and sep > 0.2 and abs(res.j_at_star - 0.644) <= 0.01 and elapsed < 600
    report("four-level crossover in (2.47, 2.48)", ok,
           f"eps*={res.epsilon_star:.5f}, separation {sep:.3f}, J={res.j_at_star:.4f}, {elapsed:.0f}s")


def test_plateau_growth(report):
    fractions = {}
    for N in (4, 8):
        res = maximise(ModelSpec("FourLevel", N))
        fractions[N] = res.plateau_fraction
    report("plateau growth", fractions[8] > fractions[4],
           f"plateau fraction N=4 {fractions[4]:.6f}, N=8 {fractions[8]:.6f}")


def test_complexity_scaling(report):
    policy = (0.3, 0.6, 0.2)
    analytic = run_bench([ModelSpec("QutritLadder", N) for N in (8, 12, 16, 24, 32, 48, 64)], policy,
                         methods=[Method.ANALYTIC])
    oracle = run_bench([ModelSpec("QutritLadder", N) for N in range(4, 15)], policy,
                       methods=[Method.ANALYTIC, Method.ORACLE_BLIND])
    base, exponent = fit_scaling(analytic + [r for r in oracle if r.method is not Method.ANALYTIC])
    mismatches = agreement_failures(oracle)
    ok = 2.5 <= base <= 3.5 and exponent <= 3.5 and not mismatches
    report("complexity scaling", ok,
           f"oracle base {base:.3f}, analytic exponent {exponent:.3f}, value mismatches {mismatches}")


def test_flow_invariants(report):
    checked, failures = 0, []
    for kind in ModelKind:
        for N in range(kind.min_horizon, 11):
            spec = ModelSpec(kind, N)
            for cls in enumerate_classes(spec):
                checked += 1
                problems = flow_violations(spec, cls.counts, cls.occupations)
                if problems or multiplicity(spec, cls) < 1:
                    failures.append((kind.value, N, cls.params, problems))
    report("flow conservation", not failures, f"{checked} classes checked, {len(failures)} failures")
