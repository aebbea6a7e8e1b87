"""Independent reference implementations shared by the test modules.

None of these touch the package's class machinery or its odometer; they are
built from the explicit rotation matrices and the Hamiltonian, or from
transfer-matrix recursions.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter

import numpy as np
import pytest

from qrlexact.models import ModelKind, ModelSpec, hamiltonian, rotation_matrix


def quantum_step_data(spec: ModelSpec, policy) -> tuple[np.ndarray, np.ndarray]:
    """``P[i, j] = |<j|pi_i|i>|^2`` and ``R[i, j] = E_j - <pi_i i|H|pi_i i>``."""
    d = spec.dimension
    H = hamiltonian(spec)
    P = np.zeros((d, d))
    R = np.zeros((d, d))
    for i in range(d):
        psi = rotation_matrix(spec, policy, i)[:, i]
        P[i] = np.abs(psi) ** 2
        R[i] = np.diag(H) - psi @ H @ psi
    return P, R


def brute_return(spec: ModelSpec, policy) -> float:
    """Plain ``itertools.product`` enumeration over quantum step data."""
    P, R = quantum_step_data(spec, policy)
    total = []
    for mid in itertools.product(range(spec.dimension), repeat=spec.N - 1):
        seq = (spec.initial, *mid, spec.final)
        prob = math.prod(P[a, b] for a, b in zip(seq, seq[1:]))
        rew = sum(R[a, b] for a, b in zip(seq, seq[1:]))
        total.append(prob * rew)
    return math.fsum(total)


def dp_return(spec: ModelSpec, policy) -> float:
    """Transfer-matrix recursion: sum over steps of forward * (P*R) * backward."""
    P, R = quantum_step_data(spec, policy)
    d, N = spec.dimension, spec.N
    fwd = [np.eye(d)[spec.initial]]
    for _ in range(N):
        fwd.append(fwd[-1] @ P)
    bwd = [np.eye(d)[:, spec.final]]
    for _ in range(N):
        bwd.append(P @ bwd[-1])
    PR = P * R
    return float(sum(fwd[k] @ PR @ bwd[N - 1 - k] for k in range(N)))


def grouped_classes(spec: ModelSpec) -> Counter:
    """Multiset of (occupations, counts) over structurally allowed sequences."""
    d = spec.dimension
    forbidden = spec.model_kind.forbidden
    out: Counter = Counter()
    for mid in itertools.product(range(d), repeat=spec.N - 1):
        seq = (spec.initial, *mid, spec.final)
        steps = list(zip(seq, seq[1:]))
        if any(s in forbidden for s in steps):
            continue
        occ = tuple(seq.count(i) for i in range(d))
        a = [[0] * d for _ in range(d)]
        for i, j in steps:
            a[i][j] += 1
        out[(occ, tuple(map(tuple, a)))] += 1
    return out


def fourlevel_stars_and_bars(n0, n1, n1p, n2, c01, c01p) -> int:
    """Closed-form walk count: order the branch choices, then place self-loops."""
    a00 = n0 - c01 - c01p
    a20 = c01 + c01p - 1
    a11, a1p, a22 = n1 - c01, n1p - c01p, n2 - c01 - c01p
    if min(a00, a20, a11, a1p, a22, c01, c01p) < 0:
        return 0
    if (n1 > 0 and c01 == 0) or (n1p > 0 and c01p == 0):
        return 0

    def loops(count, visits):
        # distribute `count` self-loops over `visits` visits
        if visits == 0:
            return 1 if count == 0 else 0
        return math.comb(count + visits - 1, visits - 1)

    return (math.comb(c01 + c01p, c01) * loops(a00, a20 + 1) * loops(a11, c01)
            * loops(a1p, c01p) * loops(a22, c01 + c01p))


MODEL_NS = {
    ModelKind.QUBIT_CLOSED: range(1, 13),
    ModelKind.QUBIT_ANTIPERIODIC: range(1, 13),
    ModelKind.QUTRIT_LADDER: range(2, 10),
    ModelKind.FOUR_LEVEL: range(2, 8),
}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
