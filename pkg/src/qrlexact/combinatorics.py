"""Trajectory classes, transition-count reconstruction and exact multiplicities.

A trajectory class groups every endpoint-respecting state sequence that has
the same occupation numbers and the same ordered transition counts
``a[i][j]``; all members share one probability and one reward.  Each model
is parameterised by a few free counters:

* ``QubitClosed`` / ``QubitAntiperiodic``: ``(p, c)`` with ``p`` the number of
  ``+`` states and ``c`` the number of ``+ -> -`` jumps;
* ``QutritLadder``: ``(n0, n2, c)`` with ``c`` the ``2 -> 0`` feedback count;
* ``FourLevel``: ``(n0, n1, n2, c01, c01p)`` with ``c01``/``c01p`` the counts of
  ``0 -> 1`` and ``0 -> 1p`` branchings.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ConstraintViolationError, InvalidModelError, MultiplicityOverflowError
from .models import ModelKind, ModelSpec

# Multiplicities are exact unsigned integers of this width; beyond it we fail loudly.
MULTIPLICITY_BITS = 128
MULTIPLICITY_MAX = (1 << MULTIPLICITY_BITS) - 1

PARAM_NAMES = {
    ModelKind.QUBIT_CLOSED: ("p", "c"),
    ModelKind.QUBIT_ANTIPERIODIC: ("p", "c"),
    ModelKind.QUTRIT_LADDER: ("n0", "n2", "c"),
    ModelKind.FOUR_LEVEL: ("n0", "n1", "n2", "c01", "c01p"),
}


@dataclass(frozen=True)
class TransitionCountVector:
    """Ordered transition counts ``a[i][j]`` (number of ``i -> j`` jumps)."""

    a: tuple[tuple[int, ...], ...]

    @classmethod
    def from_array(cls, arr: np.ndarray | Sequence[Sequence[int]]) -> TransitionCountVector:
        return cls(tuple(tuple(int(v) for v in row) for row in arr))

    def as_array(self) -> np.ndarray:
        return np.array(self.a, dtype=np.int64)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.a[i][j]

    @property
    def total(self) -> int:
        return sum(map(sum, self.a))


@dataclass(frozen=True)
class TrajectoryClass:
    model_kind: ModelKind
    N: int
    params: tuple[int, ...]
    occupations: tuple[int, ...]
    counts: TransitionCountVector

    @property
    def free_params(self) -> dict[str, int]:
        return dict(zip(PARAM_NAMES[self.model_kind], self.params))


def _require_default_endpoints(spec: ModelSpec) -> None:
    if not spec.has_default_endpoints:
        raise InvalidModelError(
            f"closed-form classes exist only for endpoints {spec.model_kind.default_endpoints}, "
            f"got ({spec.initial}, {spec.final})"
        )


def _violation(spec: ModelSpec, params: Sequence[int], why: str) -> ConstraintViolationError:
    names = ", ".join(f"{k}={v}" for k, v in zip(PARAM_NAMES[spec.model_kind], params))
    return ConstraintViolationError(f"{spec.model_kind.value} N={spec.N}: ({names}) {why}")


def occupations_of(spec: ModelSpec, params: Sequence[int]) -> tuple[int, ...]:
    N, kind = spec.N, spec.model_kind
    if kind in (ModelKind.QUBIT_CLOSED, ModelKind.QUBIT_ANTIPERIODIC):
        p = params[0]
        return (N + 1 - p, p)
    if kind is ModelKind.QUTRIT_LADDER:
        n0, n2, _ = params
        return (n0, N + 1 - n0 - n2, n2)
    n0, n1, n2, _, _ = params
    return (n0, n1, N + 1 - n0 - n1 - n2, n2)


def _in_range(spec: ModelSpec, params: tuple[int, ...]) -> bool:
    N, kind = spec.N, spec.model_kind
    if kind is ModelKind.QUBIT_CLOSED:
        p, c = params
        if p == N + 1:
            return c == 0
        return 2 <= p <= N and 1 <= c <= min(p - 1, N + 1 - p)
    if kind is ModelKind.QUBIT_ANTIPERIODIC:
        p, c = params
        return 1 <= p <= N and 1 <= c <= min(p, N + 1 - p)
    if kind is ModelKind.QUTRIT_LADDER:
        n0, n2, c = params
        n1 = N + 1 - n0 - n2
        return 1 <= n0 <= N - 1 and 1 <= n2 <= N - n0 and 0 <= c <= min(n0, n1, n2) - 1
    n0, n1, n2, c01, c01p = params
    n1p = N + 1 - n0 - n1 - n2
    return (1 <= n0 <= N - 1 and 1 <= n2 <= N - n0 and 0 <= n1 <= N + 1 - n0 - n2
            and 0 <= c01 <= min(n1, n0, n2)
            and max(0, 1 - c01) <= c01p <= min(n1p, n0 - c01, n2 - c01))


def reconstruct_counts(spec: ModelSpec, free_params: Sequence[int]) -> TransitionCountVector:
    """Full ``a[i][j]`` matrix from the model's free counters."""
    _require_default_endpoints(spec)
    params = tuple(int(v) for v in free_params)
    if len(params) != len(PARAM_NAMES[spec.model_kind]):
        raise _violation(spec, params, f"expects parameters {PARAM_NAMES[spec.model_kind]}")
    if not _in_range(spec, params):
        raise _violation(spec, params, "outside the admissible ranges")
    N, kind = spec.N, spec.model_kind
    a = np.zeros((spec.dimension, spec.dimension), dtype=np.int64)
    if kind is ModelKind.QUBIT_CLOSED:
        p, c = params
        a[1, 1], a[0, 1], a[1, 0], a[0, 0] = p - 1 - c, c, c, N + 1 - p - c
    elif kind is ModelKind.QUBIT_ANTIPERIODIC:
        p, c = params
        a[1, 1], a[0, 1], a[1, 0], a[0, 0] = p - c, c - 1, c, N - p - c + 1
    elif kind is ModelKind.QUTRIT_LADDER:
        n0, n1, n2 = occupations_of(spec, params)
        c = params[2]
        a[0, 0], a[0, 1] = n0 - 1 - c, 1 + c
        a[1, 1], a[1, 2] = n1 - 1 - c, 1 + c
        a[2, 0], a[2, 2] = c, n2 - 1 - c
    else:
        n0, n1, n1p, n2 = occupations_of(spec, params)
        c01, c01p = params[3], params[4]
        a[0, 0], a[0, 1], a[0, 2] = n0 - c01 - c01p, c01, c01p
        a[1, 1], a[1, 3] = n1 - c01, c01
        a[2, 2], a[2, 3] = n1p - c01p, c01p
        a[3, 0], a[3, 3] = c01 + c01p - 1, n2 - c01 - c01p
    if (a < 0).any():
        raise _violation(spec, params, "yields a negative transition count")
    return TransitionCountVector.from_array(a)


def flow_violations(spec: ModelSpec, counts: TransitionCountVector,
                    occupations: Sequence[int]) -> list[str]:
    """Every flow-conservation equation that ``counts`` fails (empty when consistent)."""
    a = counts.as_array()
    occ = np.asarray(occupations, dtype=np.int64)
    d = spec.dimension
    start = np.zeros(d, dtype=np.int64)
    start[spec.initial] = 1
    stop = np.zeros(d, dtype=np.int64)
    stop[spec.final] = 1
    problems = []
    if (a < 0).any():
        problems.append("negative count")
    if occ.sum() != spec.N + 1:
        problems.append(f"occupations sum to {occ.sum()}, expected {spec.N + 1}")
    if a.sum() != spec.N:
        problems.append(f"counts sum to {a.sum()}, expected {spec.N}")
    out, inc = a.sum(axis=1), a.sum(axis=0)
    for j in range(d):
        if out[j] != occ[j] - stop[j]:
            problems.append(f"outgoing from {j}: {out[j]} != {occ[j] - stop[j]}")
        if inc[j] != occ[j] - start[j]:
            problems.append(f"incoming to {j}: {inc[j]} != {occ[j] - start[j]}")
        off = a - np.diag(np.diag(a))
        net = off[j].sum() - off[:, j].sum()
        if net != start[j] - stop[j]:
            problems.append(f"net flow at {j}: {net} != {start[j] - stop[j]}")
    for i, j in spec.model_kind.forbidden:
        if a[i, j] != 0:
            problems.append(f"forbidden transition {i}->{j} used {a[i, j]} times")
    return problems


def _raw_params(spec: ModelSpec) -> Iterator[tuple[int, ...]]:
    N, kind = spec.N, spec.model_kind
    if kind is ModelKind.QUBIT_CLOSED:
        for p in range(2, N + 1):
            for c in range(1, min(p - 1, N + 1 - p) + 1):
                yield (p, c)
        yield (N + 1, 0)
    elif kind is ModelKind.QUBIT_ANTIPERIODIC:
        for p in range(1, N + 1):
            for c in range(1, min(p, N + 1 - p) + 1):
                yield (p, c)
    elif kind is ModelKind.QUTRIT_LADDER:
        for n0 in range(1, N):
            for n2 in range(1, N - n0 + 1):
                n1 = N + 1 - n0 - n2
                for c in range(min(n0, n1, n2)):
                    yield (n0, n2, c)
    else:
        for n0 in range(1, N):
            for n2 in range(1, N - n0 + 1):
                for n1 in range(N + 2 - n0 - n2):
                    n1p = N + 1 - n0 - n1 - n2
                    for c01 in range(min(n1, n0, n2) + 1):
                        # an occupied branch must be entered at least once
                        if n1 > 0 and c01 == 0:
                            continue
                        lo = max(0, 1 - c01, 1 if n1p > 0 else 0)
                        for c01p in range(lo, min(n1p, n0 - c01, n2 - c01) + 1):
                            yield (n0, n1, n2, c01, c01p)


def enumerate_classes(spec: ModelSpec) -> Iterator[TrajectoryClass]:
    """Every trajectory class with at least one member, in nested-loop order.

    Loop order is ``p, c`` for qubits (closed chain: the all-``+`` class
    last), ``n0, n2, c`` for the qutrit and ``n0, n2, n1, c01, c01p`` for the
    four-level model.
    """
    _require_default_endpoints(spec)
    for params in _raw_params(spec):
        counts = reconstruct_counts(spec, params)
        yield TrajectoryClass(spec.model_kind, spec.N, params, occupations_of(spec, params), counts)


def count_classes(spec: ModelSpec) -> int:
    return sum(1 for _ in _raw_params(spec))


def _checked(value: int) -> int:
    if value > MULTIPLICITY_MAX:
        raise MultiplicityOverflowError(
            f"multiplicity needs {value.bit_length()} bits, limit is {MULTIPLICITY_BITS}"
        )
    return value


def _comb(n: int, k: int) -> int:
    if n < 0 or k < 0 or k > n:
        return 0
    return math.comb(n, k)


def qubit_closed_multiplicity(N: int, p: int, c: int) -> int:
    if p == N + 1 and c == 0:
        return 1
    return _checked(_comb(p - 1, c) * _comb(N - p, c - 1))


def qubit_antiperiodic_multiplicity(N: int, p: int, c: int) -> int:
    return _checked(_comb(p - 1, c - 1) * _comb(N - p, c - 1))


def qutrit_multiplicity(n0: int, n1: int, n2: int, c: int) -> int:
    """Runs of ``0``, ``1``, ``2`` visits split into ``c + 1`` non-empty groups each.

    Evaluates to zero when ``c > n_j - 1`` for some state.
    """
    out = 1
    for n in (n0, n1, n2):
        out = _checked(out * _comb(n - 1, c))
    return out


def count_walks(edges: Sequence[tuple[int, int, int]], start: int, end: int) -> int:
    """Number of distinct node sequences that use each edge exactly its budget.

    ``edges`` holds ``(src, dst, budget)``; parallel uses of one edge are
    indistinguishable.  Depth-first search memoised on
    ``(node, remaining budgets)``; the memo lives for this call only.
    """
    outgoing: dict[int, list[int]] = {}
    for k, (src, _, _) in enumerate(edges):
        outgoing.setdefault(src, []).append(k)
    targets = [dst for _, dst, _ in edges]

    @functools.cache
    def walks(node: int, remaining: tuple[int, ...]) -> int:
        if not any(remaining):
            return 1 if node == end else 0
        total = 0
        for k in outgoing.get(node, ()):
            if remaining[k]:
                rest = remaining[:k] + (remaining[k] - 1,) + remaining[k + 1:]
                total = _checked(total + walks(targets[k], rest))
        return total

    return walks(start, tuple(b for _, _, b in edges))


@functools.lru_cache(maxsize=None)
def fourlevel_multiplicity(n0: int, n1: int, n1p: int, n2: int, c01: int, c01p: int) -> int:
    """Walk count on the reduced four-level graph for one class.

    States are indexed ``0, 1, 1p, 2`` -> ``0, 1, 2, 3``; the nine allowed
    transitions carry the budgets of the reconstructed count matrix.
    """
    budgets = [
        (0, 0, n0 - c01 - c01p), (0, 1, c01), (0, 2, c01p),
        (1, 1, n1 - c01), (1, 3, c01),
        (2, 2, n1p - c01p), (2, 3, c01p),
        (3, 0, c01 + c01p - 1), (3, 3, n2 - c01 - c01p),
    ]
    if any(b < 0 for _, _, b in budgets):
        return 0
    return count_walks(budgets, 0, 3)


def multiplicity(spec: ModelSpec, cls: TrajectoryClass | Sequence[int]) -> int:
    """Exact number of ordered trajectories in a class.

    ``cls`` may be a :class:`TrajectoryClass` or the bare free parameters.
    Parameters outside the admissible ranges raise
    :class:`ConstraintViolationError`.
    """
    params = cls.params if isinstance(cls, TrajectoryClass) else tuple(int(v) for v in cls)
    reconstruct_counts(spec, params)
    N, kind = spec.N, spec.model_kind
    if kind is ModelKind.QUBIT_CLOSED:
        return qubit_closed_multiplicity(N, *params)
    if kind is ModelKind.QUBIT_ANTIPERIODIC:
        return qubit_antiperiodic_multiplicity(N, *params)
    occ = occupations_of(spec, params)
    if kind is ModelKind.QUTRIT_LADDER:
        return qutrit_multiplicity(*occ, params[2])
    return fourlevel_multiplicity(*occ, params[3], params[4])


def fourlevel_table(N: int) -> list[tuple[int, int, int, int, int, int, int]]:
    """Rows ``(n0, n1, n1p, n2, c01, c01p, multiplicity)`` sorted like a printed table."""
    spec = ModelSpec(ModelKind.FOUR_LEVEL, N)
    rows = []
    for cls in enumerate_classes(spec):
        n0, n1, n1p, n2 = cls.occupations
        rows.append((n0, n1, n1p, n2, cls.params[3], cls.params[4], multiplicity(spec, cls)))
    rows.sort(key=lambda r: (r[0], r[3], r[4], r[5], -r[1]))
    return rows
