"""Brute-force expected return: every intermediate state sequence, one by one.

This module only uses the per-step transition probabilities and rewards.  It
deliberately knows nothing about trajectory classes, so it serves as the
ground truth for the closed forms.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import ResourceLimitError
from .models import ModelSpec, PolicyPoint, build_transition_matrices

DEFAULT_CAP = 10**8


@dataclass(frozen=True)
class Trajectory:
    states: tuple[int, ...]
    probability: float
    reward: float


def sequence_count(spec: ModelSpec) -> int:
    """Number of endpoint-respecting sequences, ``d**(N-1)``."""
    return spec.dimension ** (spec.N - 1)


def _check_cap(spec: ModelSpec, cap: int) -> None:
    required = sequence_count(spec)
    if required > cap:
        raise ResourceLimitError(required, cap)


def _walk(prob: list[list[float]], reward: list[list[float]], start: int, stop: int,
          N: int, first: int | None, prune: bool) -> Iterator[tuple[list[int], float, float]]:
    """Odometer over intermediate states, optionally with the first one pinned.

    Yields ``(sequence, probability, reward)``; the sequence list is reused,
    so callers must copy it if they keep it.
    """
    d = len(prob)
    m = N - 1
    seq = [start] + [0] * m + [stop]
    if m == 0:
        yield seq, prob[start][stop], reward[start][stop]
        return
    limit = [d] * (m + 1)
    if first is not None:
        seq[1] = first
        limit[1] = first + 1
    pp = [1.0] * (m + 1)
    rr = [0.0] * (m + 1)
    k = 1
    while k >= 1:
        v = seq[k]
        if v >= limit[k]:
            k -= 1
            seq[k] += 1
            continue
        u = seq[k - 1]
        pk = pp[k - 1] * prob[u][v]
        if prune and pk == 0.0:
            seq[k] = v + 1
            continue
        pp[k] = pk
        rr[k] = rr[k - 1] + reward[u][v]
        if k == m:
            yield seq, pk * prob[v][stop], rr[k] + reward[v][stop]
            seq[k] = v + 1
        else:
            k += 1
            seq[k] = 0


def oracle_enumerate(spec: ModelSpec, p: PolicyPoint | Sequence[float], *,
                     prune: bool = False, cap: int = DEFAULT_CAP) -> Iterator[Trajectory]:
    """Every sequence from ``spec.initial`` to ``spec.final`` in lexicographic order.

    With ``prune=True`` sequences whose probability is exactly zero are skipped.
    """
    _check_cap(spec, cap)
    tm = build_transition_matrices(spec, p)
    prob, reward = tm.prob.tolist(), tm.reward.tolist()
    for seq, pr, rw in _walk(prob, reward, spec.initial, spec.final, spec.N, None, prune):
        if prune and pr == 0.0:
            continue
        yield Trajectory(tuple(seq), pr, rw)


def _partition_sum(prob, reward, start, stop, N, first, prune, naive) -> tuple[float, float, int]:
    # Neumaier compensated summation unless the naive mode is requested
    total = 0.0
    comp = 0.0
    terms = 0
    for _, pr, rw in _walk(prob, reward, start, stop, N, first, prune):
        terms += 1
        term = pr * rw
        if naive:
            total += term
            continue
        t = total + term
        if abs(total) >= abs(term):
            comp += (total - t) + term
        else:
            comp += (term - t) + total
        total = t
    return total, comp, terms


def oracle_sum(spec: ModelSpec, p: PolicyPoint | Sequence[float], *, prune: bool = False,
               naive: bool = False, cap: int = DEFAULT_CAP, threads: int = 1) -> tuple[float, int]:
    """Expected return together with the number of sequences actually summed.

    The sequence space is split by the first intermediate state; the parts
    may run on a thread pool and are always merged in index order.
    """
    _check_cap(spec, cap)
    tm = build_transition_matrices(spec, p)
    prob, reward = tm.prob.tolist(), tm.reward.tolist()
    args = (prob, reward, spec.initial, spec.final, spec.N)
    firsts: list[int | None] = [None] if spec.N == 1 else list(range(spec.dimension))

    def run(first: int | None) -> tuple[float, float, int]:
        return _partition_sum(*args, first, prune, naive)

    if threads > 1 and len(firsts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, firsts))
    else:
        parts = [run(f) for f in firsts]
    terms = sum(part[2] for part in parts)
    if naive:
        out = 0.0
        for total, _, _ in parts:
            out += total
        return out, terms
    return math.fsum(v for part in parts for v in part[:2]), terms


def oracle_return(spec: ModelSpec, p: PolicyPoint | Sequence[float], *, prune: bool = False,
                  naive: bool = False, cap: int = DEFAULT_CAP, threads: int = 1) -> float:
    """``sum_tau R(tau) P(tau)`` over all sequences from first principles.

    ``prune`` skips zero-probability prefixes; ``naive`` replaces the
    compensated accumulation with a plain running sum.
    """
    return oracle_sum(spec, p, prune=prune, naive=naive, cap=cap, threads=threads)[0]
