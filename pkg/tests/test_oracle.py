import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrlexact import ModelKind, ModelSpec, ResourceLimitError, oracle_enumerate, oracle_return
from qrlexact.models import build_transition_matrices
from qrlexact.oracle import oracle_sum, sequence_count

from conftest import MODEL_NS, brute_return

unit = st.floats(0.0, 1.0)


def test_closed_n2_hand_value():
    assert oracle_return(ModelSpec("QubitClosed", 2), (0.5, 0.5)) == pytest.approx(0.25, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(x=unit, eps=st.floats(-1, 2))
def test_qutrit_n2(x, eps):
    spec = ModelSpec("QutritLadder", 2, epsilon=eps)
    assert oracle_return(spec, (x, x, x)) == pytest.approx(x * x * (1 - x), abs=1e-14)


@pytest.mark.parametrize("kind", list(ModelKind))
def test_zero_policy_between_distinct_states(kind):
    spec = ModelSpec(kind, 4)
    if spec.initial == spec.final:
        spec = spec.with_(final=(spec.initial + 1) % spec.dimension)
    k = kind.policy_sizes[-1]
    assert oracle_return(spec, (0.0,) * k) == 0.0


def test_sequence_counts():
    assert len(list(oracle_enumerate(ModelSpec("QubitClosed", 3), (0.3, 0.4)))) == 4
    spec = ModelSpec("FourLevel", 5)
    assert sum(1 for _ in oracle_enumerate(spec, (0.4, 0.6))) == 4 ** 4
    assert sum(1 for t in oracle_enumerate(spec, (0.4, 0.6)) if t.probability > 0) == 24


def test_qutrit_nonzero_paths():
    trajs = [t.states for t in oracle_enumerate(ModelSpec("QutritLadder", 3), (0.3, 0.5, 0.7), prune=True)]
    assert trajs == [(0, 0, 1, 2), (0, 1, 1, 2), (0, 1, 2, 2)]


@pytest.mark.parametrize("kind", list(ModelKind))
def test_matches_itertools_product(kind, rng):
    for N in list(MODEL_NS[kind])[:5]:
        spec = ModelSpec(kind, N, epsilon=rng.uniform(-1, 2), epsilon_prime=rng.uniform(-1, 2))
        p = tuple(rng.random(kind.policy_sizes[-1]))
        assert oracle_return(spec, p) == pytest.approx(brute_return(spec, p), abs=1e-13)


@settings(max_examples=25, deadline=None)
@given(data=st.data(), kind=st.sampled_from(list(ModelKind)), N=st.integers(2, 6))
def test_probability_completeness(data, kind, N):
    p = data.draw(st.tuples(*[unit] * kind.policy_sizes[-1]))
    spec = ModelSpec(kind, N)
    total = math.fsum(t.probability for f in range(spec.dimension)
                      for t in oracle_enumerate(spec.with_(final=f), p))
    assert total == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(data=st.data(), kind=st.sampled_from(list(ModelKind)))
def test_forbidden_transitions_have_exact_zero(data, kind):
    p = data.draw(st.tuples(*[unit] * kind.policy_sizes[-1]))
    spec = ModelSpec(kind, 4)
    forbidden = kind.forbidden
    for t in oracle_enumerate(spec, p):
        if any(step in forbidden for step in zip(t.states, t.states[1:])):
            assert t.probability == 0.0


def test_trajectory_invariants(rng):
    spec = ModelSpec("FourLevel", 4, epsilon=0.3, epsilon_prime=0.8)
    p = (0.35, 0.55)
    tm = build_transition_matrices(spec, p)
    for t in oracle_enumerate(spec, p):
        steps = list(zip(t.states, t.states[1:]))
        assert t.states[0] == spec.initial and t.states[-1] == spec.final
        assert t.probability == pytest.approx(math.prod(tm.prob[a, b] for a, b in steps), abs=1e-15)
        assert t.reward == pytest.approx(sum(tm.reward[a, b] for a, b in steps), abs=1e-13)


@pytest.mark.parametrize("N", range(3, 9))
def test_epsilon_cancellation(N, rng):
    for _ in range(3):
        x = float(rng.random())
        a = oracle_return(ModelSpec("QutritLadder", N, epsilon=0.1), (x,))
        b = oracle_return(ModelSpec("QutritLadder", N, epsilon=0.9), (x,))
        assert abs(a - b) <= 1e-10


def test_prune_naive_threads_agree():
    spec = ModelSpec("QutritLadder", 8, epsilon=0.4)
    p = (0.2, 0.7, 0.45)
    ref = oracle_return(spec, p)
    assert oracle_return(spec, p, prune=True) == pytest.approx(ref, abs=1e-14)
    assert oracle_return(spec, p, naive=True) == pytest.approx(ref, abs=1e-12)
    assert oracle_return(spec, p, threads=3) == ref
    assert oracle_return(spec, p, threads=3) == oracle_return(spec, p, threads=3)


def test_pruned_term_count():
    spec = ModelSpec("QutritLadder", 6)
    _, blind = oracle_sum(spec, (0.3, 0.4, 0.5))
    _, pruned = oracle_sum(spec, (0.3, 0.4, 0.5), prune=True)
    assert blind == 3 ** 5 and pruned < blind


def test_cap():
    spec = ModelSpec("QutritLadder", 20)
    with pytest.raises(ResourceLimitError) as info:
        oracle_return(spec, (0.5,))
    assert info.value.required == sequence_count(spec) == 3 ** 19
    with pytest.raises(ResourceLimitError):
        list(oracle_enumerate(ModelSpec("QubitClosed", 12), (0.1, 0.1), cap=100))


def test_grouping_by_counts_is_consistent(rng):
    # members of one (occupation, count) group share probability and reward
    spec = ModelSpec("FourLevel", 6, epsilon=1.7, epsilon_prime=0.2)
    p = tuple(rng.random(2))
    seen: dict = {}
    counts = Counter()
    for t in oracle_enumerate(spec, p, prune=True):
        steps = Counter(zip(t.states, t.states[1:]))
        key = (tuple(sorted(steps.items())),)
        counts[key] += 1
        if key in seen:
            assert t.probability == pytest.approx(seen[key][0], rel=1e-12)
            assert t.reward == pytest.approx(seen[key][1], abs=1e-12)
        else:
            seen[key] = (t.probability, t.reward)
    assert counts
