"""Model definitions: the four measured-walk models and their transition data.

Basis conventions (state index -> label, energy):

* qubit models:   0 -> ``-`` (0),  1 -> ``+`` (1)
* qutrit ladder:  0 -> ``0`` (0),  1 -> ``1`` (eps),  2 -> ``2`` (1)
* four-level:     0 -> ``0`` (0),  1 -> ``1`` (eps),  2 -> ``1p`` (eps'),  3 -> ``2`` (1)

Policies are stored as ``x = sin^2(theta)`` per controlled rotation; phases
never enter a transition probability or an energy expectation, so they are
not represented.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

import numpy as np

from .errors import InvalidModelError, InvalidPolicyError


class ModelKind(str, Enum):
    QUBIT_CLOSED = "QubitClosed"
    QUBIT_ANTIPERIODIC = "QubitAntiperiodic"
    QUTRIT_LADDER = "QutritLadder"
    FOUR_LEVEL = "FourLevel"

    @property
    def dimension(self) -> int:
        return _DIMENSION[self]

    @property
    def labels(self) -> tuple[str, ...]:
        return _LABELS[self]

    @property
    def default_endpoints(self) -> tuple[int, int]:
        return _ENDPOINTS[self]

    @property
    def min_horizon(self) -> int:
        return 2 if self in (ModelKind.QUTRIT_LADDER, ModelKind.FOUR_LEVEL) else 1

    @property
    def policy_sizes(self) -> tuple[int, ...]:
        """Accepted coordinate counts (qutrit: common rotation or three rotations)."""
        return (1, 3) if self is ModelKind.QUTRIT_LADDER else (2,)

    @property
    def forbidden(self) -> frozenset[tuple[int, int]]:
        """Ordered pairs (i, j) with identically zero transition probability."""
        return _FORBIDDEN[self]

    @classmethod
    def parse(cls, value: str | ModelKind) -> ModelKind:
        if isinstance(value, ModelKind):
            return value
        key = value.replace("-", "").replace("_", "").lower()
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        aliases = {"closed": cls.QUBIT_CLOSED, "antiperiodic": cls.QUBIT_ANTIPERIODIC,
                   "qutrit": cls.QUTRIT_LADDER, "fourlevel": cls.FOUR_LEVEL,
                   "4level": cls.FOUR_LEVEL}
        if key in aliases:
            return aliases[key]
        raise InvalidModelError(f"unknown model kind {value!r}")


_DIMENSION = {
    ModelKind.QUBIT_CLOSED: 2,
    ModelKind.QUBIT_ANTIPERIODIC: 2,
    ModelKind.QUTRIT_LADDER: 3,
    ModelKind.FOUR_LEVEL: 4,
}
_LABELS = {
    ModelKind.QUBIT_CLOSED: ("-", "+"),
    ModelKind.QUBIT_ANTIPERIODIC: ("-", "+"),
    ModelKind.QUTRIT_LADDER: ("0", "1", "2"),
    ModelKind.FOUR_LEVEL: ("0", "1", "1p", "2"),
}
_ENDPOINTS = {
    ModelKind.QUBIT_CLOSED: (1, 1),
    ModelKind.QUBIT_ANTIPERIODIC: (1, 0),
    ModelKind.QUTRIT_LADDER: (0, 2),
    ModelKind.FOUR_LEVEL: (0, 3),
}
_FORBIDDEN = {
    ModelKind.QUBIT_CLOSED: frozenset(),
    ModelKind.QUBIT_ANTIPERIODIC: frozenset(),
    ModelKind.QUTRIT_LADDER: frozenset({(1, 0), (2, 1), (0, 2)}),
    ModelKind.FOUR_LEVEL: frozenset({(0, 3), (1, 0), (1, 2), (2, 0), (2, 1), (3, 1), (3, 2)}),
}


@dataclass(frozen=True)
class ModelSpec:
    """One model instance: kind, horizon and energy parameters.

    ``initial``/``final`` default to the endpoints analysed for each kind
    (closed chain ``+ -> +``, anti-periodic ``+ -> -``, ladder models
    ``0 -> 2``).  Labels such as ``"+"`` or ``"1p"`` are accepted in place of
    indices.
    """

    model_kind: ModelKind
    N: int
    epsilon: float = 0.5
    epsilon_prime: float = 0.5
    initial: int | None = None
    final: int | None = None

    def __post_init__(self) -> None:
        kind = ModelKind.parse(self.model_kind)
        object.__setattr__(self, "model_kind", kind)
        if isinstance(self.N, bool) or not isinstance(self.N, (int, np.integer)):
            raise InvalidModelError(f"N must be an integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if self.N < kind.min_horizon:
            raise InvalidModelError(f"{kind.value} needs N >= {kind.min_horizon}, got {self.N}")
        for name in ("epsilon", "epsilon_prime"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidModelError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        start, stop = kind.default_endpoints
        object.__setattr__(self, "initial", self._state_index(self.initial, start))
        object.__setattr__(self, "final", self._state_index(self.final, stop))

    def _state_index(self, value: Any, default: int) -> int:
        if value is None:
            return default
        if isinstance(value, str):
            if value in self.model_kind.labels:
                return self.model_kind.labels.index(value)
            try:
                value = int(value)
            except ValueError:
                raise InvalidModelError(f"unknown state label {value!r}") from None
        index = int(value)
        if not 0 <= index < self.dimension:
            raise InvalidModelError(f"state index {index} out of range for d={self.dimension}")
        return index

    @property
    def dimension(self) -> int:
        return self.model_kind.dimension

    @property
    def energies(self) -> np.ndarray:
        kind = self.model_kind
        if kind is ModelKind.QUTRIT_LADDER:
            return np.array([0.0, self.epsilon, 1.0])
        if kind is ModelKind.FOUR_LEVEL:
            return np.array([0.0, self.epsilon, self.epsilon_prime, 1.0])
        return np.array([0.0, 1.0])

    @property
    def has_default_endpoints(self) -> bool:
        return (self.initial, self.final) == self.model_kind.default_endpoints

    def with_(self, **changes: Any) -> ModelSpec:
        fields = self.to_dict()
        fields.update(changes)
        return ModelSpec.from_dict(fields)

    def to_dict(self) -> dict[str, Any]:
        return {
            "model_kind": self.model_kind.value,
            "N": self.N,
            "epsilon": self.epsilon,
            "epsilon_prime": self.epsilon_prime,
            "initial": self.initial,
            "final": self.final,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ModelSpec:
        unknown = set(data) - {"model_kind", "N", "epsilon", "epsilon_prime", "initial", "final"}
        if unknown:
            raise InvalidModelError(f"unknown ModelSpec keys: {sorted(unknown)}")
        return cls(
            model_kind=data["model_kind"],
            N=data["N"],
            epsilon=data.get("epsilon", 0.5),
            epsilon_prime=data.get("epsilon_prime", 0.5),
            initial=data.get("initial"),
            final=data.get("final"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> ModelSpec:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class PolicyPoint:
    """Reduced policy coordinates, each ``sin^2`` of a rotation angle."""

    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        coords = tuple(float(c) for c in np.ravel(self.coords))
        if not coords:
            raise InvalidPolicyError("policy needs at least one coordinate")
        for c in coords:
            if not (0.0 <= c <= 1.0):
                raise InvalidPolicyError(f"policy coordinate {c!r} outside [0, 1]")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, *coords: float) -> PolicyPoint:
        return cls(tuple(coords))

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i: int) -> float:
        return self.coords[i]

    def distance(self, other: PolicyPoint) -> float:
        """Max-norm distance."""
        return max(abs(a - b) for a, b in zip(self.coords, other.coords))


def as_policy(p: PolicyPoint | Sequence[float] | float) -> PolicyPoint:
    if isinstance(p, PolicyPoint):
        return p
    return PolicyPoint(tuple(np.atleast_1d(np.asarray(p, dtype=float))))


def check_policy(spec: ModelSpec, p: PolicyPoint | Sequence[float]) -> PolicyPoint:
    p = as_policy(p)
    if len(p) not in spec.model_kind.policy_sizes:
        raise InvalidPolicyError(
            f"{spec.model_kind.value} takes {spec.model_kind.policy_sizes} coordinates, got {len(p)}"
        )
    return p


def rotation_parameters(spec: ModelSpec, p: PolicyPoint | Sequence[float]) -> tuple[float, ...]:
    """Per-rotation ``x`` values in the model's natural order.

    Qubits: ``(x_plus, x_minus)``; qutrit: ``(x, y, z)`` for the rotations at
    ``0, 1, 2`` (a single common coordinate is broadcast); four-level:
    ``(x, x_prime)``.
    """
    p = check_policy(spec, p)
    if spec.model_kind is ModelKind.QUTRIT_LADDER and len(p) == 1:
        return (p[0],) * 3
    return p.coords


@dataclass(frozen=True)
class TransitionMatrices:
    prob: np.ndarray = field(repr=False)
    reward: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        for arr in (self.prob, self.reward):
            arr.setflags(write=False)


def build_transition_matrices(spec: ModelSpec, p: PolicyPoint | Sequence[float]) -> TransitionMatrices:
    """Transition probabilities ``P[i, j]`` and rewards ``R[i, j]``.

    ``R[i, j]`` is the energy of ``j`` minus the energy expectation of the
    rotated state ``pi_i |i>``, i.e. the gain of collapsing onto ``j``.
    """
    kind = spec.model_kind
    eps, epsp = spec.epsilon, spec.epsilon_prime
    if kind in (ModelKind.QUBIT_CLOSED, ModelKind.QUBIT_ANTIPERIODIC):
        xp, xm = rotation_parameters(spec, p)
        prob = [[1 - xm, xm],
                [xp, 1 - xp]]
        pre = [xm, 1 - xp]
    elif kind is ModelKind.QUTRIT_LADDER:
        x, y, z = rotation_parameters(spec, p)
        prob = [[1 - x, x, 0.0],
                [0.0, 1 - y, y],
                [z, 0.0, 1 - z]]
        pre = [eps * x, eps * (1 - y) + y, 1 - z]
    else:
        x, xq = rotation_parameters(spec, p)
        prob = [[(1 - x) ** 2, x * (1 - x), x, 0.0],
                [0.0, 1 - x, 0.0, x],
                [0.0, 0.0, 1 - xq, xq],
                [x, 0.0, 0.0, 1 - x]]
        pre = [eps * x * (1 - x) + epsp * x, eps * (1 - x) + x, epsp * (1 - xq) + xq, 1 - x]
    energies = spec.energies
    reward = energies[None, :] - np.asarray(pre)[:, None]
    return TransitionMatrices(np.array(prob, dtype=float), reward)


def hamiltonian(spec: ModelSpec) -> np.ndarray:
    return np.diag(spec.energies)


def _givens(d: int, a: int, b: int, theta: float) -> np.ndarray:
    """Real rotation sending ``e_a -> cos e_a + sin e_b``."""
    g = np.eye(d)
    c, s = math.cos(theta), math.sin(theta)
    g[a, a] = c
    g[b, b] = c
    g[b, a] = s
    g[a, b] = -s
    return g


def rotation_matrix(spec: ModelSpec, p: PolicyPoint | Sequence[float], state: int) -> np.ndarray:
    """Explicit orthogonal matrix of the rotation applied at ``state``.

    Angles are rebuilt as ``theta = arcsin(sqrt(x))``; this is an independent
    route to the entries of :func:`build_transition_matrices`.
    """
    kind, d = spec.model_kind, spec.dimension
    angle = [math.asin(math.sqrt(v)) for v in rotation_parameters(spec, p)]
    if kind in (ModelKind.QUBIT_CLOSED, ModelKind.QUBIT_ANTIPERIODIC):
        theta_plus, theta_minus = angle
        return _givens(2, 1, 0, -theta_plus) if state == 1 else _givens(2, 0, 1, theta_minus)
    if kind is ModelKind.QUTRIT_LADDER:
        partner = {0: 1, 1: 2, 2: 0}[state]
        sign = -1.0 if state == 2 else 1.0
        return _givens(3, state, partner, sign * angle[state])
    theta, theta_p = angle
    if state == 0:
        # |0> -> cos^2|0> - sin cos|1> - sin|1p>: two successive plane rotations
        return _givens(d, 0, 1, -theta) @ _givens(d, 0, 2, -theta)
    if state == 1:
        return _givens(d, 1, 3, theta)
    if state == 2:
        return _givens(d, 2, 3, theta_p)
    return _givens(d, 3, 0, -theta)


def rotated_state(spec: ModelSpec, p: PolicyPoint | Sequence[float], state: int) -> np.ndarray:
    return rotation_matrix(spec, p, state)[:, state]
