"""Closed-form expected returns as sums over trajectory classes.

Every class contributes ``multiplicity * reward * probability`` where the
probability is a product of powers of ``x`` and ``1 - x`` for each rotation
and the reward is affine in the class occupations.  A :class:`ClassTable`
stores the exponents, multiplicities and occupations of all classes for one
``(model, N)`` as integer arrays so that one pass evaluates any number of
policy points.  Powers come from a per-evaluation table ``base**k`` for
``k = 0..max exponent``, which also fixes ``0**0 = 1``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .combinatorics import enumerate_classes, multiplicity
from .errors import InvalidModelError, InvalidPolicyError
from .models import ModelKind, ModelSpec, PolicyPoint, check_policy

# above this many class terms per point the sum is accumulated with math.fsum
COMPENSATED_THRESHOLD = 10_000
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class ReturnValue:
    j: float
    evaluations: int

    def __float__(self) -> float:
        return self.j


@dataclass(frozen=True)
class ClassTable:
    """Columnar view of the class set for one ``(kind, N)``.

    ``bases`` maps a base name (``"x"``, ``"1-x"``, ...) to its exponent per
    class; ``columns`` holds the free counters and occupations by name.
    """

    model_kind: ModelKind
    N: int
    multiplicity: np.ndarray = field(repr=False)
    columns: dict[str, np.ndarray] = field(repr=False)
    bases: dict[str, np.ndarray] = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.multiplicity)

    @classmethod
    def build(cls, kind: ModelKind, N: int, *, common: bool = False) -> ClassTable:
        spec = ModelSpec(kind, N)
        rows, mults = [], []
        for tc in enumerate_classes(spec):
            rows.append(tc.params + tc.occupations)
            mults.append(multiplicity(spec, tc))
        d = kind.dimension
        width = len(rows[0]) if rows else 0
        data = np.array(rows, dtype=np.int64).reshape(-1, width)
        names = _PARAM_COLS[kind] + tuple(f"n{i}" for i in range(d))
        cols = {name: data[:, i] for i, name in enumerate(names)}
        bases = _exponents(kind, N, cols, common)
        for name, e in bases.items():
            if (e < 0).any():
                raise AssertionError(f"negative exponent for base {name}")
        mult = np.array([float(m) for m in mults])
        return cls(kind, N, mult, cols, bases)


_PARAM_COLS = {
    ModelKind.QUBIT_CLOSED: ("p", "c"),
    ModelKind.QUBIT_ANTIPERIODIC: ("p", "c"),
    ModelKind.QUTRIT_LADDER: ("n0_", "n2_", "c"),
    ModelKind.FOUR_LEVEL: ("n0_", "n1_", "n2_", "c01", "c01p"),
}


def _exponents(kind: ModelKind, N: int, col: dict[str, np.ndarray],
               common: bool) -> dict[str, np.ndarray]:
    if kind is ModelKind.QUBIT_CLOSED:
        p, c = col["p"], col["c"]
        return {"xp": c, "1-xp": p - 1 - c, "xm": c, "1-xm": N + 1 - p - c}
    if kind is ModelKind.QUBIT_ANTIPERIODIC:
        p, c = col["p"], col["c"]
        return {"xp": c, "1-xp": p - c, "xm": c - 1, "1-xm": N - p - c + 1}
    if kind is ModelKind.QUTRIT_LADDER:
        c = col["c"]
        if common:
            return {"x": 3 * c + 2, "1-x": N - 3 * c - 2}
        n0, n1, n2 = col["n0"], col["n1"], col["n2"]
        return {"x": 1 + c, "1-x": n0 - 1 - c, "y": 1 + c, "1-y": n1 - 1 - c,
                "z": c, "1-z": n2 - 1 - c}
    n0, n1, n1p, n2 = col["n0"], col["n1"], col["n2"], col["n3"]
    c01, c01p = col["c01"], col["c01p"]
    return {"x": 3 * c01 + 2 * c01p - 1, "1-x": 2 * n0 + n1 + n2 - 3 * c01 - 3 * c01p,
            "xq": c01p, "1-xq": n1p - c01p}


@functools.lru_cache(maxsize=64)
def class_table(kind: ModelKind, N: int, common: bool = False) -> ClassTable:
    return ClassTable.build(kind, N, common=common)


def _base_values(name: str, coords: dict[str, np.ndarray]) -> np.ndarray:
    if name.startswith("1-"):
        return 1.0 - coords[name[2:]]
    return coords[name]


def _kernel(table: ClassTable, coords: dict[str, np.ndarray], eps: float,
            epsp: float, common: bool) -> np.ndarray:
    """Class reward for every (point, class) pair, shape ``(points, classes)``."""
    col, N, kind = table.columns, table.N, table.model_kind
    if kind is ModelKind.QUBIT_CLOSED:
        xp, xm = coords["xp"][:, None], coords["xm"][:, None]
        p = col["p"][None, :]
        return (p - 1) * xp - (N + 1 - p) * xm
    if kind is ModelKind.QUBIT_ANTIPERIODIC:
        xp, xm = coords["xp"][:, None], coords["xm"][:, None]
        p = col["p"][None, :]
        return p * xp - 1 - (N - p) * xm
    if kind is ModelKind.QUTRIT_LADDER:
        n0, n1, n2 = (col[k][None, :] for k in ("n0", "n1", "n2"))
        x = coords["x"][:, None]
        if common:
            return (n0 + 2 * n2 - N - 2) * x + 1
        y, z = coords["y"][:, None], coords["z"][:, None]
        return 1 - eps * n0 * x - (1 - eps) * n1 * y + (n2 - 1) * z
    n0, n1, n1p, n2 = (col[k][None, :] for k in ("n0", "n1", "n2", "n3"))
    x, xq = coords["x"][:, None], coords["xq"][:, None]
    return (n0 * (-eps * x * (1 - x) - epsp * x) - n1 * (1 - eps) * x
            - n1p * (1 - epsp) * xq + n2 * x + (1 - x))


def _sum_classes(table: ClassTable, coords: dict[str, np.ndarray], eps: float,
                 epsp: float, common: bool) -> np.ndarray:
    npts = len(next(iter(coords.values())))
    if table.size == 0:
        return np.zeros(npts)
    out = np.empty(npts)
    step = max(1, _CHUNK_ELEMENTS // table.size)
    for lo in range(0, npts, step):
        part = {k: v[lo:lo + step] for k, v in coords.items()}
        terms = _kernel(table, part, eps, epsp, common) * table.multiplicity[None, :]
        for name, exps in table.bases.items():
            base = _base_values(name, part)
            powers = base[:, None] ** np.arange(int(exps.max()) + 1)[None, :]
            terms = terms * powers[:, exps]
        if table.size > COMPENSATED_THRESHOLD:
            out[lo:lo + step] = [math.fsum(row) for row in terms]
        else:
            out[lo:lo + step] = terms.sum(axis=1)
    return out


_COORD_NAMES = {
    ModelKind.QUBIT_CLOSED: ("xp", "xm"),
    ModelKind.QUBIT_ANTIPERIODIC: ("xp", "xm"),
    ModelKind.FOUR_LEVEL: ("x", "xq"),
}


def _coord_names(kind: ModelKind, k: int) -> tuple[str, ...]:
    if kind is ModelKind.QUTRIT_LADDER:
        return ("x",) if k == 1 else ("x", "y", "z")
    return _COORD_NAMES[kind]


def evaluate_points(spec: ModelSpec, points: np.ndarray | Sequence[Sequence[float]],
                    *, table: ClassTable | None = None) -> np.ndarray:
    """Expected return at each row of ``points`` (shape ``(n, k)``).

    A qutrit policy with one coordinate uses the common-rotation form, which
    carries no dependence on ``epsilon``.
    """
    if not spec.has_default_endpoints:
        raise InvalidModelError(
            "closed-form returns exist only for the default endpoints; use the oracle instead"
        )
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    k = pts.shape[1]
    kind = spec.model_kind
    if k not in kind.policy_sizes:
        raise InvalidPolicyError(f"{kind.value} takes {kind.policy_sizes} coordinates, got {k}")
    if not ((pts >= 0.0) & (pts <= 1.0)).all():
        raise InvalidPolicyError("policy coordinates must lie in [0, 1]")
    common = kind is ModelKind.QUTRIT_LADDER and k == 1
    if table is None:
        table = class_table(kind, spec.N, common)
    coords = dict(zip(_coord_names(kind, k), pts.T))
    return _sum_classes(table, coords, spec.epsilon, spec.epsilon_prime, common)


def analytic_return(spec: ModelSpec, p: PolicyPoint | Sequence[float], *,
                    cached: bool = True) -> ReturnValue:
    """Expected return from the class sum.

    ``cached=False`` rebuilds the class table, so the call pays for the
    enumeration and the multiplicities as well as the summation.
    """
    p = check_policy(spec, p)
    common = spec.model_kind is ModelKind.QUTRIT_LADDER and len(p) == 1
    table = class_table(spec.model_kind, spec.N, common) if cached else \
        ClassTable.build(spec.model_kind, spec.N, common=common)
    j = evaluate_points(spec, [p.coords], table=table)[0]
    return ReturnValue(float(j), table.size)


def j_qubit_closed(N: int, x_plus: float, x_minus: float) -> ReturnValue:
    return analytic_return(ModelSpec(ModelKind.QUBIT_CLOSED, N), (x_plus, x_minus))


def j_qubit_antiperiodic(N: int, x_plus: float, x_minus: float) -> ReturnValue:
    return analytic_return(ModelSpec(ModelKind.QUBIT_ANTIPERIODIC, N), (x_plus, x_minus))


def j_qutrit_common(N: int, x: float) -> ReturnValue:
    """Qutrit ladder with one rotation angle shared by all three levels."""
    return analytic_return(ModelSpec(ModelKind.QUTRIT_LADDER, N), (x,))


def j_qutrit_three(N: int, epsilon: float, x: float, y: float, z: float) -> ReturnValue:
    return analytic_return(ModelSpec(ModelKind.QUTRIT_LADDER, N, epsilon=epsilon), (x, y, z))


def j_fourlevel(N: int, epsilon: float, epsilon_prime: float, x: float,
                x_prime: float) -> ReturnValue:
    spec = ModelSpec(ModelKind.FOUR_LEVEL, N, epsilon=epsilon, epsilon_prime=epsilon_prime)
    return analytic_return(spec, (x, x_prime))


def analytic_evaluator(spec: ModelSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Batch evaluator ``points -> J`` bound to ``spec``."""
    return functools.partial(evaluate_points, spec)
