"""Landscape scans, global maximisation and crossover search over the policy cube.

The maximiser is two-stage: a uniform grid scan, then bounded Nelder-Mead
refinement from the best grid local maxima.  Evaluators are batch callables
mapping an ``(n, k)`` array of policy points to ``n`` returns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidPolicyError, NoCrossoverError
from .models import ModelSpec, PolicyPoint
from .oracle import oracle_return
from .returns import evaluate_points

Evaluator = Callable[[np.ndarray], np.ndarray]

DEFAULT_RESOLUTION = {1: 2001, 2: 201, 3: 61}


@dataclass(frozen=True)
class OptimConfig:
    grid_resolution: int | None = None  # None -> per-dimension default
    tol_j_rel: float = 1e-9
    d_sep: float = 0.05
    plateau_rel: float = 1e-3
    tol_eps: float = 1e-4
    # grid local maxima within this relative gap of the grid maximum seed a refinement
    tol_cluster: float = 0.05
    max_starts: int = 12
    xatol: float = 1e-9

    def resolution(self, dim: int) -> int:
        return self.grid_resolution or DEFAULT_RESOLUTION[dim]

    def tol_j(self, j: float) -> float:
        return self.tol_j_rel * max(1.0, abs(j))


@dataclass(frozen=True)
class LandscapeGrid:
    """``values`` has shape ``(resolution,) * dim``; axis 0 is the first coordinate."""

    resolution: int
    dim: int
    values: np.ndarray = field(repr=False)
    model: str | None = None

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.resolution)

    def points(self) -> np.ndarray:
        return lattice(self.resolution, self.dim)

    def argmax(self) -> tuple[float, ...]:
        idx = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return tuple(float(self.axis[i]) for i in idx)


@dataclass(frozen=True)
class OptimResult:
    maximisers: list[PolicyPoint]
    j_max: float
    plateau_fraction: float
    degenerate: bool

    @property
    def argmax(self) -> PolicyPoint:
        return self.maximisers[0]

    def to_dict(self) -> dict:
        return {
            "maximisers": [list(p.coords) for p in self.maximisers],
            "j_max": self.j_max,
            "plateau_fraction": self.plateau_fraction,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class CrossoverResult:
    epsilon_star: float
    bracket: tuple[float, float]
    argmax_low: PolicyPoint
    argmax_high: PolicyPoint
    j_at_star: float

    def to_dict(self) -> dict:
        return {
            "epsilon_star": self.epsilon_star,
            "bracket": list(self.bracket),
            "argmax_low": list(self.argmax_low.coords),
            "argmax_high": list(self.argmax_high.coords),
            "j_at_star": self.j_at_star,
        }


def lattice(resolution: int, dim: int) -> np.ndarray:
    """Row-major lattice points of the uniform grid on ``[0, 1]**dim``."""
    axis = np.linspace(0.0, 1.0, resolution)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def policy_dim(spec: ModelSpec) -> int:
    return spec.model_kind.policy_sizes[-1]


def make_evaluator(spec: ModelSpec, method: str = "analytic", *, prune: bool = True,
                   threads: int = 1) -> Evaluator:
    if method == "analytic":
        return lambda pts: evaluate_points(spec, pts)
    if method == "oracle":
        def run(pts: np.ndarray) -> np.ndarray:
            pts = np.atleast_2d(pts)
            return np.array([oracle_return(spec, row, prune=prune, threads=threads)
                             for row in pts])
        return run
    raise ValueError(f"unknown evaluation method {method!r}")


def scan_landscape(spec: ModelSpec | None, evaluator: Evaluator | None = None,
                   grid_resolution: int | None = None, *, dim: int | None = None) -> LandscapeGrid:
    dim = dim or policy_dim(spec)
    if dim > 3:
        raise InvalidPolicyError(f"landscape scans support at most 3 coordinates, got {dim}")
    res = grid_resolution or DEFAULT_RESOLUTION[dim]
    if res < 2:
        raise InvalidPolicyError("grid resolution must be at least 2")
    evaluator = evaluator or make_evaluator(spec)
    pts = lattice(res, dim)
    try:
        vals = np.asarray(evaluator(pts), dtype=float)
    except Exception as exc:
        for pt in pts:
            try:
                evaluator(pt[None, :])
            except Exception:
                exc.lattice_point = tuple(float(v) for v in pt)
                break
        raise
    model = spec.model_kind.value if spec is not None else None
    return LandscapeGrid(res, dim, vals.reshape((res,) * dim), model)


def plateau_measure(grid: LandscapeGrid, delta: float, reference: float | None = None) -> float:
    """Fraction of lattice cells within ``delta`` of the maximum.

    ``reference`` overrides the grid maximum (e.g. with a refined optimum).
    """
    vals = grid.values
    if vals.size == 0:
        raise ValueError("empty grid")
    top = float(vals.max()) if reference is None else reference
    return float(np.count_nonzero(vals >= top - delta)) / vals.size


def _grid_local_maxima(values: np.ndarray) -> np.ndarray:
    """Flat indices of cells not exceeded by any face neighbour."""
    mask = np.ones(values.shape, dtype=bool)
    for ax in range(values.ndim):
        n = values.shape[ax]
        for shift in (1, -1):
            neighbour = np.roll(values, shift, axis=ax)
            edge = [slice(None)] * values.ndim
            edge[ax] = slice(0, 1) if shift == 1 else slice(n - 1, n)
            cmp = values >= neighbour
            cmp[tuple(edge)] = True
            mask &= cmp
    return np.flatnonzero(mask)


def _refine(evaluator: Evaluator, start: np.ndarray, step: float, xatol: float) -> tuple[np.ndarray, float]:
    k = len(start)
    simplex = [start]
    for i in range(k):
        v = start.copy()
        v[i] = v[i] + step if v[i] + step <= 1.0 else v[i] - step
        simplex.append(v)

    def neg(x: np.ndarray) -> float:
        return -float(evaluator(np.clip(x, 0.0, 1.0)[None, :])[0])

    res = minimize(neg, start, method="Nelder-Mead", bounds=[(0.0, 1.0)] * k,
                   options={"initial_simplex": np.array(simplex), "xatol": xatol,
                            "fatol": 1e-15, "maxiter": 20000 * k, "maxfev": 40000 * k})
    x = np.clip(res.x, 0.0, 1.0)
    return x, -neg(x)


def _dedupe(cands: list[tuple[np.ndarray, float]], j_best: float, tol: float,
            d_sep: float) -> list[tuple[np.ndarray, float]]:
    keep: list[tuple[np.ndarray, float]] = []
    for x, j in sorted(cands, key=lambda c: -c[1]):
        if j < j_best - tol:
            continue
        if all(np.max(np.abs(x - y)) >= d_sep for y, _ in keep):
            keep.append((x, j))
    return keep


def maximise(spec: ModelSpec | None, evaluator: Evaluator | None = None,
             config: OptimConfig | None = None, *, dim: int | None = None,
             grid: LandscapeGrid | None = None) -> OptimResult:
    """Global maximum of the return over ``[0, 1]**dim``.

    All maximisers within ``tol_J`` of the best value and at least ``d_sep``
    apart are returned, sorted lexicographically; the first is canonical.
    """
    config = config or OptimConfig()
    dim = dim or policy_dim(spec)
    evaluator = evaluator or make_evaluator(spec)
    if grid is None:
        grid = scan_landscape(spec, evaluator, config.resolution(dim), dim=dim)
    vals = grid.values
    flat = vals.ravel()
    g_max = float(flat.max())
    pts = grid.points()
    local = _grid_local_maxima(vals)
    gap = config.tol_cluster * max(abs(g_max), 1e-300)
    seeds = local[flat[local] >= g_max - gap]
    seeds = seeds[np.argsort(-flat[seeds], kind="stable")][: config.max_starts]
    step = 1.0 / (grid.resolution - 1)
    cands = [(pts[i].copy(), float(flat[i])) for i in seeds]
    for i in seeds:
        x, j = _refine(evaluator, pts[i].copy(), step, config.xatol)
        cands.append((x, j))
    j_best = max(j for _, j in cands)
    kept = _dedupe(cands, j_best, config.tol_j(j_best), config.d_sep)
    kept.sort(key=lambda c: tuple(c[0]))
    delta = config.plateau_rel * abs(j_best)
    return OptimResult(
        maximisers=[PolicyPoint(tuple(float(v) for v in x)) for x, _ in kept],
        j_max=j_best,
        plateau_fraction=plateau_measure(grid, delta, reference=j_best),
        degenerate=len(kept) >= 2,
    )


def _nearest_is_low(point: PolicyPoint, low: PolicyPoint, high: PolicyPoint) -> bool:
    return point.distance(low) <= point.distance(high)


def find_crossover(spec_template: ModelSpec, epsilon_range: Sequence[float],
                   config: OptimConfig | None = None, *,
                   evaluator_factory: Callable[[ModelSpec], Evaluator] | None = None,
                   dim: int | None = None) -> CrossoverResult:
    """Bisect on ``epsilon`` for the point where the global argmax jumps.

    Each probe's argmax is attributed to whichever of the current low/high
    clusters is nearer in max-norm.  If the two clusters end up closer than
    ``d_sep`` the argmax moved continuously and no crossover is reported.
    """
    config = config or OptimConfig()
    factory = evaluator_factory or make_evaluator
    dim = dim or policy_dim(spec_template)

    def solve(eps: float) -> OptimResult:
        spec = spec_template.with_(epsilon=eps)
        return maximise(spec, factory(spec), config, dim=dim)

    lo, hi = (float(v) for v in epsilon_range)
    if not lo < hi:
        raise ValueError("epsilon range must be increasing")
    a_lo, a_hi = solve(lo).argmax, solve(hi).argmax
    if a_lo.distance(a_hi) < config.d_sep:
        raise NoCrossoverError(
            f"argmax at epsilon={lo} and epsilon={hi} coincide within d_sep={config.d_sep}"
        )
    while hi - lo > config.tol_eps:
        mid = 0.5 * (lo + hi)
        a_mid = solve(mid).argmax
        if _nearest_is_low(a_mid, a_lo, a_hi):
            lo, a_lo = mid, a_mid
        else:
            hi, a_hi = mid, a_mid
    if a_lo.distance(a_hi) < config.d_sep:
        raise NoCrossoverError(
            f"argmax moves continuously near epsilon={0.5 * (lo + hi):.6g}; no jump above d_sep"
        )
    star = 0.5 * (lo + hi)
    spec = spec_template.with_(epsilon=star)
    ev = factory(spec)
    step = 1.0 / (config.resolution(dim) - 1)
    x_lo, j_lo = _refine(ev, np.array(a_lo.coords), step, config.xatol)
    x_hi, j_hi = _refine(ev, np.array(a_hi.coords), step, config.xatol)
    return CrossoverResult(
        epsilon_star=star,
        bracket=(lo, hi),
        argmax_low=PolicyPoint(tuple(x_lo)),
        argmax_high=PolicyPoint(tuple(x_hi)),
        j_at_star=max(j_lo, j_hi),
    )
