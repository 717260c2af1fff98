"""Parameter sweeps over Reynolds number.

For each R the delta sweep scans integer ``1 <= k <= sqrt(R/sqrt(2))`` and a
uniform lattice of ``xi`` in ``[-2(1+sqrt(R)), 2(1+sqrt(R))]`` and records the
largest ``k^2 ||delta_j||^2`` and ``||delta_j'||^2``.  The resolvent sweep does
the same for the mode gains on ``|xi| <= 2 sqrt(2) (1+sqrt(R))`` and adds spot
checks beyond that circle.

Responses peak sharply in the critical-layer band ``xi in [-k, 0]`` (where
``xi + k y = 0`` inside the channel), often between lattice points.  With
``refine=True`` each k is also sampled on that band and the best point is
polished with a bounded scalar maximization between its neighbours.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .bvp import ClampedSystem, DELTA1_BC, DELTA2_BC, ProblemSpec, refine_until_converged
from .errors import CouetteError, SweepFailure, TruncationWarning
from .grid import SpectralGrid, build_grid
from .operators import ModeParams, assemble_operators
from .parallel import ordered_map
from .resolvent import (
    ResolventQuery,
    default_k_max,
    global_norm,
    mode_gain,
    theorem1_bound,
    theorem1_threshold,
)

TARGETS = ("delta1", "delta2", "resolvent")
MAX_LATTICE = 2048
BAND_POINTS = 9
FAILURE_FRACTION = 0.01


def xi_half_width(reynolds: float) -> float:
    return 2.0 * (1.0 + math.sqrt(reynolds))


def k_range(reynolds: float) -> range:
    """Integer wavenumbers ``1 <= k <= sqrt(R / sqrt(2))``."""
    return range(1, int(math.floor(math.sqrt(reynolds / math.sqrt(2.0)) + 1e-12)) + 1)


def mesh_for_reynolds(reynolds: float, base_points: int, half_width: Optional[float] = None) -> np.ndarray:
    """Uniform xi lattice with ``base_points * ceil(1 + sqrt(R)/10)`` points (at most 2048)."""
    if base_points < 3:
        raise ValueError(f"base_points must be at least 3, got {base_points}")
    a = xi_half_width(reynolds) if half_width is None else half_width
    count = min(base_points * math.ceil(1.0 + math.sqrt(reynolds) / 10.0), MAX_LATTICE)
    xi = np.linspace(-a, a, count)
    xi[0], xi[-1] = -a, a
    return xi


def nodes_for_reynolds(reynolds: float) -> int:
    if reynolds <= 1000:
        return 64
    if reynolds <= 4000:
        return 96
    return 128


@dataclass(frozen=True)
class SweepSpec:
    reynolds_list: Tuple[float, ...]
    xi_points_per_r: int = 8
    target: str = "delta1"
    rel_tol: float = 1e-6
    n_nodes: Optional[int] = None
    refine: bool = True
    k_max: Optional[int] = None
    xi_values: Optional[Tuple[float, ...]] = None
    workers: Optional[int] = None

    def __post_init__(self):
        rs = tuple(float(r) for r in self.reynolds_list)
        object.__setattr__(self, "reynolds_list", rs)
        if not rs:
            raise ValueError("reynolds_list is empty")
        if any(r <= 0 for r in rs):
            raise ValueError("Reynolds numbers must be positive")
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValueError("reynolds_list must be strictly increasing")
        if self.xi_points_per_r < 3:
            raise ValueError("xi_points_per_r must be at least 3")
        if self.target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.xi_values is not None:
            object.__setattr__(self, "xi_values", tuple(float(x) for x in self.xi_values))

    def grid_for(self, reynolds: float) -> SpectralGrid:
        return build_grid(self.n_nodes or nodes_for_reynolds(reynolds))

    def lattice(self, reynolds: float, half_width: Optional[float] = None) -> np.ndarray:
        if self.xi_values is not None:
            return np.array(self.xi_values)
        return mesh_for_reynolds(reynolds, self.xi_points_per_r, half_width)


@dataclass
class SweepResult:
    reynolds: float
    target: str
    max_k2_norm_sq: float
    max_dnorm_sq: float
    argmax_k2: Optional[Tuple[int, float]]
    argmax_dnorm: Optional[Tuple[int, float]]
    points_evaluated: int
    refine_evaluations: int
    n_nodes: int
    skipped: bool = False
    failures: List[Tuple[int, float, str]] = field(default_factory=list)
    converged_k2: Optional[float] = None
    converged_dnorm: Optional[float] = None


@dataclass
class ResolventSweepResult:
    reynolds: float
    sup_norm: float
    argmax_xi: float
    argmax_k: int
    region_sup: float
    theorem1_max_ratio: float
    points_evaluated: int
    refine_evaluations: int
    n_nodes: int
    k_max: int
    truncated: bool
    failures: List[Tuple[int, float, str]] = field(default_factory=list)
    converged_sup: Optional[float] = None

    @property
    def full_sup(self) -> float:
        return max(self.sup_norm, self.region_sup)

    @property
    def argmax_s(self) -> complex:
        return 1j * self.argmax_xi


def delta_norms(k: int, xi: float, reynolds: float, grid: SpectralGrid):
    """``((k^2||d1||^2, ||d1'||^2), (k^2||d2||^2, ||d2'||^2))`` at ``s = i xi``."""
    ops = assemble_operators(ModeParams.imaginary(k, xi, reynolds), grid)
    system = ClampedSystem(ops)
    n = grid.n_nodes
    B = np.zeros((n, 2), dtype=complex)
    B[1, 0] = 1.0
    B[n - 2, 1] = 1.0
    X = system.solve_raw(B)
    w = grid.quad_weights
    dX = grid.D(1) @ X
    out = []
    for j in range(2):
        out.append((k**2 * float(np.sum(w * np.abs(X[:, j]) ** 2)),
                    float(np.sum(w * np.abs(dX[:, j]) ** 2))))
    return tuple(out)


class _ModeScan:
    """Evaluations of one wavenumber's response along xi, with memoization."""

    def __init__(self, func, n_outputs: int, bounds: Tuple[float, float]):
        self.func = func
        self.n_outputs = n_outputs
        self.lo, self.hi = bounds
        self.cache = {}
        self.failures = []

    def __call__(self, xi: float):
        xi = float(xi)
        if xi not in self.cache:
            try:
                self.cache[xi] = tuple(self.func(xi))
            except CouetteError as exc:
                self.failures.append((xi, f"{type(exc).__name__}: {exc}"))
                self.cache[xi] = (-np.inf,) * self.n_outputs
        return self.cache[xi]

    def scan(self, xs: Sequence[float]):
        return [self(x) for x in xs]

    def best(self, q: int, xs: Sequence[float]) -> Tuple[float, float]:
        vals = [self(x)[q] for x in xs]
        i = int(np.argmax(vals))
        return vals[i], float(xs[i])

    def polish(self, q: int, candidates: np.ndarray) -> Tuple[float, float]:
        """Bounded maximization of output ``q`` between the best candidate's neighbours."""
        vals = np.array([self(x)[q] for x in candidates])
        i = int(np.argmax(vals))
        lo = candidates[max(i - 1, 0)]
        hi = candidates[min(i + 1, len(candidates) - 1)]
        best_val, best_xi = float(vals[i]), float(candidates[i])
        if hi > lo:
            tol = 1e-7 * (1.0 + abs(self.hi - self.lo))
            res = minimize_scalar(lambda x: -self(x)[q], bounds=(lo, hi), method="bounded",
                                  options={"xatol": tol, "maxiter": 200})
            if -res.fun > best_val:
                best_val, best_xi = float(-res.fun), float(res.x)
        return best_val, best_xi


def _band(k: int, lo: float, hi: float) -> np.ndarray:
    band = -abs(k) * np.linspace(0.0, 1.0, BAND_POINTS) if k else np.array([0.0])
    return band[(band >= lo) & (band <= hi)]


def _check_failures(failures, total: int, reynolds: float):
    if total and len(failures) > FAILURE_FRACTION * total:
        raise SweepFailure(
            f"R={reynolds}: {len(failures)} of {total} lattice points failed", failures
        )


def run_delta_sweep(spec: SweepSpec, which: Optional[str] = None) -> List[SweepResult]:
    which = which or spec.target
    if which not in ("delta1", "delta2"):
        raise ValueError(f"which must be 'delta1' or 'delta2', got {which!r}")
    j = 0 if which == "delta1" else 1
    results = []
    for R in spec.reynolds_list:
        grid = spec.grid_for(R)
        ks = list(k_range(R))
        if not ks:
            results.append(SweepResult(R, which, float("nan"), float("nan"), None, None,
                                       0, 0, grid.n_nodes, skipped=True))
            continue
        xi = spec.lattice(R)
        a = xi_half_width(R)

        def work(k, R=R, grid=grid, xi=xi, a=a):
            scan = _ModeScan(lambda x: delta_norms(k, x, R, grid)[j], 2, (-a, a))
            scan.scan(xi)
            lattice_best = [scan.best(q, xi) for q in range(2)]
            n_lattice = len(scan.cache)
            if spec.refine:
                cand = np.unique(np.concatenate([xi, _band(k, xi.min(), xi.max())]))
                best = [scan.polish(q, cand) for q in range(2)]
            else:
                best = lattice_best
            return k, best, n_lattice, len(scan.cache) - n_lattice, scan.failures

        per_k = ordered_map(work, ks, spec.workers)
        failures = [(k, x, msg) for k, _, _, _, fl in per_k for x, msg in fl]
        _check_failures(failures, len(ks) * len(xi), R)
        top = []
        for q in range(2):
            k_best, (val, x_best) = max(((k, b[q]) for k, b, *_ in per_k), key=lambda t: t[1][0])
            top.append((val, (k_best, x_best)))
        res = SweepResult(
            reynolds=R, target=which,
            max_k2_norm_sq=top[0][0], max_dnorm_sq=top[1][0],
            argmax_k2=top[0][1], argmax_dnorm=top[1][1],
            points_evaluated=sum(n for _, _, n, _, _ in per_k),
            refine_evaluations=sum(n for _, _, _, n, _ in per_k),
            n_nodes=grid.n_nodes, failures=failures,
        )
        _confirm_delta(res, j, spec.rel_tol)
        results.append(res)
    return results


def _confirm_delta(res: SweepResult, j: int, rel_tol: float):
    """Re-solve the two maximizers with grid refinement and record the converged values."""
    bc = DELTA1_BC if j == 0 else DELTA2_BC
    levels = [n for n in (64, 96, 128, 192, 256) if n >= res.n_nodes] or [res.n_nodes]
    if len(levels) < 2:
        levels = [res.n_nodes, int(1.5 * res.n_nodes)]
    for attr, (k, xi), pick in (
        ("converged_k2", res.argmax_k2, lambda s, k: k**2 * s.norms.norm_sq),
        ("converged_dnorm", res.argmax_dnorm, lambda s, k: s.norms.dnorm_sq),
    ):
        try:
            sol = refine_until_converged(
                ProblemSpec(ModeParams.imaginary(k, xi, res.reynolds), bc=bc), max(rel_tol, 1e-9), levels
            )
            setattr(res, attr, pick(sol, k))
        except CouetteError:
            setattr(res, attr, None)


def run_resolvent_sweep(spec: SweepSpec) -> List[ResolventSweepResult]:
    results = []
    for R in spec.reynolds_list:
        grid = spec.grid_for(R)
        k_max = spec.k_max or default_k_max(R)
        threshold = theorem1_threshold(R)
        xi = spec.lattice(R, half_width=threshold)
        # gain(-k, i xi) == gain(k, -i xi): k >= 0 on the mirrored lattice covers all modes
        xi = np.unique(np.concatenate([xi, -xi]))

        def work(k, R=R, grid=grid, xi=xi):
            scan = _ModeScan(lambda x: (mode_gain(ModeParams.imaginary(k, x, R), grid).gain,), 1,
                             (-threshold, threshold))
            scan.scan(xi)
            n_lattice = len(scan.cache)
            if spec.refine:
                cand = np.unique(np.concatenate([xi, _band(k, xi.min(), xi.max())]))
                best = scan.polish(0, cand)
            else:
                best = scan.best(0, xi)
            return k, best, n_lattice, len(scan.cache) - n_lattice, scan.failures

        per_k = ordered_map(work, range(0, k_max + 1), spec.workers)
        failures = [(k, x, msg) for k, _, _, _, fl in per_k for x, msg in fl]
        _check_failures(failures, (k_max + 1) * len(xi), R)
        k_best, (sup, xi_best) = max(((k, b) for k, b, *_ in per_k), key=lambda t: t[1][0])

        region_sup, ratio = 0.0, 0.0
        for s in theorem1_samples(R):
            # far from the axis the largest gains sit at resonant high k but stay small
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationWarning)
                rep = global_norm(ResolventQuery(s, R, k_max, grid.n_nodes), spec.workers)
            region_sup = max(region_sup, rep.norm)
            ratio = max(ratio, rep.norm**2 / theorem1_bound(s, R))

        res = ResolventSweepResult(
            reynolds=R, sup_norm=sup, argmax_xi=xi_best, argmax_k=k_best,
            region_sup=region_sup, theorem1_max_ratio=ratio,
            points_evaluated=sum(n for _, _, n, _, _ in per_k),
            refine_evaluations=sum(n for _, _, _, n, _ in per_k),
            n_nodes=grid.n_nodes, k_max=k_max, truncated=k_best == k_max, failures=failures,
        )
        fine = build_grid(int(round(1.5 * grid.n_nodes)))
        res.converged_sup = mode_gain(ModeParams.imaginary(k_best, xi_best, R), fine).gain
        results.append(res)
    return results


def theorem1_samples(reynolds: float, count: int = 12) -> List[complex]:
    """Points on and beyond the circle ``|s| = 2 sqrt(2) (1 + sqrt(R))`` with ``Re s >= 0``.

    Half lie on the circle at angles spread over [-pi/2, pi/2]; the rest on the
    imaginary axis and the positive real axis at 1.5x and 3x the radius.
    """
    r0 = theorem1_threshold(reynolds)
    n_circle = count // 2
    angles = np.linspace(-np.pi / 2, np.pi / 2, n_circle)
    pts = [r0 * complex(math.cos(t), math.sin(t)) for t in angles]
    extra = []
    for scale in (1.5, 3.0):
        extra += [1j * scale * r0, -1j * scale * r0, complex(scale * r0, 0.0)]
    pts += extra[: count - n_circle]
    # exactly on the circle: cos(pi/2) is 6e-17, not 0
    return [complex(max(p.real, 0.0), p.imag) for p in pts]


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
