"""Verification suites: each runs one acceptance check and reports its margin.

``run_suites`` is what ``couette verify`` executes; the test suite calls the
same functions.  Every suite compares one measured number against one
threshold, and ``tol_scale`` multiplies the threshold (``tol_scale=0`` makes
every suite fail, which is how the harness itself is smoke-tested).
"""
from __future__ import annotations

import inspect
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .bvp import ClampedSystem, decompose, solve_clamped
from .errors import TruncationWarning
from .grid import build_grid, l2_norm_sq
from .operators import ModeParams, assemble_operators, build_scalar_forcing, divergence_free_forcing
from .presets import F_ONLY_PRESETS, get_preset
from .resolvent import (
    ResolventQuery,
    default_k_max,
    global_norm,
    rightmost_eigenvalue,
    theorem1_bound,
)
from .sweep import (
    SweepSpec,
    k_range,
    loglog_slope,
    nodes_for_reynolds,
    run_delta_sweep,
    run_resolvent_sweep,
    theorem1_samples,
)


@dataclass
class SuiteResult:
    name: str
    criterion: int
    passed: bool
    measured: float
    threshold: float
    elapsed: float
    budget: float
    detail: str = ""
    data: Dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] C{self.criterion} {self.name}: measured {self.measured:.4g} "
                f"vs threshold {self.threshold:.4g}; {self.elapsed:.1f}s of {self.budget:.0f}s"
                + (f"; {self.detail}" if self.detail else ""))


def _finish(name, criterion, measured, threshold, start, budget, detail="", data=None,
            extra_ok=True) -> SuiteResult:
    elapsed = time.perf_counter() - start
    ok = bool(extra_ok and measured <= threshold and elapsed <= budget)
    return SuiteResult(name, criterion, ok, float(measured), float(threshold), elapsed, budget,
                       detail, data or {})


def _random_mode(rng, r_range):
    lo, hi = np.log10(r_range[0]), np.log10(r_range[1])
    R = float(10 ** rng.uniform(lo, hi))
    xi = float(rng.uniform(-1, 1) * 2 * (1 + math.sqrt(R)))
    return R, xi


def suite_mms(tol_scale=1.0, seed=0, samples=20) -> SuiteResult:
    """Manufactured solution ``y^2 (1-y)^2 (1 + i y)`` recovered at 64 nodes."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    grid = build_grid(64)
    exact = grid.sample(lambda y: y**2 * (1 - y) ** 2 * (1 + 1j * y))
    worst = 0.0
    for _ in range(samples):
        R, xi = _random_mode(rng, (1.0, 1e4))
        k = int(rng.integers(-30, 31))
        ops = assemble_operators(ModeParams.imaginary(k, xi, R), grid)
        rhs = grid.function(ops.tt0_matrix @ exact.values)
        sol = solve_clamped(ops, rhs)
        err = np.max(np.abs(sol.psi.values - exact.values)) / exact.max_abs()
        worst = max(worst, err)
    return _finish("manufactured-solution", 1, worst, 1e-8 * tol_scale, start, 10,
                   f"{samples} random (k, xi, R)")


def random_potential(grid, rng, degree=6):
    coef = rng.normal(size=degree) + 1j * rng.normal(size=degree)
    y = grid.nodes
    return grid.function(y * (1 - y) * cheb.chebval(2 * y - 1, coef))


def suite_decomposition(tol_scale=1.0, seed=1, samples=50) -> SuiteResult:
    """``psi = g - alpha delta1 - beta delta2`` against the direct clamped solve."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        R, xi = _random_mode(rng, (10.0, 2000.0))
        k = int(rng.integers(1, k_range(R).stop))
        grid = build_grid(nodes_for_reynolds(R))
        ops = assemble_operators(ModeParams.imaginary(k, xi, R), grid)
        forcing = divergence_free_forcing(random_potential(grid, rng), k)
        rhs = build_scalar_forcing(forcing, k, grid)
        direct = solve_clamped(ops, rhs).psi
        rebuilt = decompose(ops, rhs).psi_reconstructed
        err = math.sqrt(l2_norm_sq(direct - rebuilt) / l2_norm_sq(direct))
        worst = max(worst, err)
    return _finish("decomposition-identity", 2, worst, 1e-6 * tol_scale, start, 60,
                   f"{samples} divergence-free forcings")


def suite_theorem1(tol_scale=1.0, reynolds=(10.0, 100.0, 1000.0), n_nodes=96) -> SuiteResult:
    """Squared global norm over the bound, on and beyond the threshold circle."""
    start = time.perf_counter()
    worst, worst_sq = 0.0, 0.0
    for R in reynolds:
        k_max = default_k_max(R)
        for s in theorem1_samples(R, 12):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationWarning)
                rep = global_norm(ResolventQuery(s, R, k_max, n_nodes))
            worst = max(worst, rep.norm**2 / theorem1_bound(s, R))
            worst_sq = max(worst_sq, rep.norm**2)
    return _finish("theorem1-region", 3, worst, 1.05 * tol_scale, start, 300,
                   f"max squared norm {worst_sq:.3g}",
                   extra_ok=worst_sq <= 1.05 * tol_scale)


def delta_maxima(reynolds, xi_points=8, n_nodes=None) -> Dict[str, List]:
    out = {}
    for which in ("delta1", "delta2"):
        spec = SweepSpec(tuple(reynolds), xi_points_per_r=xi_points, target=which, n_nodes=n_nodes)
        out[which] = run_delta_sweep(spec)
    return out


def suite_delta_envelope(tol_scale=1.0, reynolds=(1.0, 10.0, 100.0, 1000.0)) -> SuiteResult:
    """Largest ``k^2||delta_j||^2`` and ``||delta_j'||^2`` over the sweep lattice."""
    start = time.perf_counter()
    sweeps = delta_maxima(reynolds)
    worst, where = 0.0, ""
    for which, results in sweeps.items():
        for r in results:
            if r.skipped:
                continue
            for label, v in (("k2norm", r.max_k2_norm_sq), ("dnorm", r.max_dnorm_sq)):
                if v > worst:
                    worst, where = v, f"{which} {label} at R={r.reynolds:g}"
    return _finish("delta-envelope", 4, worst, 1.05 * tol_scale, start, 900, where)


def _smooth_profile(rng):
    a = rng.normal(size=4) + 1j * rng.normal(size=4)
    return lambda y: (a[0] * np.sin(np.pi * y) + a[1] * np.cos(2 * np.pi * y)
                      + a[2] * y**2 + a[3] * np.exp(-y))


def suite_large_k(tol_scale=1.0, seed=5, samples=20, n_nodes=96) -> SuiteResult:
    """Explicit large-|k| bounds for the F- and G-driven parts of the solution."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    grid = build_grid(n_nodes)
    worst = 0.0
    for _ in range(samples):
        R = float(10 ** rng.uniform(0, 3.3))
        k_min = int(math.floor(math.sqrt(R / math.sqrt(2)))) + 1
        k = int(rng.integers(k_min, k_min + 25)) * int(rng.choice([-1, 1]))
        s = complex(rng.uniform(0, 1), rng.uniform(-1, 1) * 3 * (1 + math.sqrt(R)))
        system = ClampedSystem(assemble_operators(ModeParams(k, s, R), grid))
        F = grid.sample(_smooth_profile(rng))
        G = grid.sample(_smooth_profile(rng))
        f_sq, g_sq = l2_norm_sq(F), l2_norm_sq(G)
        p1 = system.solution(grid.D(1) @ F.values).norms
        p2 = system.solution(-1j * k * G.values).norms
        ratios = (
            k**4 * p1.dnorm_sq / (R**2 * f_sq),
            k**6 * p1.norm_sq / (2 * R**2 * f_sq),
            k**2 * p1.d2norm_sq / (R**2 * f_sq),
            k**6 * p2.norm_sq / (4 * R**2 * g_sq),
            k**4 * p2.dnorm_sq / (2 * R**2 * g_sq),
            k**2 * p2.d2norm_sq / (2 * R**2 * g_sq),
        )
        worst = max(worst, max(ratios))
    return _finish("large-k-estimates", 5, worst, 1.01 * tol_scale, start, 30,
                   "max ratio to the six explicit bounds")


def suite_k0(tol_scale=1.0, reynolds=(10.0, 100.0, 1000.0), xis=(0.0, 1.0, -5.0),
             n_nodes=96) -> SuiteResult:
    """``||psi||^2 <= R^2/pi^6 ||F||^2`` for the k = 0 problem."""
    start = time.perf_counter()
    grid = build_grid(n_nodes)
    worst = 0.0
    for R in reynolds:
        for xi in xis:
            ops = assemble_operators(ModeParams.imaginary(0, xi, R), grid)
            for name in F_ONLY_PRESETS:
                forcing = get_preset(name)
                params = ops.params
                sol = solve_clamped(ops, forcing.scalar(grid, params))
                f_sq = forcing.mode(grid).norm_sq
                worst = max(worst, sol.norms.norm_sq / (R**2 / math.pi**6 * f_sq))
    return _finish("k0-estimate", 6, worst, 1.0 * tol_scale, start, 10,
                   f"{len(F_ONLY_PRESETS)} presets x {len(xis)} xi")


def suite_resolvent_scaling(tol_scale=1.0, reynolds=(100.0, 200.0, 400.0, 800.0)) -> SuiteResult:
    """Log-log slope of the sup over s = i xi of the resolvent norm against R."""
    start = time.perf_counter()
    results = run_resolvent_sweep(SweepSpec(tuple(reynolds), target="resolvent"))
    sups = [r.sup_norm for r in results]
    slope = loglog_slope(reynolds, sups)
    detail = "slope %.4f; sups %s" % (slope, ", ".join(f"{v:.4g}" for v in sups))
    return _finish("resolvent-proportional-to-R", 7, abs(slope - 1.0), 0.2 * tol_scale, start,
                   600, detail, {"slope": slope, "sups": sups})


def suite_spectral_gap(tol_scale=1.0, reynolds=(250.0, 500.0, 1000.0, 2000.0), k=1,
                      n_nodes=96) -> SuiteResult:
    """Rightmost eigenvalue at k = 1: stable, and |Re lambda| R nearly constant."""
    start = time.perf_counter()
    grid = build_grid(n_nodes)
    reports = [rightmost_eigenvalue(k, R, grid) for R in reynolds]
    products = np.array([abs(r.rightmost_eig.real) * r.reynolds for r in reports])
    spread = float(np.max(np.abs(products - products.mean())) / products.mean())
    stable = all(r.all_eigs_stable for r in reports)
    detail = "stable=%s; |Re lambda| R = %s" % (stable, ", ".join(f"{p:.4g}" for p in products))
    return _finish("spectral-gap", 8, spread, 0.25 * tol_scale, start, 120, detail,
                   {"products": products.tolist(), "stable": stable}, extra_ok=stable)


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b))


def suite_mesh_robustness(tol_scale=1.0) -> SuiteResult:
    """Criteria 3, 4 and 7 maxima under doubled nodes and doubled xi density."""
    start = time.perf_counter()
    changes = {}

    def theorem1_max(n):
        R = 100.0
        k_max = default_k_max(R)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            return max(global_norm(ResolventQuery(s, R, k_max, n)).norm ** 2
                       for s in theorem1_samples(R, 12))

    changes["theorem1 R=100"] = _rel(theorem1_max(96), theorem1_max(192))

    coarse = delta_maxima((100.0,), xi_points=8, n_nodes=64)
    fine = delta_maxima((100.0,), xi_points=16, n_nodes=128)
    for which in ("delta1", "delta2"):
        a, b = coarse[which][0], fine[which][0]
        changes[f"{which} k2norm R=100"] = _rel(a.max_k2_norm_sq, b.max_k2_norm_sq)
        changes[f"{which} dnorm R=100"] = _rel(a.max_dnorm_sq, b.max_dnorm_sq)

    r_coarse = run_resolvent_sweep(SweepSpec((200.0,), 8, "resolvent", n_nodes=64))[0]
    r_fine = run_resolvent_sweep(SweepSpec((200.0,), 16, "resolvent", n_nodes=128))[0]
    changes["resolvent sup R=200"] = _rel(r_coarse.sup_norm, r_fine.sup_norm)

    worst_key = max(changes, key=changes.get)
    return _finish("mesh-robustness", 9, changes[worst_key], 1e-2 * tol_scale, start, 600,
                   f"largest change: {worst_key}", {"changes": changes})


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    "mms": suite_mms,
    "decomposition": suite_decomposition,
    "theorem1": suite_theorem1,
    "delta-envelope": suite_delta_envelope,
    "large-k": suite_large_k,
    "k0": suite_k0,
    "resolvent-scaling": suite_resolvent_scaling,
    "spectral-gap": suite_spectral_gap,
    "mesh-robustness": suite_mesh_robustness,
}

QUICK_OVERRIDES = {
    "mms": {"samples": 5},
    "decomposition": {"samples": 10},
    "theorem1": {"reynolds": (10.0, 100.0)},
    "delta-envelope": {"reynolds": (1.0, 10.0, 100.0)},
    "large-k": {"samples": 5},
    "k0": {"reynolds": (10.0, 100.0)},
    "resolvent-scaling": {"reynolds": (100.0, 200.0, 400.0)},
    "spectral-gap": {"reynolds": (250.0, 500.0)},
}


def run_suites(names: Optional[Sequence[str]] = None, scale: str = "desk", tol_scale: float = 1.0,
               seed: Optional[int] = None,
               echo: Optional[Callable[[str], None]] = print) -> List[SuiteResult]:
    names = list(names) if names else list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites {unknown}; choose from {list(SUITES)}")
    results = []
    for name in names:
        if scale not in ("desk", "quick"):
            raise ValueError(f"scale must be 'desk' or 'quick', got {scale!r}")
        kwargs = dict(QUICK_OVERRIDES.get(name, {})) if scale == "quick" else {}
        if seed is not None and "seed" in inspect.signature(SUITES[name]).parameters:
            kwargs["seed"] = seed
        res = SUITES[name](tol_scale=tol_scale, **kwargs)
        if echo:
            echo(res.line())
        results.append(res)
    return results
