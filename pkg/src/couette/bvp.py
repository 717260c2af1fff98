"""Boundary-value solvers for the stream-function problem.

Three problems share the same discrete operator ``T T0``:

* the clamped problem ``T T0 psi = I`` with ``psi = psi' = 0`` at both walls;
* the cascade ``T h = I``, ``T0 g = h`` with Dirichlet data, from which
  ``alpha = g'(0)`` and ``beta = g'(1)``;
* the homogeneous problem ``T T0 delta = 0`` with prescribed wall values and
  slopes (``delta1``: slope 1 at y=0, ``delta2``: slope 1 at y=1).

Boundary conditions are imposed by bordering: rows 0 and n-1 carry the wall
values, rows 1 and n-2 the wall slopes.  Every row of the bordered matrix is
scaled to unit max-norm before the LU factorization, which keeps fourth-order
collocation usable at a few hundred nodes.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.linalg import lapack, lu_factor, lu_solve

from .errors import (
    ConditionWarning,
    GridMismatchError,
    MeshTooCoarseError,
    NonConvergenceError,
    SingularOperatorError,
)
from .grid import GridFunction, SpectralGrid, build_grid, l2_norm_sq
from .operators import ModeParams, OperatorSet, assemble_operators

REFINEMENT_LEVELS = (64, 96, 128, 192, 256)
COND_WARN = 1e12
RESIDUAL_RTOL = 1e-8
_RCOND_SINGULAR = 10 * np.finfo(float).eps


class BoundaryData(NamedTuple):
    psi0: complex = 0.0
    psi1: complex = 0.0
    dpsi0: complex = 0.0
    dpsi1: complex = 0.0


CLAMPED = BoundaryData()
DELTA1_BC = BoundaryData(0.0, 0.0, 1.0, 0.0)
DELTA2_BC = BoundaryData(0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class NormTriple:
    norm_sq: float
    dnorm_sq: float
    d2norm_sq: float

    @classmethod
    def of(cls, psi: GridFunction, psi_d1: GridFunction, psi_d2: GridFunction) -> "NormTriple":
        return cls(l2_norm_sq(psi), l2_norm_sq(psi_d1), l2_norm_sq(psi_d2))

    def as_tuple(self) -> tuple:
        return (self.norm_sq, self.dnorm_sq, self.d2norm_sq)

    def rel_change(self, other: "NormTriple") -> float:
        worst = 0.0
        for a, b in zip(self.as_tuple(), other.as_tuple()):
            scale = max(abs(a), abs(b))
            if scale > 0:
                worst = max(worst, abs(a - b) / scale)
        return worst


@dataclass(frozen=True)
class ConvergenceInfo:
    levels: tuple
    norms: tuple
    converged_at: int
    rel_change: float


@dataclass(frozen=True, eq=False)
class BvpSolution:
    psi: GridFunction
    psi_d1: GridFunction
    psi_d2: GridFunction
    params: ModeParams
    residual_max: float
    norms: NormTriple
    rcond: float = float("nan")
    convergence: Optional[ConvergenceInfo] = None

    @property
    def grid(self) -> SpectralGrid:
        return self.psi.grid


@dataclass(frozen=True, eq=False)
class Decomposition:
    h: GridFunction
    g: GridFunction
    alpha: complex
    beta: complex
    params: ModeParams
    delta: Optional[GridFunction] = None
    psi_reconstructed: Optional[GridFunction] = None


def _factor(matrix: np.ndarray, what: str):
    """Row-equilibrate and LU-factor; returns (lu_piv, row_scale, rcond)."""
    scale = 1.0 / np.max(np.abs(matrix), axis=1)
    scaled = matrix * scale[:, None]
    lu_piv = lu_factor(scaled, check_finite=False)
    anorm = np.max(np.sum(np.abs(scaled), axis=0))
    rcond, info = lapack.zgecon(lu_piv[0].astype(complex), anorm, norm="1")
    if info != 0 or not np.isfinite(rcond) or rcond < _RCOND_SINGULAR:
        raise SingularOperatorError(
            f"{what} matrix is numerically singular (rcond={rcond:.2e}); "
            "s is numerically an eigenvalue of the discrete operator",
            rcond=float(rcond),
        )
    if 1.0 / rcond > COND_WARN:
        warnings.warn(
            f"{what} matrix condition estimate {1.0 / rcond:.2e} exceeds {COND_WARN:.0e}",
            ConditionWarning,
            stacklevel=3,
        )
    return lu_piv, scale, float(rcond)


class ClampedSystem:
    """LU factorization of the bordered ``T T0`` operator, reusable across right-hand sides."""

    def __init__(self, ops: OperatorSet):
        self.ops = ops
        grid = ops.grid
        n = grid.n_nodes
        D1 = grid.D(1)
        A = np.array(ops.tt0_matrix, dtype=complex)
        A[0] = 0.0
        A[0, 0] = 1.0
        A[n - 1] = 0.0
        A[n - 1, n - 1] = 1.0
        A[1] = D1[0]
        A[n - 2] = D1[n - 1]
        self.matrix = A
        self.lu, self.scale, self.rcond = _factor(A, "clamped")
        self.interior = slice(2, n - 2)

    def rhs(self, forcing: np.ndarray, bc: BoundaryData = CLAMPED) -> np.ndarray:
        b = np.array(forcing, dtype=complex)
        n = self.ops.grid.n_nodes
        b[0], b[1], b[n - 2], b[n - 1] = bc.psi0, bc.dpsi0, bc.dpsi1, bc.psi1
        return b

    def solve_raw(self, b: np.ndarray) -> np.ndarray:
        """Solve with a fully bordered right-hand side (vector or matrix)."""
        sb = b * (self.scale[:, None] if b.ndim == 2 else self.scale)
        return lu_solve(self.lu, sb, check_finite=False)

    def residual(self, psi: np.ndarray, b: np.ndarray) -> float:
        r = (self.matrix @ psi - b) * self.scale
        return float(np.max(np.abs(r[self.interior]))) if r.size > 4 else 0.0

    def solution(self, forcing: np.ndarray, bc: BoundaryData = CLAMPED,
                 residual_rtol: float = RESIDUAL_RTOL) -> BvpSolution:
        b = self.rhs(forcing, bc)
        psi = self.solve_raw(b)
        res = self.residual(psi, b)
        budget = residual_rtol * (np.max(np.abs(b * self.scale)) + np.max(np.abs(psi)))
        if res > budget:
            raise MeshTooCoarseError(
                f"collocation residual {res:.2e} exceeds {budget:.2e} at "
                f"n_nodes={self.ops.grid.n_nodes}"
            )
        return _package(psi, self.ops, res, self.rcond)


def _package(psi: np.ndarray, ops: OperatorSet, residual: float, rcond: float) -> BvpSolution:
    grid = ops.grid
    f = GridFunction(psi, grid)
    f1 = GridFunction(grid.D(1) @ psi, grid)
    f2 = GridFunction(grid.D(2) @ psi, grid)
    return BvpSolution(
        psi=f, psi_d1=f1, psi_d2=f2, params=ops.params,
        residual_max=residual, norms=NormTriple.of(f, f1, f2), rcond=rcond,
    )


def _check_grid(ops: OperatorSet, f: GridFunction):
    if f.grid.n_nodes != ops.grid.n_nodes:
        raise GridMismatchError(
            f"forcing on {f.grid.n_nodes} nodes, operators on {ops.grid.n_nodes}"
        )


def solve_clamped(ops: OperatorSet, forcing_scalar: GridFunction,
                  residual_rtol: float = RESIDUAL_RTOL) -> BvpSolution:
    """Solve ``T T0 psi = I`` with ``psi = psi' = 0`` at both walls."""
    _check_grid(ops, forcing_scalar)
    return ClampedSystem(ops).solution(forcing_scalar.values, CLAMPED, residual_rtol)


def solve_homogeneous_bc(ops: OperatorSet, bc: BoundaryData,
                         residual_rtol: float = RESIDUAL_RTOL) -> BvpSolution:
    """Solve ``T T0 delta = 0`` with the four prescribed wall values."""
    bc = BoundaryData(*bc)
    zero = np.zeros(ops.grid.n_nodes, dtype=complex)
    return ClampedSystem(ops).solution(zero, bc, residual_rtol)


def solve_delta_pair(ops: OperatorSet, system: Optional[ClampedSystem] = None):
    """``(delta1, delta2)`` from a single factorization."""
    system = system or ClampedSystem(ops)
    n = ops.grid.n_nodes
    B = np.zeros((n, 2), dtype=complex)
    B[1, 0] = 1.0
    B[n - 2, 1] = 1.0
    X = system.solve_raw(B)
    return tuple(
        _package(X[:, j], ops, system.residual(X[:, j], B[:, j]), system.rcond) for j in range(2)
    )


def _dirichlet_solve(A: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    M = np.array(A, dtype=complex)
    n = M.shape[0]
    M[0] = 0.0
    M[0, 0] = 1.0
    M[n - 1] = 0.0
    M[n - 1, n - 1] = 1.0
    b = np.array(rhs, dtype=complex)
    b[0] = b[n - 1] = 0.0
    lu_piv, scale, _ = _factor(M, what)
    return lu_solve(lu_piv, b * scale, check_finite=False)


def solve_cascade(ops: OperatorSet, forcing_scalar: GridFunction) -> Decomposition:
    """Second-order cascade ``T h = I``, ``T0 g = h`` with homogeneous Dirichlet data."""
    _check_grid(ops, forcing_scalar)
    grid = ops.grid
    h = _dirichlet_solve(ops.t_matrix, forcing_scalar.values, "T (h-system)")
    g = _dirichlet_solve(ops.t0_matrix, h, "T0 (g-system)")
    dg = grid.D(1) @ g
    return Decomposition(
        h=GridFunction(h, grid), g=GridFunction(g, grid),
        alpha=complex(dg[0]), beta=complex(dg[-1]), params=ops.params,
    )


def reconstruct(dec: Decomposition, delta1: BvpSolution, delta2: BvpSolution) -> GridFunction:
    """``psi = g - (alpha delta1 + beta delta2)``."""
    for d in (delta1, delta2):
        if d.params != dec.params:
            raise ValueError(f"parameter mismatch: {d.params} vs {dec.params}")
        if d.grid.n_nodes != dec.g.grid.n_nodes:
            raise GridMismatchError("delta solutions and decomposition live on different grids")
    return dec.g - (dec.alpha * delta1.psi + dec.beta * delta2.psi)


def decompose(ops: OperatorSet, forcing_scalar: GridFunction) -> Decomposition:
    """Full pipeline: cascade, the two delta problems, and the reconstruction."""
    dec = solve_cascade(ops, forcing_scalar)
    d1, d2 = solve_delta_pair(ops)
    delta = dec.alpha * d1.psi + dec.beta * d2.psi
    return replace(dec, delta=delta, psi_reconstructed=dec.g - delta)


@dataclass(frozen=True)
class ProblemSpec:
    """A grid-independent description of one boundary-value problem.

    ``forcing`` maps a grid to the scalar right-hand side ``I``; when it is
    None the problem is homogeneous with boundary data ``bc``.
    """

    params: ModeParams
    forcing: Optional[Callable[[SpectralGrid], GridFunction]] = None
    bc: BoundaryData = CLAMPED

    def solve(self, grid: SpectralGrid, residual_rtol: float = RESIDUAL_RTOL) -> BvpSolution:
        ops = assemble_operators(self.params, grid)
        if self.forcing is None:
            return solve_homogeneous_bc(ops, self.bc, residual_rtol)
        rhs = self.forcing(grid).values
        return ClampedSystem(ops).solution(rhs, self.bc, residual_rtol)


def refine_until_converged(problem: ProblemSpec, rel_tol: float = 1e-6,
                           levels: Sequence[int] = REFINEMENT_LEVELS) -> BvpSolution:
    """Re-solve on successively finer grids until the norms settle.

    Stops at the first pair of consecutive levels whose norm triples differ by
    less than ``rel_tol`` (relative, componentwise) and returns the finer
    solution; ``convergence.converged_at`` names the coarser of the two.
    """
    if not rel_tol > 0:
        raise ValueError(f"rel_tol must be positive, got {rel_tol}")
    if len(levels) < 2:
        raise ValueError("need at least two refinement levels")
    used, norms = [], []
    prev = None
    for n in levels:
        sol = problem.solve(build_grid(n))
        used.append(n)
        norms.append(sol.norms)
        if prev is not None:
            change = prev.norms.rel_change(sol.norms)
            if change < rel_tol:
                info = ConvergenceInfo(tuple(used), tuple(norms), used[-2], change)
                return replace(sol, convergence=info)
        prev = sol
    raise NonConvergenceError(
        f"norms still changing by {norms[-2].rel_change(norms[-1]):.2e} at n_nodes={levels[-1]}",
        last_norms=tuple(norms[-2:]),
    )

