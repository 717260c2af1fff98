"""Resolvent norms and spectra of the linearized Couette operator, mode by mode.

The resolvent is block diagonal in the streamwise wavenumber, so its norm is
the supremum of per-mode gains.  For ``k != 0`` a divergence-free forcing is
written through a potential ``chi`` vanishing at the walls (``F = chi'``,
``G = -i k chi``); both its energy and the response energy then take the form
``||f'||^2 + k^2 ||f||^2``.  For ``k = 0`` only ``F`` drives the flow and the
response energy is ``||psi'||^2``.

The gain is the exact induced 2-norm of the discrete map between those
energy spaces: Cholesky factors of the quadrature Gram matrices turn it into a
plain largest singular value.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cholesky, eig, solve_triangular, svdvals

from .bvp import ClampedSystem
from .errors import IndefiniteGramError, TruncationWarning, UnresolvedSpectrumWarning
from .grid import SpectralGrid, build_grid
from .operators import ModeParams, assemble_operators
from .parallel import ordered_map

THEOREM1_SLACK = 5e-2
SPECTRUM_SHIFT_TOL = 1e-4


def theorem1_threshold(reynolds: float) -> float:
    return 2.0 * math.sqrt(2.0) * (1.0 + math.sqrt(reynolds))


def theorem1_bound(s: complex, reynolds: float) -> Optional[float]:
    """Analytic bound on the squared resolvent norm, or None outside its region."""
    r = abs(s)
    threshold = theorem1_threshold(reynolds)
    if r < threshold * (1.0 - 1e-14):
        return None
    return min(1.0, 8.0 * (1.0 + math.sqrt(reynolds)) ** 2 / r**2)


def default_k_max(reynolds: float) -> int:
    return math.ceil(math.sqrt(reynolds / math.sqrt(2.0))) + 5


@dataclass(frozen=True)
class ModeNormReport:
    k: int
    s: complex
    reynolds: float
    gain: float
    theorem1_bound: Optional[float]
    within_bound: Optional[bool]
    n_nodes: int


def _cholesky(gram: np.ndarray, what: str) -> np.ndarray:
    try:
        return cholesky(gram, lower=False, check_finite=False)
    except LinAlgError as exc:
        raise IndefiniteGramError(f"{what} Gram matrix is not positive definite") from exc


def energy_factors(k: int, grid: SpectralGrid):
    """Upper Cholesky factor of ``||f'||^2 + k^2 ||f||^2`` on interior values.

    Interior values determine ``f`` once ``f(0) = f(1) = 0``.
    """
    W = grid.quad_weights
    D1 = grid.D(1)[:, 1:-1]
    gram = D1.T @ (W[:, None] * D1) + k**2 * np.diag(W[1:-1])
    return _cholesky(gram, "energy")


def solution_operator(params: ModeParams, grid: SpectralGrid, system: Optional[ClampedSystem] = None):
    """Matrix taking forcing coordinates to interior stream-function values.

    Forcing coordinates are interior ``chi`` values for ``k != 0`` and nodal
    ``F`` values for ``k = 0``.
    """
    ops = assemble_operators(params, grid)
    system = system or ClampedSystem(ops)
    n = grid.n_nodes
    if params.k == 0:
        rhs = grid.D(1).astype(complex)
    else:
        rhs = np.array(ops.t0_matrix[:, 1:-1], dtype=complex)
    rhs[[0, 1, n - 2, n - 1]] = 0.0
    return system.solve_raw(rhs)[1:-1]


def mode_gain(params: ModeParams, grid: SpectralGrid) -> ModeNormReport:
    if params.s.real < 0:
        raise ValueError(f"resolvent gains are evaluated for Re s >= 0, got s={params.s}")
    psi = solution_operator(params, grid)
    out = energy_factors(params.k, grid)
    if params.k == 0:
        w = grid.quad_weights
        if np.any(w <= 0):
            raise IndefiniteGramError("quadrature weights must be positive")
        X = (out @ psi) / np.sqrt(w)[None, :]
    else:
        X = solve_triangular(out, (out @ psi).T, trans="T", lower=False).T
    gain = float(svdvals(X, check_finite=False)[0])
    bound = theorem1_bound(params.s, params.reynolds)
    within = None if bound is None else gain**2 <= bound * (1.0 + THEOREM1_SLACK)
    return ModeNormReport(params.k, params.s, params.reynolds, gain, bound, within, grid.n_nodes)


@dataclass(frozen=True)
class ResolventQuery:
    s: complex
    reynolds: float
    k_max: int
    n_nodes: int = 96

    def __post_init__(self):
        if complex(self.s).real < 0:
            raise ValueError("query requires Re s >= 0")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if not self.reynolds > 0:
            raise ValueError("Reynolds number must be positive")


@dataclass(frozen=True)
class GlobalNormReport:
    s: complex
    reynolds: float
    norm: float
    argmax_k: int
    truncated: bool
    modes: tuple

    def __float__(self):
        return self.norm


def global_norm(query: ResolventQuery, workers: Optional[int] = None) -> GlobalNormReport:
    """Supremum of the mode gains over ``|k| <= k_max``, including ``k = 0``."""
    grid = build_grid(query.n_nodes)
    ks = range(-query.k_max, query.k_max + 1)
    modes = ordered_map(lambda k: mode_gain(ModeParams(k, query.s, query.reynolds), grid), ks, workers)
    best = max(modes, key=lambda m: m.gain)
    truncated = abs(best.k) == query.k_max
    if truncated:
        warnings.warn(
            f"largest gain at |k| = k_max = {query.k_max}; widen the mode range",
            TruncationWarning,
            stacklevel=2,
        )
    return GlobalNormReport(query.s, query.reynolds, best.gain, best.k, truncated, tuple(modes))


@dataclass(frozen=True)
class SpectrumReport:
    k: int
    reynolds: float
    rightmost_eig: complex
    all_eigs_stable: bool
    n_nodes: int
    refinement_shift: Optional[float] = None


def mode_spectrum(k: int, reynolds: float, grid: SpectralGrid) -> np.ndarray:
    """Finite eigenvalues ``s`` of ``T(s) T0 psi = 0`` with clamped walls.

    Recast as ``A psi = s B psi`` with ``A = (T + s) T0`` and ``B = T0``; the
    four boundary rows of B are zero, so they only contribute infinite
    eigenvalues.  Eigenvalues above ``10 N^2`` in modulus are discarded as
    discretization artifacts.
    """
    n = grid.n_nodes
    ops = assemble_operators(ModeParams(k, 0.0, reynolds), grid)
    A = np.array(ops.tt0_matrix, dtype=complex)
    B = np.array(ops.t0_matrix, dtype=complex)
    eye = np.eye(n)
    D1 = grid.D(1)
    for row, values in ((0, eye[0]), (n - 1, eye[n - 1]), (1, D1[0]), (n - 2, D1[n - 1])):
        A[row] = values
        B[row] = 0.0
    lam = eig(A, B, right=False, check_finite=False)
    lam = lam[np.isfinite(lam)]
    return lam[np.abs(lam) < 10.0 * (n - 1) ** 2]


def _rightmost(lam: np.ndarray) -> complex:
    top = lam.real.max()
    # mirrored pairs share a real part; take the larger imaginary part for a stable pick
    near = lam[lam.real >= top - 1e-10 * max(1.0, abs(top))]
    return complex(near[np.argmax(near.imag)])


def rightmost_eigenvalue(k: int, reynolds: float, grid: SpectralGrid,
                         check_refinement: bool = True) -> SpectrumReport:
    lam = mode_spectrum(k, reynolds, grid)
    if lam.size == 0:
        raise ArithmeticError(f"no finite eigenvalues survived filtering at n_nodes={grid.n_nodes}")
    best = _rightmost(lam)
    shift = None
    if check_refinement:
        fine = mode_spectrum(k, reynolds, build_grid(int(round(1.5 * grid.n_nodes))))
        nearest = fine[np.argmin(np.abs(fine - best))]
        shift = float(abs(nearest - best) / abs(best))
        if shift > SPECTRUM_SHIFT_TOL:
            warnings.warn(
                f"rightmost eigenvalue moved by {shift:.1e} (relative) under refinement",
                UnresolvedSpectrumWarning,
                stacklevel=2,
            )
    return SpectrumReport(k, float(reynolds), best, bool(best.real < 0), grid.n_nodes, shift)

