"""Per-wavenumber operators for 2-D perturbations of plane Couette flow.

For the Fourier mode ``exp(i k x)`` and Laplace frequency ``s`` the stream
function satisfies ``T T0 psi = I`` with

    T  = (1/R) D^2 - (s + k^2/R + i k y)
    T0 = D^2 - k^2
    I  = F_y - i k G

where (F, G) is the forcing mode.  The multiplication by ``y`` sits to the
left of ``T0`` so the product expands without commutator terms to

    (1/R) psi'''' - (s + 2k^2/R + i k y) psi'' + (s k^2 + k^4/R + i k^3 y) psi.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EndpointError, GridMismatchError
from .grid import GridFunction, SpectralGrid, l2_norm_sq


@dataclass(frozen=True)
class ModeParams:
    k: int
    s: complex
    reynolds: float

    def __post_init__(self):
        if int(self.k) != self.k:
            raise ValueError(f"wavenumber must be an integer, got {self.k}")
        if not self.reynolds > 0:
            raise ValueError(f"Reynolds number must be positive, got {self.reynolds}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "s", complex(self.s))
        object.__setattr__(self, "reynolds", float(self.reynolds))

    @classmethod
    def imaginary(cls, k: int, xi: float, reynolds: float) -> "ModeParams":
        """Mode on the imaginary axis, ``s = i xi``."""
        return cls(k, 1j * xi, reynolds)

    def conjugate(self) -> "ModeParams":
        """Parameters whose solutions are the complex conjugates of ours."""
        return ModeParams(-self.k, np.conj(self.s), self.reynolds)


@dataclass(frozen=True, eq=False)
class OperatorSet:
    t_matrix: np.ndarray
    t0_matrix: np.ndarray
    tt0_matrix: np.ndarray
    params: ModeParams
    grid: SpectralGrid


def assemble_operators(params: ModeParams, grid: SpectralGrid) -> OperatorSet:
    k, s, R = params.k, params.s, params.reynolds
    D2 = grid.D(2)
    eye = np.eye(grid.n_nodes)
    t0 = D2 - k**2 * eye
    t = D2 / R - (s + k**2 / R) * eye - np.diag(1j * k * grid.nodes)
    tt0 = t @ t0
    for a in (t, t0, tt0):
        a.setflags(write=False)
    return OperatorSet(t_matrix=t, t0_matrix=t0, tt0_matrix=tt0, params=params, grid=grid)


def expanded_operator(params: ModeParams, grid: SpectralGrid) -> np.ndarray:
    """The fourth-order operator written out term by term (used as a cross-check)."""
    k, s, R = params.k, params.s, params.reynolds
    y = grid.nodes
    return (
        grid.D(4) / R
        - np.diag(s + 2 * k**2 / R + 1j * k * y) @ grid.D(2)
        + np.diag(s * k**2 + k**4 / R + 1j * k**3 * y)
    )


@dataclass(frozen=True, eq=False)
class ForcingMode:
    f_hat: GridFunction
    g_hat: GridFunction
    norm_sq: float = field(init=False)

    def __post_init__(self):
        self.f_hat._check(self.g_hat)
        object.__setattr__(self, "norm_sq", l2_norm_sq(self.f_hat) + l2_norm_sq(self.g_hat))

    @property
    def grid(self) -> SpectralGrid:
        return self.f_hat.grid


def build_scalar_forcing(forcing: ForcingMode, k: int, grid: SpectralGrid) -> GridFunction:
    """Right-hand side ``I = F_y - i k G`` of the stream-function equation."""
    if forcing.grid.n_nodes != grid.n_nodes:
        raise GridMismatchError(
            f"forcing lives on {forcing.grid.n_nodes} nodes, grid has {grid.n_nodes}"
        )
    values = grid.D(1) @ forcing.f_hat.values - 1j * k * forcing.g_hat.values
    return GridFunction(values, grid)


def divergence_free_forcing(potential: GridFunction, k: int) -> ForcingMode:
    """Forcing ``F = chi'``, ``G = -i k chi`` from a potential vanishing at the walls.

    Satisfies ``i k F + G' = 0`` identically and gives ``I = chi'' - k^2 chi``.
    """
    chi = potential.values
    scale = 1.0 + np.max(np.abs(chi))
    if abs(chi[0]) > 1e-12 * scale or abs(chi[-1]) > 1e-12 * scale:
        raise EndpointError(
            f"potential must vanish at y=0 and y=1, got {chi[0]:.3g} and {chi[-1]:.3g}"
        )
    grid = potential.grid
    return ForcingMode(
        f_hat=GridFunction(grid.D(1) @ chi, grid),
        g_hat=GridFunction(-1j * k * chi, grid),
    )
