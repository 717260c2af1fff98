"""Chebyshev collocation on the wall-normal interval [0, 1].

Nodes are the Chebyshev-Gauss-Lobatto points mapped affinely onto [0, 1] and
stored in ascending order, so ``nodes[0] == 0`` and ``nodes[-1] == 1``.
Differentiation matrices of orders 1..4 come from the Weideman-Reddy
recursion (each order built from the previous one's diagonal, not by matrix
powers), and integrals use Clenshaw-Curtis weights on the same nodes.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz

from .errors import GridMismatchError, SizingError

MIN_NODES = 5
DEFAULT_NODES = 64


def cgl_nodes(n_nodes: int) -> np.ndarray:
    """Chebyshev-Gauss-Lobatto points mapped to [0, 1], ascending."""
    if n_nodes < 2:
        raise SizingError(f"need at least 2 nodes, got {n_nodes}")
    N = n_nodes - 1
    # sin form is symmetric to the last bit, unlike cos(j*pi/N)
    x = np.sin(np.pi * np.arange(N, -N - 1, -2) / (2 * N))
    y = (1.0 - x) / 2.0
    y[0], y[-1] = 0.0, 1.0
    return y


def chebyshev_diff_matrices(n_nodes: int, max_order: int = 4) -> list[np.ndarray]:
    """Differentiation matrices on the CGL points of [-1, 1] (descending x).

    Weideman & Reddy's recursion with the trigonometric form of x_j - x_k and
    the negative-sum trick for the diagonal.
    """
    n = n_nodes
    k = np.arange(n)
    n1, n2 = n // 2, (n + 1) // 2
    th = k * np.pi / (n - 1)
    T = np.tile(th / 2, (n, 1)).T
    DX = 2 * np.sin(T.T + T) * np.sin(T.T - T)
    DX = np.vstack([DX[:n1], -np.flipud(np.fliplr(DX[:n2]))])
    np.fill_diagonal(DX, 1.0)
    C = toeplitz((-1.0) ** k)
    C[0, :] *= 2
    C[-1, :] *= 2
    C[:, 0] /= 2
    C[:, -1] /= 2
    Z = 1.0 / DX
    np.fill_diagonal(Z, 0.0)
    D = np.eye(n)
    mats = []
    for ell in range(1, max_order + 1):
        D = ell * Z * (C * np.tile(np.diag(D), (n, 1)).T - D)
        np.fill_diagonal(D, -D.sum(axis=1))
        mats.append(D)
    return mats


def clenshaw_curtis_weights(n_nodes: int) -> np.ndarray:
    """Clenshaw-Curtis weights for the CGL points of [-1, 1] (sum to 2)."""
    N = n_nodes - 1
    theta = np.pi * np.arange(N + 1) / N
    w = np.zeros(N + 1)
    inner = np.arange(1, N)
    v = np.ones(N - 1)
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N**2 - 1)
        for j in range(1, N // 2):
            v -= 2.0 * np.cos(2 * j * theta[inner]) / (4 * j**2 - 1)
        v -= np.cos(N * theta[inner]) / (N**2 - 1)
    else:
        w[0] = w[N] = 1.0 / N**2
        for j in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * j * theta[inner]) / (4 * j**2 - 1)
    w[inner] = 2.0 * v / N
    return w


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    n_nodes: int
    nodes: np.ndarray
    diff_matrices: tuple  # (D1, D2, D3, D4) with respect to y
    quad_weights: np.ndarray

    def D(self, order: int) -> np.ndarray:
        if order not in (1, 2, 3, 4):
            raise ValueError(f"derivative order must be 1..4, got {order}")
        return self.diff_matrices[order - 1]

    @property
    def y(self) -> np.ndarray:
        return self.nodes

    def sample(self, func) -> "GridFunction":
        """Evaluate ``func`` at the nodes."""
        return GridFunction(np.asarray(func(self.nodes), dtype=complex), self)

    def function(self, values) -> "GridFunction":
        return GridFunction(np.asarray(values, dtype=complex), self)

    def zeros(self) -> "GridFunction":
        return GridFunction(np.zeros(self.n_nodes, dtype=complex), self)

    def __repr__(self):
        return f"SpectralGrid(n_nodes={self.n_nodes})"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=32)
def build_grid(n_nodes: int) -> SpectralGrid:
    """Build (and cache) the collocation grid with ``n_nodes`` points."""
    if int(n_nodes) != n_nodes or n_nodes < MIN_NODES:
        raise SizingError(
            f"a fourth-order operator needs at least {MIN_NODES} nodes, got {n_nodes}"
        )
    n_nodes = int(n_nodes)
    # y = (1 - x)/2 flips the descending x ordering and scales d/dy = -2 d/dx
    mats = chebyshev_diff_matrices(n_nodes, 4)
    diff = tuple(_frozen((-2.0) ** (m + 1) * mats[m]) for m in range(4))
    weights = clenshaw_curtis_weights(n_nodes) / 2.0
    return SpectralGrid(
        n_nodes=n_nodes,
        nodes=_frozen(cgl_nodes(n_nodes)),
        diff_matrices=diff,
        quad_weights=_frozen(weights),
    )


@dataclass(frozen=True, eq=False)
class GridFunction:
    values: np.ndarray
    grid: SpectralGrid

    def __post_init__(self):
        if self.values.shape != (self.grid.n_nodes,):
            raise GridMismatchError(
                f"{self.values.shape[0]} values on a {self.grid.n_nodes}-node grid"
            )

    def _check(self, other: "GridFunction"):
        if other.grid.n_nodes != self.grid.n_nodes:
            raise GridMismatchError(
                f"grids differ: {self.grid.n_nodes} vs {other.grid.n_nodes} nodes"
            )

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.values + other.values, self.grid)
        return GridFunction(self.values + other, self.grid)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.values - other.values, self.grid)
        return GridFunction(self.values - other, self.grid)

    def __mul__(self, scalar):
        return GridFunction(self.values * scalar, self.grid)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(-self.values, self.grid)

    def conj(self) -> "GridFunction":
        return GridFunction(self.values.conj(), self.grid)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def inner_product(f: GridFunction, g: GridFunction) -> complex:
    """Quadrature approximation of the integral of conj(f)*g over [0, 1]."""
    f._check(g)
    return complex(np.sum(f.grid.quad_weights * np.conj(f.values) * g.values))


def l2_norm_sq(f: GridFunction) -> float:
    return float(np.sum(f.grid.quad_weights * np.abs(f.values) ** 2))


def differentiate(f: GridFunction, order: int = 1) -> GridFunction:
    return GridFunction(f.grid.D(order) @ f.values, f.grid)
