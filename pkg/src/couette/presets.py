"""Named forcings for the clamped solve.

A forcing is resolved against a grid and a wavenumber.  Most presets give the
velocity forcing components (F, G) directly; the manufactured ones instead fix
an exact stream function and derive ``I = T T0 psi_exact`` by applying the
discrete operator, so the solver can be checked against a known answer.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .grid import GridFunction, SpectralGrid
from .operators import ForcingMode, ModeParams, assemble_operators, build_scalar_forcing


@dataclass(frozen=True)
class Forcing:
    name: str
    f: Optional[Callable] = None      # F(y), x-component
    g: Optional[Callable] = None      # G(y), y-component
    exact: Optional[Callable] = None  # psi_exact(y) for manufactured problems

    @property
    def manufactured(self) -> bool:
        return self.exact is not None

    def mode(self, grid: SpectralGrid) -> Optional[ForcingMode]:
        if self.manufactured:
            return None
        zero = lambda y: np.zeros_like(y)  # noqa: E731
        return ForcingMode(grid.sample(self.f or zero), grid.sample(self.g or zero))

    def scalar(self, grid: SpectralGrid, params: ModeParams) -> GridFunction:
        if self.manufactured:
            ops = assemble_operators(params, grid)
            return GridFunction(ops.tt0_matrix @ grid.sample(self.exact).values, grid)
        return build_scalar_forcing(self.mode(grid), params.k, grid)


def _quartic(y):
    return y**2 * (1 - y) ** 2


PRESETS = {
    "zero": Forcing("zero", f=lambda y: np.zeros_like(y)),
    "sin": Forcing("sin", f=lambda y: np.sin(np.pi * y)),
    "cos": Forcing("cos", f=lambda y: np.cos(np.pi * y)),
    "linear": Forcing("linear", f=lambda y: y),
    "const": Forcing("const", f=lambda y: np.ones_like(y)),
    "gauss": Forcing("gauss", f=lambda y: np.exp(-((y - 0.3) ** 2) / 0.02)),
    "shear-sin": Forcing("shear-sin", f=lambda y: np.sin(np.pi * y), g=lambda y: y * (1 - y)),
    "mms-quartic": Forcing("mms-quartic", exact=_quartic),
    "mms-complex": Forcing("mms-complex", exact=lambda y: _quartic(y) * (1 + 1j * y)),
}

# forcings with G = 0, for the k = 0 estimate
F_ONLY_PRESETS = ("sin", "cos", "linear", "const", "gauss")


def get_preset(name: str) -> Forcing:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown forcing preset {name!r}; choose from {sorted(PRESETS)}") from None


def load_tabulated(path) -> Forcing:
    """Forcing from a CSV with columns ``y,f_re,f_im,g_re,g_im`` (header row).

    Columns are interpolated with natural cubic splines; ``g_*`` may be omitted.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    y = np.array([float(r["y"]) for r in rows])
    order = np.argsort(y)
    y = y[order]

    def column(name):
        if name not in rows[0]:
            return np.zeros_like(y)
        return np.array([float(r[name]) for r in rows])[order]

    f = column("f_re") + 1j * column("f_im")
    g = column("g_re") + 1j * column("g_im")
    f_spl = CubicSpline(y, f, bc_type="natural")
    g_spl = CubicSpline(y, g, bc_type="natural")
    return Forcing(f"file:{path.name}", f=f_spl, g=g_spl)
