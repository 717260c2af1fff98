"""Spectral-collocation solvers for resolvent estimates of 2-D plane Couette flow."""
from .grid import (GridFunction, SpectralGrid, build_grid, differentiate, inner_product,
                   l2_norm_sq)
from .operators import (ForcingMode, ModeParams, OperatorSet, assemble_operators,
                        build_scalar_forcing, divergence_free_forcing)
from .bvp import (BoundaryData, BvpSolution, Decomposition, NormTriple, ProblemSpec,
                  decompose, reconstruct, refine_until_converged, solve_cascade,
                  solve_clamped, solve_homogeneous_bc)
from .resolvent import (ModeNormReport, ResolventQuery, SpectrumReport, global_norm,
                        mode_gain, rightmost_eigenvalue, theorem1_bound)
from .sweep import (SweepResult, SweepSpec, mesh_for_reynolds, run_delta_sweep,
                    run_resolvent_sweep)

__version__ = "0.1.0"
