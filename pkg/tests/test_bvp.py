"""Clamped solves, the delta problems, the second-order cascade and grid refinement."""
import math

import numpy as np
import pytest
from scipy.linalg import solve_banded

from couette.bvp import (CLAMPED, DELTA1_BC, DELTA2_BC, BoundaryData, ClampedSystem, ProblemSpec,
                         decompose, reconstruct, refine_until_converged, solve_cascade,
                         solve_clamped, solve_delta_pair, solve_homogeneous_bc)
from couette.errors import GridMismatchError, NonConvergenceError, SingularOperatorError
from couette.grid import build_grid, l2_norm_sq
from couette.operators import (ModeParams, assemble_operators, build_scalar_forcing,
                               divergence_free_forcing)
from couette.presets import get_preset
from couette.resolvent import mode_spectrum


def quartic(y):
    return y**2 * (1 - y) ** 2


def random_chi(grid, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=6) + 1j * rng.normal(size=6)
    y = grid.nodes
    return grid.function(y * (1 - y) * np.polynomial.chebyshev.chebval(2 * y - 1, c))


class TestClamped:
    def test_zero_forcing(self):
        g = build_grid(32)
        sol = solve_clamped(assemble_operators(ModeParams(2, 1j, 50), g), g.zeros())
        assert sol.psi.max_abs() == 0.0

    @pytest.mark.parametrize("k,s,R", [(0, 0, 1), (1, 3j, 10), (-5, 0.5 - 20j, 400), (12, 60j, 5000)])
    def test_manufactured_quartic(self, k, s, R):
        g = build_grid(32)
        ops = assemble_operators(ModeParams(k, s, R), g)
        exact = g.sample(quartic)
        sol = solve_clamped(ops, g.function(ops.tt0_matrix @ exact.values))
        assert np.max(np.abs(sol.psi.values - exact.values)) / exact.max_abs() < 1e-9

    def test_boundary_values_enforced(self):
        g = build_grid(40)
        ops = assemble_operators(ModeParams(3, 2j, 100), g)
        sol = solve_clamped(ops, g.sample(lambda y: np.cos(3 * y)))
        scale = sol.psi.max_abs()
        for v in (sol.psi.values[0], sol.psi.values[-1], sol.psi_d1.values[0], sol.psi_d1.values[-1]):
            assert abs(v) < 1e-12 * scale

    def test_k0_poincare_chain(self):
        g = build_grid(64)
        R = 100.0
        params = ModeParams(0, 1j, R)
        forcing = get_preset("sin")
        sol = solve_clamped(assemble_operators(params, g), forcing.scalar(g, params))
        assert math.sqrt(sol.norms.dnorm_sq) <= R / math.pi**2 * math.sqrt(forcing.mode(g).norm_sq)

    def test_grid_mismatch(self):
        ops = assemble_operators(ModeParams(1, 0, 10), build_grid(16))
        with pytest.raises(GridMismatchError):
            solve_clamped(ops, build_grid(17).zeros())

    def test_singular_at_discrete_eigenvalue(self):
        g = build_grid(32)
        lam = mode_spectrum(1, 10.0, g)
        s = lam[np.argmax(lam.real)]
        with pytest.raises(SingularOperatorError) as info:
            ClampedSystem(assemble_operators(ModeParams(1, s, 10.0), g))
        assert info.value.rcond < 1e-14

    def test_conjugate_parameters_give_conjugate_solution(self):
        g = build_grid(48)
        p = ModeParams(3, 0.2 + 7j, 300)
        I = g.sample(lambda y: np.exp(2j * y) + y)
        a = solve_clamped(assemble_operators(p, g), I).psi.values
        b = solve_clamped(assemble_operators(p.conjugate(), g), I.conj()).psi.values
        np.testing.assert_allclose(b, np.conj(a), atol=1e-12 * np.max(np.abs(a)))


class TestHomogeneous:
    def test_zero_data(self):
        g = build_grid(32)
        sol = solve_homogeneous_bc(assemble_operators(ModeParams(1, 1j, 10), g), CLAMPED)
        assert sol.psi.max_abs() == 0.0

    def test_superposition(self):
        g = build_grid(64)
        ops = assemble_operators(ModeParams(2, -4j, 300), g)
        a, b = 0.7 - 1.2j, -2.0 + 0.3j
        full = solve_homogeneous_bc(ops, BoundaryData(0, 0, a, b)).psi
        d1 = solve_homogeneous_bc(ops, DELTA1_BC).psi
        d2 = solve_homogeneous_bc(ops, DELTA2_BC).psi
        diff = full - (a * d1 + b * d2)
        assert math.sqrt(l2_norm_sq(diff) / l2_norm_sq(full)) < 1e-10

    def test_delta_pair_matches_individual_solves(self):
        g = build_grid(48)
        ops = assemble_operators(ModeParams(4, 9j, 800), g)
        d1, d2 = solve_delta_pair(ops)
        np.testing.assert_allclose(d1.psi.values, solve_homogeneous_bc(ops, DELTA1_BC).psi.values, atol=1e-13)
        np.testing.assert_allclose(d2.psi.values, solve_homogeneous_bc(ops, DELTA2_BC).psi.values, atol=1e-13)
        assert abs(d1.psi_d1.values[0] - 1) < 1e-10 and abs(d2.psi_d1.values[-1] - 1) < 1e-10

    def test_delta1_envelope_at_r100(self):
        g = build_grid(64)
        sol = solve_homogeneous_bc(assemble_operators(ModeParams(1, 0, 100), g), DELTA1_BC)
        assert sol.norms.norm_sq <= 1.0 and sol.norms.dnorm_sq <= 1.0


def fd_dirichlet(k, s, R, n=2001):
    """Second-order finite differences for (1/R) h'' - (s + k^2/R + i k y) h = 1, h(0) = h(1) = 0."""
    y = np.linspace(0.0, 1.0, n)
    dy = y[1] - y[0]
    m = n - 2
    ab = np.zeros((3, m), dtype=complex)
    ab[0, 1:] = 1 / (R * dy**2)
    ab[2, :-1] = 1 / (R * dy**2)
    ab[1] = -2 / (R * dy**2) - (s + k**2 / R + 1j * k * y[1:-1])
    h = np.zeros(n, dtype=complex)
    h[1:-1] = solve_banded((1, 1), ab, np.ones(m, dtype=complex))
    return y, h


class TestCascade:
    def test_zero_forcing(self):
        g = build_grid(16)
        dec = solve_cascade(assemble_operators(ModeParams(1, 1j, 10), g), g.zeros())
        assert dec.h.max_abs() == 0 and dec.g.max_abs() == 0 and dec.alpha == 0 and dec.beta == 0

    def test_h_against_finite_differences(self):
        g = build_grid(32)
        dec = solve_cascade(assemble_operators(ModeParams(1, 0, 1), g), g.sample(np.ones_like))
        y_fd, h_fd = fd_dirichlet(1, 0, 1)
        h_at_nodes = np.interp(g.nodes, y_fd, h_fd.real) + 1j * np.interp(g.nodes, y_fd, h_fd.imag)
        err = np.max(np.abs(dec.h.values - h_at_nodes)) / np.max(np.abs(h_at_nodes))
        assert err < 1e-6

    @pytest.mark.parametrize("R", [10.0, 100.0, 1000.0])
    def test_alpha_beta_sobolev_envelope(self, R):
        g = build_grid(96)
        for seed, (k, xi) in enumerate([(1, 0.0), (2, -3.0), (3, 10.0)]):
            chi = random_chi(g, seed)
            fm = divergence_free_forcing(chi, k)
            scale = 1 / math.sqrt(fm.norm_sq)
            fm = divergence_free_forcing(chi * scale, k)
            ops = assemble_operators(ModeParams.imaginary(k, xi, R), g)
            dec = solve_cascade(ops, build_scalar_forcing(fm, k, g))
            assert abs(dec.alpha) ** 2 <= 10 * R**2
            assert abs(dec.beta) ** 2 <= 10 * R**2


class TestReconstruct:
    def test_alpha_beta_zero_returns_g(self):
        g = build_grid(32)
        ops = assemble_operators(ModeParams(1, 0, 10), g)
        dec = solve_cascade(ops, g.zeros())
        d1, d2 = solve_delta_pair(ops)
        assert np.all(reconstruct(dec, d1, d2).values == dec.g.values)

    def test_zero_forcing(self):
        g = build_grid(32)
        dec = decompose(assemble_operators(ModeParams(1, 0, 10), g), g.zeros())
        assert dec.psi_reconstructed.max_abs() == 0

    def test_matches_direct_solve(self):
        g = build_grid(64)
        k, xi, R = 2, 5.0, 500.0
        ops = assemble_operators(ModeParams.imaginary(k, xi, R), g)
        I = build_scalar_forcing(divergence_free_forcing(random_chi(g, 11), k), k, g)
        direct = solve_clamped(ops, I).psi
        rebuilt = decompose(ops, I).psi_reconstructed
        assert math.sqrt(l2_norm_sq(direct - rebuilt) / l2_norm_sq(direct)) < 1e-7
        scale = rebuilt.max_abs()
        assert abs(rebuilt.values[0]) < 1e-10 * scale and abs(rebuilt.values[-1]) < 1e-10 * scale
        d = g.D(1) @ rebuilt.values
        assert abs(d[0]) < 1e-10 * np.max(np.abs(d)) and abs(d[-1]) < 1e-10 * np.max(np.abs(d))

    def test_parameter_mismatch(self):
        g = build_grid(16)
        dec = solve_cascade(assemble_operators(ModeParams(1, 0, 10), g), g.zeros())
        d1, d2 = solve_delta_pair(assemble_operators(ModeParams(2, 0, 10), g))
        with pytest.raises(ValueError):
            reconstruct(dec, d1, d2)


class TestRefinement:
    def test_smooth_problem_converges_at_first_level(self):
        p = ModeParams(1, 2j, 10)
        f = get_preset("mms-quartic")
        sol = refine_until_converged(ProblemSpec(p, forcing=lambda g: f.scalar(g, p)))
        assert sol.convergence.converged_at == 64
        assert sol.convergence.levels == (64, 96)

    def test_stiff_delta_problem_converges_monotonically(self):
        R = 1e4
        p = ModeParams.imaginary(1, 2 * (1 + math.sqrt(R)), R)
        sol = refine_until_converged(ProblemSpec(p, bc=DELTA1_BC))
        conv = sol.convergence
        assert conv.levels[-1] <= 256 and conv.rel_change < 1e-6
        changes = [a.rel_change(b) for a, b in zip(conv.norms, conv.norms[1:])]
        assert all(b < a for a, b in zip(changes, changes[1:]))

    @pytest.mark.parametrize("tol", [0.0, -1e-6])
    def test_rejects_nonpositive_tolerance(self, tol):
        with pytest.raises(ValueError):
            refine_until_converged(ProblemSpec(ModeParams(1, 0, 10), bc=DELTA1_BC), tol)

    def test_non_convergence_carries_last_norms(self):
        p = ModeParams.imaginary(1, 200.0, 1e4)
        with pytest.raises(NonConvergenceError) as info:
            refine_until_converged(ProblemSpec(p, bc=DELTA1_BC), 1e-6, levels=(16, 20, 24))
        assert len(info.value.last_norms) == 2
