"""Sweep lattices, the delta and resolvent sweeps, failure policy."""
import math

import numpy as np
import pytest

from couette import sweep as sweep_mod
from couette.errors import SingularOperatorError, SweepFailure
from couette.grid import build_grid
from couette.resolvent import ResolventQuery, global_norm
from couette.sweep import (SweepSpec, delta_norms, k_range, loglog_slope, mesh_for_reynolds,
                           run_delta_sweep, run_resolvent_sweep, theorem1_samples)


class TestLattice:
    def test_r1_base8(self):
        xi = mesh_for_reynolds(1.0, 8)
        assert len(xi) == 16 and xi[0] == -4.0 and xi[-1] == 4.0

    @pytest.mark.parametrize("R", [2.0, 37.0, 1e4])
    def test_endpoints_exact(self, R):
        xi = mesh_for_reynolds(R, 5)
        a = 2 * (1 + math.sqrt(R))
        assert xi[0] == -a and xi[-1] == a
        assert len(xi) == 5 * math.ceil(1 + math.sqrt(R) / 10)

    def test_capped(self):
        assert len(mesh_for_reynolds(1e8, 8)) == 2048

    def test_base_points_validated(self):
        with pytest.raises(ValueError):
            mesh_for_reynolds(10.0, 2)

    @pytest.mark.parametrize("R,ks", [(1.0, []), (1.41, []), (1.5, [1]), (100.0, list(range(1, 9)))])
    def test_k_range(self, R, ks):
        assert list(k_range(R)) == ks


class TestSpec:
    @pytest.mark.parametrize("kwargs", [dict(reynolds_list=()), dict(reynolds_list=(10, 5)),
                                        dict(reynolds_list=(10, 10)), dict(reynolds_list=(-1,)),
                                        dict(reynolds_list=(10,), xi_points_per_r=2),
                                        dict(reynolds_list=(10,), target="psi"),
                                        dict(reynolds_list=(10,), rel_tol=0)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SweepSpec(**kwargs)


class TestDeltaSweep:
    def test_small_r_is_skipped(self):
        (res,) = run_delta_sweep(SweepSpec((1.0,)))
        assert res.skipped and res.points_evaluated == 0

    def test_r100_envelope(self):
        (res,) = run_delta_sweep(SweepSpec((100.0,), target="delta1"))
        assert res.max_k2_norm_sq <= 1.05 and res.max_dnorm_sq <= 1.05
        assert not res.failures
        for k, xi in (res.argmax_k2, res.argmax_dnorm):
            assert k in k_range(100.0) and abs(xi) <= 2 * (1 + 10)
        assert res.converged_k2 == pytest.approx(res.max_k2_norm_sq, rel=1e-3)

    def test_coverage_without_refinement(self):
        spec = SweepSpec((10.0, 100.0), xi_points_per_r=4, refine=False)
        for res in run_delta_sweep(spec):
            assert res.points_evaluated == len(k_range(res.reynolds)) * len(spec.lattice(res.reynolds))
            assert res.refine_evaluations == 0

    def test_refinement_never_lowers_maximum(self):
        coarse = run_delta_sweep(SweepSpec((50.0,), 4, "delta2", refine=False))[0]
        fine = run_delta_sweep(SweepSpec((50.0,), 4, "delta2"))[0]
        assert fine.max_k2_norm_sq >= coarse.max_k2_norm_sq
        assert fine.max_dnorm_sq >= coarse.max_dnorm_sq

    def test_deterministic(self):
        spec = SweepSpec((10.0, 60.0), xi_points_per_r=4, target="delta2")
        assert run_delta_sweep(spec) == run_delta_sweep(spec)

    def test_symmetry_spot_check(self):
        g = build_grid(64)
        for k, xi in [(1, 3.0), (2, -7.5), (4, 0.6)]:
            a = np.array(delta_norms(k, xi, 300.0, g))
            b = np.array(delta_norms(-k, -xi, 300.0, g))
            np.testing.assert_allclose(a, b, rtol=1e-8)

    def test_isolated_failures_are_recorded(self, monkeypatch):
        real = sweep_mod.delta_norms

        def flaky(k, xi, R, grid):
            if k == 2 and xi == 0.0:
                raise SingularOperatorError("forced", rcond=0.0)
            return real(k, xi, R, grid)

        monkeypatch.setattr(sweep_mod, "delta_norms", flaky)
        spec = SweepSpec((100.0,), xi_values=tuple(sorted(set(np.linspace(-22, 22, 200)) | {0.0})),
                         refine=False)
        (res,) = run_delta_sweep(spec)
        assert len(res.failures) == 1 and res.failures[0][:2] == (2, 0.0)

    def test_widespread_failures_abort(self, monkeypatch):
        def broken(k, xi, R, grid):
            raise SingularOperatorError("forced", rcond=0.0)

        monkeypatch.setattr(sweep_mod, "delta_norms", broken)
        with pytest.raises(SweepFailure) as info:
            run_delta_sweep(SweepSpec((10.0,), refine=False))
        assert info.value.failures


class TestResolventSweep:
    def test_single_point_matches_global_norm(self):
        R, xi = 50.0, 2.5
        (res,) = run_resolvent_sweep(SweepSpec((R,), target="resolvent", xi_values=(xi,), refine=False,
                                               n_nodes=48))
        direct = global_norm(ResolventQuery(1j * xi, R, res.k_max, 48))
        assert res.sup_norm == pytest.approx(direct.norm, rel=1e-12)

    def test_doubling_r_roughly_doubles_sup(self):
        sups = [r.sup_norm for r in run_resolvent_sweep(SweepSpec((200.0, 400.0, 800.0), target="resolvent"))]
        for a, b in zip(sups, sups[1:]):
            assert 1.6 <= b / a <= 2.4

    def test_region_sup_below_one(self):
        for res in run_resolvent_sweep(SweepSpec((10.0, 100.0), target="resolvent")):
            assert res.region_sup <= 1.05 and res.theorem1_max_ratio <= 1.05
            assert res.full_sup == max(res.sup_norm, res.region_sup)

    @pytest.mark.slow
    def test_slope_100_400_1600(self):
        rs = (100.0, 400.0, 1600.0)
        sups = [r.sup_norm for r in run_resolvent_sweep(SweepSpec(rs, target="resolvent"))]
        assert 0.8 <= loglog_slope(rs, sups) <= 1.2


def test_theorem1_samples_on_or_beyond_circle():
    for R in (10.0, 1000.0):
        r0 = 2 * math.sqrt(2) * (1 + math.sqrt(R))
        pts = theorem1_samples(R, 12)
        assert len(pts) == 12
        assert all(p.real >= 0 and abs(p) >= r0 * (1 - 1e-14) for p in pts)


def test_loglog_slope():
    assert loglog_slope([1, 2, 4], [3, 6, 12]) == pytest.approx(1.0)
