"""Forcing presets, tabulated forcings and the worker pool."""
import numpy as np
import pytest

from couette.grid import build_grid
from couette.operators import ModeParams, assemble_operators
from couette.parallel import THREADS_ENV, ordered_map, worker_count
from couette.presets import F_ONLY_PRESETS, PRESETS, get_preset, load_tabulated


def test_unknown_preset():
    with pytest.raises(ValueError):
        get_preset("nope")


def test_f_only_presets_have_no_g():
    g = build_grid(16)
    for name in F_ONLY_PRESETS:
        assert PRESETS[name].mode(g).g_hat.max_abs() == 0.0


def test_manufactured_scalar_is_operator_image():
    g = build_grid(16)
    p = ModeParams(2, 1j, 10)
    f = get_preset("mms-complex")
    assert f.mode(g) is None
    psi = g.sample(f.exact)
    expected = assemble_operators(p, g).tt0_matrix @ psi.values
    np.testing.assert_allclose(f.scalar(g, p).values, expected)


def test_tabulated_spline(tmp_path):
    y = np.linspace(0, 1, 30)
    rows = ["y,f_re,f_im"] + [f"{v},{np.sin(np.pi * v)},{v**2}" for v in y[::-1]]
    path = tmp_path / "f.csv"
    path.write_text("\n".join(rows) + "\n")
    forcing = load_tabulated(path)
    g = build_grid(24)
    mode = forcing.mode(g)
    np.testing.assert_allclose(mode.f_hat.values, np.sin(np.pi * g.nodes) + 1j * g.nodes**2, atol=1e-3)
    assert mode.g_hat.max_abs() == 0.0


def test_tabulated_empty(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("y,f_re\n")
    with pytest.raises(ValueError):
        load_tabulated(path)


def test_worker_cap(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "2")
    assert worker_count(8) == 2
    monkeypatch.delenv(THREADS_ENV)
    assert worker_count(3) == 3


def test_ordered_map_keeps_order():
    assert ordered_map(lambda x: x * x, range(20), workers=4) == [x * x for x in range(20)]
