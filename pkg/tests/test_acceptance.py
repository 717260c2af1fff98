"""Acceptance criteria 1-9, each at its stated tolerance and runtime budget.

Every test prints one ``[PASS]``/``[FAIL]`` line with the measured value, the
threshold and the elapsed time, then asserts the verdict.  ``conftest.py``
repeats the lines as a summary at the end of the run.
"""
from couette import verify

RESULTS = {}


def check(capsys, result):
    RESULTS[result.criterion] = result
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()


def test_c1_manufactured_solution(capsys):
    check(capsys, verify.suite_mms())


def test_c2_decomposition_identity(capsys):
    check(capsys, verify.suite_decomposition())


def test_c3_large_s_region(capsys):
    check(capsys, verify.suite_theorem1())


def test_c4_delta_envelope(capsys):
    check(capsys, verify.suite_delta_envelope())


def test_c5_large_k_estimates(capsys):
    check(capsys, verify.suite_large_k())


def test_c6_k0_estimate(capsys):
    check(capsys, verify.suite_k0())


def test_c7_resolvent_proportional_to_r(capsys):
    check(capsys, verify.suite_resolvent_scaling())


def test_c8_spectral_gap(capsys):
    check(capsys, verify.suite_spectral_gap())


def test_c9_mesh_robustness(capsys):
    check(capsys, verify.suite_mesh_robustness())
