"""Root finder: bracketing, bisection/Newton hybrid, residual guarantees."""

import math

import pytest

from hetflux.errors import NumericalError
from hetflux.rootfind import TOL_ROOT, expand_bracket, solve_increasing


def test_cubic_root_with_newton_polish():
    root = solve_increasing(lambda x: x**3 - 8.0, dg=lambda x: 3.0 * x**2, x0=0.0)
    assert abs(root - 2.0) < 1e-12
    assert abs(root**3 - 8.0) <= TOL_ROOT


def test_bisection_only_still_meets_residual_tolerance():
    root = solve_increasing(lambda x: math.tanh(x) - 0.5, x0=0.0)
    assert abs(math.tanh(root) - 0.5) <= TOL_ROOT


def test_expand_bracket_walks_far_from_seed():
    lo, hi, glo, ghi = expand_bracket(lambda x: x + 37.5, x0=0.0)
    assert lo <= -37.5 <= hi
    assert glo <= 0.0 <= ghi


def test_expand_bracket_exact_hit_short_circuits():
    assert expand_bracket(lambda x: x, x0=0.0) == (0.0, 0.0, 0.0, 0.0)


def test_expand_bracket_rejects_nan():
    with pytest.raises(NumericalError):
        expand_bracket(lambda x: float("nan"), x0=0.0)


def test_no_sign_change_raises():
    # Strictly positive on the whole line: the left expansion never succeeds.
    with pytest.raises(NumericalError):
        solve_increasing(lambda x: 1.0 + math.exp(min(x, 700.0)))


def test_supplied_bracket_must_straddle_zero():
    with pytest.raises(NumericalError):
        solve_increasing(lambda x: x, bracket=(1.0, 2.0))


def test_supplied_bracket_endpoints_returned_exactly():
    assert solve_increasing(lambda x: x - 1.0, bracket=(1.0, 2.0)) == 1.0
    assert solve_increasing(lambda x: x - 2.0, bracket=(1.0, 2.0)) == 2.0


def test_jump_function_without_root_fails_residual_check():
    # Increasing, but jumps over zero at x = 0; best residual stays near 1.
    def g(x):
        return x + (1.0 if x >= 0 else -1.0)

    with pytest.raises(NumericalError, match="residual"):
        solve_increasing(g, x0=0.0)


def test_custom_residual_tolerance_accepts_the_same_jump():
    def g(x):
        return x + (1.0 if x >= 0 else -1.0)

    root = solve_increasing(g, x0=0.0, tol_res=1.5)
    assert abs(root) < 1e-6
