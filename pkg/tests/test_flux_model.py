"""Flux model layer: critical curve, branch inversion, Legendre machinery,
assumption screening.

Closed-form oracles used below, all derived by hand for the quadratic
families h = c (u - s)^2 + o:

    alpha(x) = s,   hmin = o,   S^+/-(y) = s +- sqrt((y - o) / c),
    L(x, v)  = s v + v^2 / (4 c) - o,   sup_{|v| <= 1} L = |s| + 1/(4c) - o.
"""

import math

import numpy as np
import pytest

from hetflux.errors import NumericalError
from hetflux.families import heterogeneous_quadratic, lwr, quadratic, two_state
from hetflux.flux_model import (
    CriticalCurve,
    FluxModel,
    branch_inverse,
    branch_inverses,
    critical_point,
    critical_points,
    legendre_sup,
    legendre_transform,
    validate_assumptions,
)
from hetflux.profiles import bump

S1_HQ = 0.3 + 1.0 / 6.0 + 0.1  # sup_{x,|v|<=1} L for the default heterogeneous quadratic


# ---------------------------------------------------------------------------
# critical points


def test_critical_point_homogeneous_parabolas():
    assert abs(critical_point(quadratic(0.5), 0.7)) < 1e-12
    assert abs(critical_point(quadratic(1.0), -3.0)) < 1e-12
    assert abs(critical_point(quadratic(1.0, shift=2.5), 0.0) - 2.5) < 1e-12


def test_critical_point_follows_the_coefficient_curve(hq_model):
    for x in (-1.5, -0.5, 0.0, 0.25, 1.0):
        expected = 0.3 * float(bump(x / 1.0))
        assert abs(critical_point(hq_model, x) - expected) < 1e-9
        assert abs(float(hq_model.du_h(x, critical_point(hq_model, x)))) <= 1e-12


def test_critical_points_vectorized_matches_scalar(hq_model):
    xs = np.linspace(-1.2, 1.2, 17)
    vec = critical_points(hq_model, xs)
    for x, a in zip(xs, vec):
        assert abs(a - critical_point(hq_model, float(x))) < 1e-9


def test_wrong_alpha_hint_falls_back_to_the_root_solve():
    base = quadratic(0.5)
    lying = FluxModel(
        h=base.h, du_h=base.du_h, dx_h=base.dx_h, hetero_radius=0.0,
        alpha_hint=lambda x: np.ones(np.asarray(x, dtype=float).shape),
    )
    a = critical_points(lying, np.array([0.0]))
    assert abs(float(a[0])) < 1e-9


def test_critical_curve_extremes(hq_model, pair_model):
    curve = CriticalCurve.build(hq_model)
    assert abs(curve.alpha_min - 0.0) < 1e-9
    assert abs(curve.alpha_max - 0.3) < 1e-9  # bump peak sits on the grid
    assert abs(float(curve.hmin(0.0)) - (-0.1)) < 1e-9

    flat = CriticalCurve.build(pair_model)
    assert abs(flat.alpha_min) < 1e-9 and abs(flat.alpha_max) < 1e-9


def test_critical_curve_constant_outside_radius(hq_model):
    curve = CriticalCurve.build(hq_model)
    for x in (1.0, 2.0, 50.0, -17.0):
        assert abs(float(curve.alpha(x))) < 1e-9


# ---------------------------------------------------------------------------
# branch inversion


def test_branch_inverse_golden_values():
    assert abs(branch_inverse(quadratic(1.0), 0.0, 1.0, "plus") - 1.0) < 1e-12
    assert abs(branch_inverse(quadratic(1.0), 0.0, 1.0, "minus") + 1.0) < 1e-12
    # The worked interface example inverts f = u^2/2 at level 1 on the minus side.
    assert abs(branch_inverse(quadratic(0.5), 0.0, 1.0, "minus") + math.sqrt(2.0)) < 1e-12
    assert abs(branch_inverse(quadratic(0.5), 0.0, 0.0, "plus")) < 1e-12


def test_branch_round_trip_ordering_and_monotonicity(hq_model, rng):
    curve = CriticalCurve.build(hq_model)
    for _ in range(200):
        x = float(rng.uniform(-1.5, 1.5))
        a = critical_point(hq_model, x)
        hmin = float(hq_model.h(x, a))
        y = hmin + float(rng.uniform(0.0, 4.0))
        sp = branch_inverse(hq_model, x, y, "plus", alpha=a)
        sm = branch_inverse(hq_model, x, y, "minus", alpha=a)
        assert sm <= a <= sp
        assert abs(float(hq_model.h(x, sp)) - y) <= 1e-12
        assert abs(float(hq_model.h(x, sm)) - y) <= 1e-12
        y2 = y + 0.5
        assert branch_inverse(hq_model, x, y2, "plus", alpha=a) >= sp - 1e-12
        assert branch_inverse(hq_model, x, y2, "minus", alpha=a) <= sm + 1e-12
    assert curve.alpha_min <= curve.alpha_max


def test_branch_inverse_clamps_rounding_below_minimum():
    m = quadratic(0.5, offset=0.25)
    assert branch_inverse(m, 0.0, 0.25 - 1e-11, "plus") == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(NumericalError):
        branch_inverse(m, 0.0, 0.25 - 1e-9, "minus")


def test_branch_inverse_rejects_bad_side():
    with pytest.raises(ValueError):
        branch_inverse(quadratic(0.5), 0.0, 1.0, "upward")


def test_branch_inverses_matches_scalar_loop(hq_model):
    xs = np.linspace(-1.3, 1.3, 41)
    for side in ("plus", "minus"):
        vec = branch_inverses(hq_model, xs, 1.5, side)
        for x, v in zip(xs, vec):
            assert abs(v - branch_inverse(hq_model, float(x), 1.5, side)) < 1e-10


def test_branch_inverses_clamp_and_error_paths(hq_model):
    xs = np.linspace(-1.5, 1.5, 21)
    # hmin ranges over [-0.1, 0]; a level a hair below 0 clamps the outer cells
    # to alpha instead of failing.
    vals = branch_inverses(hq_model, xs, -1e-12, "plus")
    alphas = critical_points(hq_model, xs)
    assert np.all(vals >= alphas - 1e-12)
    resid = np.abs(np.asarray(hq_model.h(xs, vals), dtype=float) - (-1e-12))
    assert float(np.max(resid)) <= 2e-10
    # A level below the running minimum of H is unsolvable somewhere.
    with pytest.raises(NumericalError):
        branch_inverses(hq_model, xs, -0.05, "minus")


# ---------------------------------------------------------------------------
# Legendre transform


def test_legendre_closed_forms():
    assert abs(legendre_transform(quadratic(0.5), 0.0, 1.2) - 1.2**2 / 2.0) < 1e-10
    assert abs(legendre_transform(quadratic(1.0), 0.0, 1.2) - 1.2**2 / 4.0) < 1e-10


def test_legendre_heterogeneous_closed_form(hq_model):
    x, v = 0.37, 1.3
    b = float(bump(x))
    theta, ell, g = 1.0 + 0.5 * b, 0.3 * b, -0.1 * b
    expected = ell * v + v**2 / (4.0 * theta) - g
    assert abs(legendre_transform(hq_model, x, v) - expected) < 1e-10


def test_legendre_brute_force_grid_oracle(lwr_model, rng):
    for _ in range(10):
        x = float(rng.uniform(-1.5, 1.5))
        v = float(rng.uniform(-1.0, 1.0))
        ps = np.linspace(-6.0, 6.0, 240001)
        brute = float(np.max(ps * v - np.asarray(lwr_model.h(x, ps), dtype=float)))
        assert abs(legendre_transform(lwr_model, x, v) - brute) < 1e-6


def test_legendre_sup_closed_values(hq_model):
    assert abs(legendre_sup(quadratic(0.5), 1.0) - 0.5) < 1e-10
    assert abs(legendre_sup(quadratic(1.0), 1.0) - 0.25) < 1e-10
    assert abs(legendre_sup(hq_model, 1.0) - S1_HQ) < 1e-8
    # lambda = 0 collapses to -inf_x hmin(x) = 0.1 for the default family.
    assert abs(legendre_sup(hq_model, 0.0) - 0.1) < 1e-9


def test_legendre_young_inequality(hq_model, lwr_model, rng):
    for model in (hq_model, lwr_model):
        xs = rng.uniform(-2.0, 2.0, 400)
        ps = rng.uniform(-3.0, 3.0, 400)
        vs = rng.uniform(-3.0, 3.0, 400)
        for x, p, v in zip(xs, ps, vs):
            lhs = p * v
            rhs = float(model.h(x, p)) + legendre_transform(model, float(x), float(v))
            assert lhs <= rhs + 1e-9


def test_legendre_slope_bound_inequality(hq_model, rng):
    # lam |p| - H(x, p) <= sup_{y, |v| <= lam} L(y, v) for every sampled triple.
    for lam in (0.25, 1.0, 2.0):
        sup = legendre_sup(hq_model, lam)
        xs = rng.uniform(-3.0, 3.0, 300)
        ps = rng.uniform(-4.0, 4.0, 300)
        vals = lam * np.abs(ps) - np.asarray(hq_model.h(xs, ps), dtype=float)
        assert float(np.max(vals)) <= sup + 1e-9


def test_double_transform_returns_the_flux(hq_model, lwr_model, pair_model):
    # The maximizer of sup_v (u v - L(x, v)) sits at v = du_h(x, u).
    for model in (hq_model, lwr_model, pair_model, quadratic(0.5)):
        for x in (-1.2, -0.3, 0.0, 0.8):
            for u in (-2.0, -0.4, 0.1, 1.7):
                v = float(model.du_h(x, u))
                back = u * v - legendre_transform(model, x, v)
                assert abs(back - float(model.h(x, u))) < 1e-8


# ---------------------------------------------------------------------------
# assumption screening


def test_validate_assumptions_clean_on_smooth_families():
    for model in (quadratic(0.5), heterogeneous_quadratic(), lwr()):
        report = validate_assumptions(model)
        assert report.ok, report.summary()
        assert "hold" in report.summary()


def test_validate_reports_two_state_jump_at_origin():
    # The paired-flux family is discontinuous in x at 0 by construction; the
    # screener must say so, and say nothing else.
    report = validate_assumptions(two_state())
    assert not report.ok
    assert report.violations
    for v in report.violations:
        assert v.kind == "derivative-mismatch-x"
        assert v.x == 0.0


def test_validate_flags_nonconvex_and_noncompact_flux():
    # h = sin(x) u: linear in u (no convexity) and x-varying everywhere.
    bad = FluxModel(
        h=lambda x, u: np.sin(np.asarray(x, dtype=float)) * np.asarray(u, dtype=float),
        du_h=lambda x, u: np.sin(np.asarray(x, dtype=float))
        * np.ones(np.broadcast(np.asarray(x), np.asarray(u)).shape),
        dx_h=lambda x, u: np.cos(np.asarray(x, dtype=float)) * np.asarray(u, dtype=float),
        hetero_radius=1.0,
    )
    report = validate_assumptions(bad)
    kinds = {v.kind for v in report.violations}
    assert "convexity" in kinds
    assert "heterogeneity-compactness" in kinds


def test_validate_flags_lying_derivative():
    base = quadratic(0.5)
    liar = FluxModel(
        h=base.h,
        du_h=lambda x, u: np.asarray(u, dtype=float) + 0.1,
        dx_h=base.dx_h,
        hetero_radius=0.0,
    )
    report = validate_assumptions(liar)
    assert any(v.kind == "derivative-mismatch-u" for v in report.violations)
    assert not report.ok
