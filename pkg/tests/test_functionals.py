import math

import numpy as np
import pytest

import oracles
from vexs import (DomainError, Gaussian, QuadratureSpec, Tent, bbm_functional,
                  constant, eps_functional, inverse_quadratic,
                  layer_cake_check, local_energy, nguyen_functional,
                  uniform_bound_check)
from vexs.cli import lemma41_preset
from vexs.functionals import superlevel_intervals
from vexs.quadrature import adaptive_integrate


def tent_np(x):
    return np.maximum(0.0, 1.0 - np.abs(np.asarray(x, dtype=float)))


def p2_np(x):
    return np.full_like(np.asarray(x, dtype=float), 2.0)


def test_nguyen_tent_above_oscillation_is_empty():
    fv = nguyen_functional(Tent(), constant(2.0), 1.0)
    assert fv.value == 0.0
    assert fv.empty_superlevel


def test_nguyen_tent_small_delta_matches_riemann_oracle():
    # graded-separation Riemann sum over a box wide enough that the
    # neglected far pairs sit below the comparison tolerance
    ref = oracles.riemann_threshold_double(tent_np, p2_np, 0.01,
                                           (-2.4, 2.4), 2000, 2000)
    fv = nguyen_functional(Tent(), constant(2.0), 0.01)
    assert fv.value == pytest.approx(ref, rel=1e-3)


def test_nguyen_variable_exponent_matches_riemann_oracle():
    p = inverse_quadratic(2.0, 1.0)
    ref = oracles.riemann_threshold_double(
        tent_np, lambda x: 2.0 + 1.0 / (1.0 + np.asarray(x, float) ** 2),
        0.05, (-3.0, 3.0), 2000, 2000)
    fv = nguyen_functional(Tent(), p, 0.05)
    assert fv.value == pytest.approx(ref, rel=1e-3)


def test_nguyen_zero_field():
    fv = nguyen_functional(Gaussian(scale=0.0), constant(2.0), 0.1)
    assert fv.value == 0.0 and fv.empty_superlevel


def test_empty_superlevel_iff_delta_reaches_oscillation():
    # tent oscillation is exactly 1 (continuous, known sup)
    below = nguyen_functional(Tent(), constant(2.0), 0.9)
    at = nguyen_functional(Tent(), constant(2.0), 1.0)
    assert not below.empty_superlevel and below.value > 0.0
    assert at.empty_superlevel and at.value == 0.0


def test_h_max_override_consistent():
    u, p = Tent(), constant(2.0)
    base = nguyen_functional(u, p, 0.05)
    capped = nguyen_functional(u, p, 0.05,
                               quad=QuadratureSpec(h_max=1e4))
    assert capped.value == pytest.approx(base.value, rel=1e-9)


def test_local_energy_tent_p2():
    # |u'| = 1 on (-1, 1) and K_{1,2} = 1, so the energy is 2
    fv = local_energy(Tent(), constant(2.0))
    assert fv.value == pytest.approx(2.0, rel=1e-10)


def test_local_energy_gaussian_p2():
    # integral of 4 x^2 e^{-2x^2} is sqrt(pi/2), by hand
    fv = local_energy(Gaussian(), constant(2.0))
    assert fv.value == pytest.approx(math.sqrt(math.pi / 2), rel=1e-9)


def test_local_energy_weighted_constant_ratio_exact():
    u, p = Gaussian(), constant(2.0)
    unit = local_energy(u, p, "unit").value
    weighted = local_energy(u, p, "p_of_x").value
    assert weighted == 2.0 * unit  # bitwise: scaling by 2 is exact


def test_nguyen_weighted_constant_ratio_exact():
    u, p = Gaussian(), constant(2.0)
    unit = nguyen_functional(u, p, 0.05, "unit").value
    weighted = nguyen_functional(u, p, 0.05, "p_of_x").value
    assert weighted == pytest.approx(2.0 * unit, rel=1e-14)


def test_exact_antiderivative_matches_adaptive_quadrature(rng):
    # the closed-form inner integral against adaptive quadrature of
    # h^{-p-1} on random superlevel intervals
    for _ in range(10):
        a = rng.uniform(0.05, 1.0)
        b = a + rng.uniform(0.1, 4.0)
        p = rng.uniform(1.1, 5.0)
        closed = (a ** (-p) - b ** (-p)) / p
        res = adaptive_integrate(lambda h: h ** (-p - 1.0), a, b,
                                 rel_tol=1e-13)
        assert res.value == pytest.approx(closed, rel=1e-10)


def test_superlevel_monotone_in_delta():
    u = Gaussian()
    quad = QuadratureSpec()
    X = np.array([[0.3], [0.9], [1.7]])
    omega = np.array([1.0])
    iv1, _ = superlevel_intervals(u, X, omega, 0.05, quad)
    iv2, _ = superlevel_intervals(u, X, omega, 0.1, quad)

    def member(ivs, h):
        return any(a <= h <= b for a, b in ivs)

    for row1, row2 in zip(iv1, iv2):
        for a, b in row2:
            for h in np.linspace(a, min(b, a + 50.0), 20):
                assert member(row1, h)


def test_superlevel_respects_lipschitz_floor():
    u = Gaussian()
    quad = QuadratureSpec()
    X = np.array([[0.5]])
    ivs, _ = superlevel_intervals(u, X, np.array([1.0]), 0.2, quad)
    floor = 0.2 / u.lipschitz_bound
    for a, _b in ivs[0]:
        assert a >= 0.99 * floor


def test_eps_zero_field_all_modes():
    z = Gaussian(scale=0.0)
    for mode in ("full", "small_jump", "large_jump_tail"):
        fv = eps_functional(z, constant(2.0), 0.3, mode)
        assert fv.value == 0.0


def test_eps_tent_large_jump_tail_empty():
    # tent oscillation is exactly 1; jumps never exceed the threshold
    fv = eps_functional(Tent(), constant(2.0), 0.3, "large_jump_tail")
    assert fv.value == 0.0 and fv.empty_superlevel


def test_eps_large_jump_tail_positive_for_tall_field():
    fv = eps_functional(Gaussian(scale=3.0), constant(2.0), 0.3,
                        "large_jump_tail")
    assert fv.value > 0.0 and not fv.empty_superlevel


def test_eps_full_gaussian_matches_riemann_oracle():
    ref = oracles.riemann_eps_double(
        lambda x: np.exp(-np.asarray(x, float) ** 2), p2_np, 0.4,
        (-7.0, 7.0), 2000, 3000)
    fv = eps_functional(Gaussian(), constant(2.0), 0.4, "full")
    assert fv.value == pytest.approx(ref, rel=2e-3)


def test_eps_small_jump_equals_full_for_unit_oscillation():
    # gaussian jumps stay below 1, so the restriction changes nothing
    u, p = Gaussian(), constant(2.0)
    full = eps_functional(u, p, 0.25, "full").value
    small = eps_functional(u, p, 0.25, "small_jump").value
    assert small == pytest.approx(full, rel=1e-9)


def test_eps_small_jump_differs_for_tall_field():
    u, p = Gaussian(scale=3.0), constant(2.0)
    full = eps_functional(u, p, 0.25, "full").value
    small = eps_functional(u, p, 0.25, "small_jump").value
    tail = eps_functional(u, p, 0.25, "large_jump_tail").value
    assert small < full
    assert tail > 0.0


def test_bbm_zero_and_scaling():
    pair_p = 2.0
    assert bbm_functional(Gaussian(scale=0.0), pair_p, 0.8).value == 0.0
    v1 = bbm_functional(Tent(), pair_p, 0.8).value
    v2 = bbm_functional(Tent(scale=2.0), pair_p, 0.8).value
    assert v2 == pytest.approx(4.0 * v1, rel=1e-9)


def test_bbm_tent_matches_riemann_oracle():
    s = 0.8
    S = oracles.riemann_gagliardo(tent_np, 2.0, s, (-60.0, 61.0))
    fv = bbm_functional(Tent(), 2.0, s)
    assert fv.value == pytest.approx((1.0 - s) * S, rel=2e-3)


def test_bbm_rejects_nonconstant_or_bad_s():
    with pytest.raises(DomainError):
        bbm_functional(Tent(), 2.0, 1.2)
    with pytest.raises(DomainError):
        bbm_functional(Tent(), 1.0, 0.5)


def test_layer_cake_unit_distance_preset():
    # int_0^1 (1-d)^2 dd = 1/3 = double integral of |x-y| on the unit box
    phi, psi, alpha, box, seeds = lemma41_preset("unit-distance")
    res = layer_cake_check(phi, psi, alpha, box, y_seeds=seeds)
    assert res.lhs == pytest.approx(1.0 / 3.0, rel=5e-7)
    assert res.rhs_small == pytest.approx(1.0 / 3.0, rel=5e-7)
    assert res.rhs_large == 0.0
    assert res.residual <= 1e-6


def test_layer_cake_always_large_preset():
    phi, psi, alpha, box, seeds = lemma41_preset("always-large")
    res = layer_cake_check(phi, psi, alpha, box, y_seeds=seeds)
    assert res.lhs == pytest.approx(1.0, rel=1e-9)
    assert res.rhs_large == pytest.approx(1.0, rel=1e-12)
    assert res.rhs_small == 0.0
    assert res.residual <= 1e-6


def test_layer_cake_random_smooth_vs_brute_oracle():
    phi, psi, alpha, box, seeds = lemma41_preset("random-smooth", seed=3)
    res = layer_cake_check(phi, psi, alpha, box, y_seeds=seeds)
    assert res.residual <= 1e-6
    lhs_b, small_b, large_b = oracles.layer_cake_brute(phi, psi, alpha, box)
    assert res.lhs == pytest.approx(lhs_b, rel=5e-3)
    assert res.rhs_small == pytest.approx(small_b, rel=5e-3)
    assert res.rhs_large == pytest.approx(large_b, rel=5e-3, abs=1e-6)


def test_layer_cake_rejects_alpha_at_minus_one():
    phi, psi, _, box, _ = lemma41_preset("unit-distance")
    with pytest.raises(DomainError):
        layer_cake_check(phi, psi, lambda x: np.full_like(
            np.asarray(x, float), -1.0), box)


def test_local_energy_gaussian_2d():
    # in the plane: K_{2,2} = pi/2 and the gradient square integral of
    # exp(-r^2) is pi (polar coordinates by hand), so the energy is pi^2/2
    u = Gaussian(dimension=2)
    p = constant(2.0, dimension=2)
    fv = local_energy(u, p)
    assert fv.value == pytest.approx(math.pi ** 2 / 2.0, rel=1e-7)


def test_nguyen_gaussian_2d_approaches_local_energy():
    from vexs import default_rule
    u = Gaussian(dimension=2)
    p = constant(2.0, dimension=2)
    quad = QuadratureSpec(sphere_rule=default_rule(2, 16),
                          h_bracket_grid=64, outer_x_tolerance=1e-4,
                          rel_tol=1e-4)
    target = math.pi ** 2 / 2.0
    fv = nguyen_functional(u, p, 0.1, "unit", quad)
    assert fv.value == pytest.approx(target, rel=0.05)


def test_uniform_bound_zero_field():
    chk = uniform_bound_check(Gaussian(scale=0.0), constant(2.0),
                              [0.1, 0.05])
    assert chk.sup_value == 0.0 and chk.rhs_bound == 0.0


def test_uniform_bound_tent_rhs():
    # both classical norms equal 2 for the tent at p = 2
    chk = uniform_bound_check(Tent(), constant(2.0), [0.2, 0.1])
    assert chk.rhs_bound == pytest.approx(4.0, rel=1e-9)
    assert chk.sup_value > 0.0
