"""Decomposition, growth condition, multiplier, conjugation, classifier."""

import random

import numpy as np
import pytest

from torsolve.errors import ClosednessError
from torsolve.forms import FrequencyBox, TrigPoly
from torsolve.normal_form import (
    CoefficientProfile,
    check_condition_D,
    classify_decoupled,
    decompose,
    normal_form_system,
    psi_apply,
    random_trig_form,
    sign_change,
    verify_conjugation,
)
from torsolve.scalars import GaussianRational as Q
from torsolve.scenarios import scenario_example_47, scenario_signed_supports
from torsolve.spectral import apply_operator
from torsolve.symbols import SystemSpec, ToroidalSymbol


def cos_coeffs(amp=1.0):
    return {1: amp / 2 + 0j, -1: amp / 2 + 0j}


def simple_profile(n=1, amp=1.0, mean=1.0):
    c = {0: mean + 0j}
    c.update(cos_coeffs(amp))
    return CoefficientProfile.decoupled([dict(c) for _ in range(n)])


def test_decompose_constant_profile_trivial():
    profile = CoefficientProfile.decoupled([{0: 2.0 + 0j}])
    spec = SystemSpec(1, 1, (ToroidalSymbol.linear(1),))
    nf = decompose(profile, spec, FrequencyBox(2, 2))
    assert all(not pot.coeffs for pot in nf.potentials.values())


def test_decompose_cosine_gives_base_point_sine():
    # c(t) = cos t + mean: potential per xi is p(xi) sin t (zero at 0)
    profile = simple_profile()
    spec = SystemSpec(1, 1, (ToroidalSymbol.linear(1),))
    nf = decompose(profile, spec, FrequencyBox(2, 2))
    pot = nf.potentials[(2,)]
    # sin t = -i/2 e^{it} + i/2 e^{-it}, scaled by p(2) = 2
    assert abs(complex(pot.coeffs[(1,)]) - 2 * (-0.5j)) < 1e-14
    assert abs(complex(pot.coeffs[(-1,)]) - 2 * (0.5j)) < 1e-14
    grid = pot.eval_grid(64)
    assert abs(grid[0]) < 1e-12                      # vanishes at t = 0
    t = 2 * np.pi * np.arange(64) / 64
    assert np.allclose(grid, 2 * np.sin(t), atol=1e-12)


def test_decompose_exactness_identity():
    # d_t potential + mean form = c(., xi) coefficientwise
    rng = random.Random(9)
    for n in (1, 2):
        coeffs = []
        for _ in range(n):
            coeffs.append({0: complex(rng.uniform(-1, 1), rng.uniform(-1, 1)),
                           1: complex(rng.uniform(-0.5, 0.5)),
                           -1: complex(rng.uniform(-0.5, 0.5))})
        profile = CoefficientProfile.decoupled(coeffs)
        spec = SystemSpec(n, 1, tuple(ToroidalSymbol.linear(1) for _ in range(n)))
        box = FrequencyBox(2, 2)
        nf = decompose(profile, spec, box)
        for xi in box.iter_xi(1):
            pot = nf.potentials[xi]
            mean = nf.mean_form(xi)
            for j in range(1, n + 1):
                d = pot.partial(j)
                target = profile.coefficients[j - 1].scale(
                    complex(spec.symbols[j - 1].evaluate(xi)))
                for eta in set(d.coeffs) | set(target.coeffs):
                    lhs = complex(d.coeffs.get(eta, 0))
                    rhs = complex(target.coeffs.get(eta, 0))
                    if all(e == 0 for e in eta):
                        rhs -= mean[j - 1]
                    assert abs(lhs - rhs) < 1e-12


def test_decompose_rejects_nonclosed():
    # c_1 depending on t_2 with distinct symbols violates closedness
    c1 = TrigPoly(2, {(0, 1): 1.0 + 0j, (0, -1): 1.0 + 0j})
    c2 = TrigPoly(2, {(0, 0): 1.0 + 0j})
    profile = CoefficientProfile(2, [c1, c2])
    spec = SystemSpec(2, 1, (ToroidalSymbol.linear(1), ToroidalSymbol.linear(2)))
    with pytest.raises(ClosednessError):
        decompose(profile, spec, FrequencyBox(2, 2))


def test_condition_d_real_profile_is_identically_one():
    profile = simple_profile()
    spec = SystemSpec(1, 1, (ToroidalSymbol.linear(1),))
    nf = decompose(profile, spec, FrequencyBox(2, 8))
    report = check_condition_D(nf)
    assert report.mode == "integral"
    assert all(s == 1.0 for _, s, _ in report.per_xi)
    assert report.kappa == 0.0
    assert report.passes


def test_condition_d_signed_supports_stays_at_one():
    sc = scenario_signed_supports()
    nf = decompose(sc["profile"], sc["spec"], sc["box"])
    report = check_condition_D(nf)
    assert all(s <= 1.0 + 1e-12 for _, s, _ in report.per_xi)
    assert report.passes


def test_condition_d_log_symbol_with_bounded_coefficients_passes():
    # complex bounded coefficient against a log-growth symbol: the
    # supremum grows like a power of |xi| and the fit stays polynomial
    profile = CoefficientProfile.decoupled(
        [{0: 1.0 + 0.5j, 1: 0.25 + 0.25j, -1: 0.25 - 0.1j}])
    spec = SystemSpec(1, 1, (ToroidalSymbol.logarithmic(),))
    nf = decompose(profile, spec, FrequencyBox(2, 64))
    report = check_condition_D(nf)
    assert report.passes
    assert not report.super_polynomial


def test_condition_d_flags_positive_coefficient_superlog():
    # a > 0 against a super-log imaginary symbol order: exp(xi * int a)
    profile = CoefficientProfile.decoupled([{0: 1.0 + 0j, **cos_coeffs(0.5)}])
    spec = SystemSpec(1, 1, (ToroidalSymbol.polynomial({(1,): Q(0, 1)}),))  # i xi
    nf = decompose(profile, spec, FrequencyBox(2, 16))
    report = check_condition_D(nf)
    assert report.super_polynomial
    assert not report.passes


def test_psi_identity_for_zero_potential():
    profile = CoefficientProfile.decoupled([{0: 1.5 + 0j}])
    spec = SystemSpec(1, 1, (ToroidalSymbol.linear(1),))
    box = FrequencyBox(3, 3)
    nf = decompose(profile, spec, box)
    rng = random.Random(1)
    u = random_trig_form(rng, 1, 1, 0, box)
    v = psi_apply(nf, u, "forward")
    assert v.sub(u).max_abs() < 1e-14


def test_psi_matches_grid_multiplication_oracle():
    # n = 1: potential sin(t) p(xi); compare against direct grid multiply
    profile = simple_profile()
    spec = SystemSpec(1, 1, (ToroidalSymbol.linear(1),))
    box = FrequencyBox(4, 3)
    nf = decompose(profile, spec, box)
    rng = random.Random(3)
    u = random_trig_form(rng, 1, 1, 0, box)
    v = psi_apply(nf, u, "forward", cap_factor=8)
    grid = 256
    t = 2 * np.pi * np.arange(grid) / grid
    for xi_val in (-3, 0, 2):
        xi = (xi_val,)
        u_vals = np.zeros(grid, dtype=complex)
        for (K, eta, x), c in u.coeffs.items():
            if x == xi:
                u_vals += c * np.exp(1j * eta[0] * t)
        pot = xi_val * np.sin(t)
        expected = np.exp(-1j * pot) * u_vals
        got = np.zeros(grid, dtype=complex)
        for (K, eta, x), c in v.coeffs.items():
            if x == xi:
                got += complex(c) * np.exp(1j * eta[0] * t)
        assert np.abs(got - expected).max() < 1e-9


def test_psi_round_trip_random():
    sc = scenario_example_47()
    box = FrequencyBox(4, 4)
    nf = decompose(sc["profile"], sc["spec"], box)
    rng = random.Random(5)
    for p in (0, 1):
        u = random_trig_form(rng, 3, 1, p, box, fill=0.3)
        w = psi_apply(nf, u, "forward")
        back = psi_apply(nf, w, "inverse")
        diff = max(abs(complex(back.get(K, eta, xi) or 0) - complex(v))
                   for (K, eta, xi), v in u.coeffs.items())
        assert diff < 1e-9


def test_conjugation_constant_coefficients_is_exact():
    profile = CoefficientProfile.decoupled([{0: 1.5 + 0j}, {0: -0.5 + 0j}])
    spec = SystemSpec(2, 1, (ToroidalSymbol.linear(1), ToroidalSymbol.linear(2)))
    report = verify_conjugation(profile, spec, FrequencyBox(3, 3), trials=3,
                                p_list=(0, 1))
    assert max(report.residuals.values()) < 1e-12


def test_conjugation_example_47_small_box():
    sc = scenario_example_47()
    box = FrequencyBox(4, 4)
    report = verify_conjugation(sc["profile"], sc["spec"], box, trials=3,
                                p_list=(0, 1, 2), rng=random.Random(11))
    assert max(report.residuals.values()) <= 1e-8
    for p, (full, half) in report.halving.items():
        assert half > full or half < 1e-13


def test_conjugation_invariant_under_potential_constants():
    # per-xi constants cancel in the sandwich: not a way to break it
    sc = scenario_example_47()
    box = FrequencyBox(3, 3)
    nf = decompose(sc["profile"], sc["spec"], box)
    pot = nf.potentials[(3,)]
    pot.coeffs[(0, 0, 0)] = pot.coeffs.get((0, 0, 0), 0j) + (1.0 + 0.5j)
    report = verify_conjugation(sc["profile"], sc["spec"], box, trials=2,
                                p_list=(0,), nf=nf, halving_check=False,
                                cap_factor=8)
    assert max(report.residuals.values()) < 1e-10


def test_conjugation_negative_control_broken_potential():
    # breaking a genuine mode of the potential breaks d(potential) and
    # with it the identity: the residual must blow up
    sc = scenario_example_47()
    box = FrequencyBox(3, 3)
    nf = decompose(sc["profile"], sc["spec"], box)
    pot = nf.potentials[(3,)]
    key = (0, 1, 0)
    pot.coeffs[key] = pot.coeffs.get(key, 0j) + 0.3
    report = verify_conjugation(sc["profile"], sc["spec"], box, trials=2,
                                p_list=(0,), nf=nf, halving_check=False,
                                cap_factor=8)
    assert max(report.residuals.values()) > 1e-3


def test_classifier_example_47_all_members():
    sc = scenario_example_47()
    report = classify_decoupled(sc["profile"], sc["spec"], sc["classify_box"])
    assert report.members == [1, 2, 3]
    assert report.reduction_applies
    by_j = {e.j: e.condition for e in report.entries}
    assert by_j[1] == "log-symbol"
    assert by_j[2] == "re-log"
    assert by_j[3] == "im-log"


def test_classifier_sign_change_disqualifies():
    # a_2(t) = sin t changes sign, so the re-log condition fails
    profile = CoefficientProfile.decoupled([
        {0: 1.0 + 0j},
        {1: -0.5j, -1: 0.5j},       # sin t
    ])
    spec = SystemSpec(2, 1, (
        ToroidalSymbol.logarithmic(),
        ToroidalSymbol.polynomial({(0,): 1, (1,): Q(0, 1)}),
    ))
    report = classify_decoupled(profile, spec, FrequencyBox(0, 2048))
    by_j = {e.j: e for e in report.entries}
    assert by_j[2].condition is None
    assert not by_j[2].a_sign_fixed
    assert not report.reduction_applies


def test_classifier_signed_supports_outside_all_conditions():
    sc = scenario_signed_supports()
    report = classify_decoupled(sc["profile"], sc["spec"], sc["classify_box"])
    assert report.members == []
    # ... while the growth check passes: the two paths are independent
    nf = decompose(sc["profile"], sc["spec"], sc["box"])
    assert check_condition_D(nf).passes


def test_sign_change_certificates():
    assert sign_change({0: 1.0 + 0j, 1: 0.25 + 0j, -1: 0.25 + 0j}).changes_sign is False
    assert sign_change({1: -0.5j, -1: 0.5j}).changes_sign is True
    assert sign_change({}).changes_sign is False


def test_reduction_smoke_solve_through_the_multiplier():
    # solve the normal form for a manufactured right-hand side, carry the
    # solution through the multiplier, and verify it solves the
    # variable-coefficient problem against the transported data
    from torsolve.spectral import solve_constant

    sc = scenario_example_47()
    box = FrequencyBox(4, 4)
    nf = decompose(sc["profile"], sc["spec"], box)
    spec0 = normal_form_system(sc["spec"], sc["profile"])
    rng = random.Random(21)
    for p in (0, 1):
        u0 = random_trig_form(rng, 3, 1, p, box, fill=0.2)
        f0 = apply_operator(spec0, u0)
        solved = solve_constant(spec0, f0, tol=1e-9)
        u_var = psi_apply(nf, solved.u, "forward", cap_factor=6)
        f_var = psi_apply(nf, f0, "forward", cap_factor=6)
        lhs = apply_operator(sc["spec"], u_var, profile=sc["profile"])
        assert lhs.sub(f_var).max_abs() <= 1e-8


def test_normal_form_system_folds_means():
    profile = simple_profile(mean=2.0)
    spec = SystemSpec(1, 1, (ToroidalSymbol.linear(1),))
    spec0 = normal_form_system(spec, profile)
    assert complex(spec0.symbols[0].evaluate((3,))) == pytest.approx(6.0)
