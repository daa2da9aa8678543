"""Continued fractions, rationality detection, truncation witnesses, SDA."""

from fractions import Fraction

import pytest

from torsolve.diophantine import (
    NotRationalAtPrecision,
    RationalVector,
    SDANotFound,
    SDAWitness,
    characterize_homogeneous,
    continued_fraction,
    detect_rational,
    liouville_constant,
    liouville_truncations,
    rational_lowerbound,
    sda_search,
)
from torsolve.errors import DomainError, ResourceError
from torsolve.scalars import sqrt_fraction


def golden_50() -> Fraction:
    return (1 + sqrt_fraction(Fraction(5), 50)) / 2


def test_continued_fraction_golden_is_fibonacci():
    convs = continued_fraction(golden_50(), 8)
    assert convs == [(1, 1), (2, 1), (3, 2), (5, 3), (8, 5), (13, 8),
                     (21, 13), (34, 21)]


def test_continued_fraction_terminates_on_rationals():
    convs = continued_fraction(Fraction(1, 2), 10)
    assert convs[-1] == (1, 2)


def test_convergent_quality_classical_bound():
    for x in (golden_50(), sqrt_fraction(Fraction(2), 50),
              Fraction(355, 113) / 1):
        convs = continued_fraction(x, 12)
        for p, q in convs:
            if q > 1:
                assert abs(x - Fraction(p, q)) < Fraction(1, q * q)


def test_continued_fraction_of_truncation_shows_factorial_denominators():
    L = liouville_constant(3)
    qs = {q for _, q in continued_fraction(L, 40)}
    assert 10 in qs or 100 in qs  # early factorial shapes appear


def test_detect_rational_exact():
    rv = detect_rational([Fraction(1, 2), Fraction(1, 3)])
    assert isinstance(rv, RationalVector)
    assert rv.q0 == 6
    rv0 = detect_rational([Fraction(0), Fraction(0)])
    assert rv0.q0 == 1


def test_detect_rational_golden_at_precision():
    # a 50-digit decimal stand-in: no small-denominator convergent matches
    res = detect_rational(["1.6180339887498948482045868343656381177203091798058"])
    assert isinstance(res, NotRationalAtPrecision)
    ps = [p for p, q in res.convergents[0][:6]]
    assert ps[:5] == [1, 2, 3, 5, 8]


def test_detect_rational_decimal_simple():
    res = detect_rational(["0.5", "0.25"])
    assert isinstance(res, RationalVector)
    assert res.q0 == 4
    assert res.precision_limited


def test_liouville_truncations_values():
    ts = liouville_truncations(3)
    assert (ts[0].p, ts[0].q) == (1, 10)
    assert (ts[1].p, ts[1].q) == (11, 100)
    assert (ts[2].p, ts[2].q) == (110001, 10**6)


def test_liouville_truncations_certified_bounds():
    deep = liouville_constant(5)
    for t in liouville_truncations(4):
        err = abs(deep - t.value())
        assert err < t.tail_bound
        if t.ell >= 2:
            assert t.tail_bound < Fraction(1, t.q**t.ell)
            assert err < Fraction(1, t.q**t.ell)


def test_liouville_truncations_resource_guard():
    with pytest.raises(ResourceError):
        liouville_truncations(6)


def test_sda_search_golden_none_found():
    res = sda_search([golden_50()], mu=1, q_max=10**4)
    assert isinstance(res, SDANotFound)
    assert 1.8 < res.best_exponent < 2.6


def test_sda_search_liouville_constant_witnessed():
    res = sda_search([liouville_constant(5)], mu=1, q_max=10**4)
    assert isinstance(res, SDAWitness)
    assert [t.ell for t in res.terms] == [1, 2, 3]


def test_sda_search_rejects_generic_surd_pairs_at_power_settings():
    res = sda_search([("sqrt", Fraction(2)), ("sqrt", Fraction(3))],
                     mu=2, q_max=10**4, ell_target=2, c_const=64)
    assert isinstance(res, SDANotFound)


def test_sda_search_power_vector_witnessed():
    L4 = liouville_constant(4)
    alpha = [("sqrt", Fraction(3, 2) * L4 * L4), ("sqrt", Fraction(6) * L4 * L4)]
    res = sda_search(alpha, mu=2, q_max=10**4, ell_target=2, c_const=64)
    assert isinstance(res, SDAWitness)
    assert [t.ell for t in res.terms] == [1, 2]
    # every term is exact and respects its bound with room to state it
    for t in res.terms:
        assert 0 < t.err < t.bound


def test_rational_lowerbound_scalar_half():
    rv = detect_rational([Fraction(1, 2)])
    lb = rational_lowerbound(rv)
    assert lb.c0 == Fraction(1, 2)
    assert lb.c0_sharp == Fraction(1, 2)


def test_rational_lowerbound_pair_enumeration():
    rv = detect_rational([Fraction(1, 2), Fraction(1, 3)])
    lb = rational_lowerbound(rv)
    # finite enumeration oracle over r in 1..5
    def dist(x):
        fl = x - int(x) if x >= 0 else x - (int(x) - 1)
        return min(fl, 1 - fl)

    lattice = min(max(dist(Fraction(r, 2)) / r, dist(Fraction(r, 3)) / r)
                  for r in range(1, 6))
    sharp = min(max(dist(Fraction(r, 2)), dist(Fraction(r, 3)))
                for r in range(1, 6))
    assert lb.c0 == lattice == Fraction(1, 12)
    assert lb.c0_sharp == sharp == Fraction(1, 3)


def test_rational_lowerbound_integral_sentinel():
    rv = detect_rational([Fraction(2), Fraction(-1)])
    lb = rational_lowerbound(rv)
    assert lb.infinite


def test_characterize_homogeneous_rational_solvable():
    rep = characterize_homogeneous([Fraction(1, 2), Fraction(2, 3)], Fraction(1, 2))
    assert rep.verdict.tag == "rational"
    assert rep.solvable_empirical
    assert not rep.lower_bound.infinite


def test_characterize_homogeneous_nonreal_solvable():
    rep = characterize_homogeneous(["0.0", "0.0"], Fraction(1, 2), imag=[1, 1])
    assert rep.verdict.tag == "solvable_nonreal"
    assert rep.solvable_empirical


def test_characterize_homogeneous_example_dichotomy():
    L4 = liouville_constant(4)
    alpha = [("sqrt", Fraction(3, 2) * L4 * L4), ("sqrt", Fraction(6) * L4 * L4)]
    low = characterize_homogeneous(alpha, Fraction(1, 2), box_xi=600)
    assert low.verdict.tag == "sda_witnessed"
    assert low.solvable_empirical is False
    high = characterize_homogeneous(alpha, Fraction(1), box_xi=600)
    assert high.verdict.tag == "no_witness_found"
    assert high.solvable_empirical is True
    assert not high.scan.sub_polynomial_found


def test_characterize_homogeneous_rejects_bad_kappa():
    with pytest.raises(DomainError):
        characterize_homogeneous([Fraction(1, 2)], Fraction(-1, 2))


def test_remark_pair_components_witnessed_but_pair_is_not():
    # externally sourced phenomenon (flagged as such in the scenario):
    # interleaved continued-fraction spikes give each drift its own
    # escalating approximations while no common denominator serves both;
    # checked at the declared desk bounds only
    from torsolve.diophantine import SDAWitness
    from torsolve.scenarios import scenario_remark_pair

    sc = scenario_remark_pair()
    a1, a2 = sc["alpha"]
    assert isinstance(sda_search([a1], mu=1, q_max=10**4), SDAWitness)
    assert isinstance(sda_search([a2], mu=1, q_max=10**4), SDAWitness)
    pair = sda_search([a1, a2], mu=1, q_max=10**4)
    assert isinstance(pair, SDANotFound)
    assert pair.best_exponent < 2.8
