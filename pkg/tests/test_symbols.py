"""Symbol evaluation, slices, norms, and growth classification."""

from fractions import Fraction

import pytest

from torsolve.errors import DomainError
from torsolve.forms import FrequencyBox
from torsolve.scalars import GaussianRational as Q
from torsolve.symbols import (
    SystemSpec,
    ToroidalSymbol,
    classify_growth,
    eval_symbol_slice,
    slice_norm,
    slice_norm_exact,
    system_from_json,
)


def test_slice_identity_symbol():
    spec = SystemSpec(1, 1, (ToroidalSymbol.linear(1),))
    L = eval_symbol_slice(spec, (2,), (-2,))
    assert L.is_zero()


def test_slice_zero_symbols():
    spec = SystemSpec(2, 1, (ToroidalSymbol.constant(0), ToroidalSymbol.constant(0)))
    L = eval_symbol_slice(spec, (3, -1), (0,))
    assert L.get((1,)) == 3j
    assert L.get((2,)) == -1j


def test_slice_rational_hand_case():
    spec = SystemSpec(2, 1, (ToroidalSymbol.linear(Fraction(1, 2)),
                             ToroidalSymbol.linear(Fraction(1, 3))))
    L = eval_symbol_slice(spec, (-1, -1), (2,), exact=True)
    assert L.get((1,)) is None  # -1 + 1 = 0 dropped
    assert L.get((2,)) == Q(0, Fraction(-1, 3))
    assert slice_norm_exact(L) == Fraction(1, 3)


def test_slice_norms():
    spec = SystemSpec(2, 1, (ToroidalSymbol.constant(0), ToroidalSymbol.constant(0)))
    assert slice_norm(eval_symbol_slice(spec, (3, -1), (0,))) == 3.0
    assert slice_norm(eval_symbol_slice(spec, (0, 0), (0,))) == 0.0
    from torsolve.forms import ConstPForm
    L = ConstPForm(2, 1, {(1,): 0.5j, (2,): -1.75j})
    assert slice_norm(L) == 1.75


def test_slice_norm_zero_iff_all_components_vanish_exact():
    spec = SystemSpec(2, 1, (ToroidalSymbol.linear(Fraction(1, 2)),
                             ToroidalSymbol.linear(Fraction(-2))))
    for eta, xi in [((-1, 4), (2,)), ((0, 0), (0,)), ((1, 1), (2,))]:
        L = eval_symbol_slice(spec, eta, xi, exact=True)
        norm = slice_norm_exact(L)
        expected_zero = all(
            eta[j] + Fraction((1, -4)[j], 2) * xi[0] == 0 for j in range(2))
        assert (norm == 0) == expected_zero


def test_homogeneous_symbol_exact_lattice_and_scaling():
    kappa = Fraction(1, 2)
    sym = ToroidalSymbol.homogeneous(Fraction(3), kappa)
    assert sym.evaluate((0,), exact=True) == Q(0)
    assert sym.evaluate((9,), exact=True) == Q(9)     # 3 * 9^(1/2)
    with pytest.raises(DomainError):
        sym.evaluate((2,), exact=True)
    # homogeneity p(2^mu xi) = 2^rho p(xi) on the exact sublattice
    rho, mu = kappa.numerator, kappa.denominator
    for s in (1, 2, 3, 5):
        xi = s**mu
        lhs = sym.evaluate((2**mu * xi,), exact=True)
        rhs = sym.evaluate((xi,), exact=True) * (2**rho)
        assert lhs == rhs


def test_order_bound_constant_is_finite_and_sharp():
    sym = ToroidalSymbol.linear(Fraction(1, 2))
    box = FrequencyBox(0, 32)
    c = sym.order_constant(box)
    # |xi/2| <= C <xi> with C close to 1/2 at large |xi|
    assert 0.45 < c <= 0.5


def test_classify_growth_reference_symbols():
    box = FrequencyBox(0, 2048)
    log_sym = ToroidalSymbol.logarithmic()
    assert classify_growth(log_sym, box).tag == "log"
    lin = ToroidalSymbol.linear(1)
    assert classify_growth(lin, box).tag == "superlog"
    const = ToroidalSymbol.constant(5)
    assert classify_growth(const, box).tag == "log"


def test_classify_growth_box_precondition():
    with pytest.raises(DomainError):
        classify_growth(ToroidalSymbol.constant(1), FrequencyBox(0, 8))


def test_symbol_sum_scale_closure():
    a = ToroidalSymbol.linear(Fraction(1, 2))
    b = ToroidalSymbol.constant(Fraction(1, 3))
    s = ToroidalSymbol.sum(a, ToroidalSymbol.scaled(b, 3))
    assert s.evaluate((4,), exact=True) == Q(3)


def test_system_json_round_trip():
    doc = {
        "n": 2, "N": 1,
        "symbols": [
            {"kind": "polynomial", "coeffs": {"1": "1/2"}, "order": 1},
            {"kind": "polynomial", "coeffs": {"1": "1/3"}, "order": 1},
        ],
        "coefficients": [{"j": 1, "kind": "constant", "data": "2"}],
    }
    spec = system_from_json(doc)
    assert spec.n == 2
    assert spec.symbols[0].evaluate((2,), exact=True) == Q(2)   # 2 * (2/2)
    assert spec.symbols[1].evaluate((3,), exact=True) == Q(1)


def test_tabulated_symbol():
    sym = ToroidalSymbol.tabulated({(1,): Fraction(1, 2), (-1,): 3}, order=1.0)
    assert sym.evaluate((1,), exact=True) == Q(Fraction(1, 2))
    assert sym.evaluate((5,)) == 0j
