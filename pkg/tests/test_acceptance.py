"""Acceptance suite: the package's exit criteria.

One test per criterion; each prints a single pass/fail line with its
runtime (run with ``pytest tests/test_acceptance.py -s`` to see them
live). Tolerances are pinned here, not configurable.
"""

import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction
from itertools import product

import numpy as np

from torsolve.diophantine import (
    SDANotFound,
    characterize_homogeneous,
    detect_rational,
    liouville_constant,
    liouville_truncations,
    rational_lowerbound,
    sda_search,
)
from torsolve.forms import (
    FrequencyBox,
    TrigPForm,
    TrigPoly,
    combinations_increasing,
    random_const_form,
)
from torsolve.normal_form import (
    CoefficientProfile,
    check_condition_D,
    decompose,
    verify_conjugation,
)
from torsolve.scalars import GaussianRational as Q
from torsolve.scalars import sqrt_fraction
from torsolve.scenarios import (
    scenario_example_47,
    scenario_homogeneous_example,
    scenario_signed_supports,
)
from torsolve.spectral import (
    WitnessSequence,
    WitnessTerm,
    apply_operator,
    build_witness,
    demonstrate_blowup,
    divisor_scan,
    solve_constant,
    validate_witness,
)
from torsolve.symbols import SystemSpec, ToroidalSymbol, eval_symbol_slice
from torsolve.wedge_solver import wedge_divide

from test_wedge_solver import exhaustive_grid_forms


@contextmanager
def criterion(num: int, budget_s: float, summary: str):
    t0 = time.time()
    try:
        yield
    except BaseException:
        print(f"[criterion {num}] FAIL ({time.time() - t0:.1f}s) {summary}")
        raise
    elapsed = time.time() - t0
    status = "PASS" if elapsed <= budget_s else "FAIL (over budget)"
    print(f"[criterion {num}] {status} ({elapsed:.1f}s <= {budget_s:.0f}s) {summary}")
    assert elapsed <= budget_s, f"runtime {elapsed:.1f}s exceeds {budget_s}s"


def test_criterion_1_wedge_division_oracle():
    with criterion(1, 60.0, "wedge-division identity, exhaustive + randomized"):
        checked = 0
        for n in (1, 2, 3):
            for L in exhaustive_grid_forms(n, 1, -2, 2):
                if L.is_zero():
                    continue
                for p1 in range(1, n + 1):
                    for F in exhaustive_grid_forms(n, p1, -2, 2):
                        if F.is_zero() or not L.wedge(F).is_zero():
                            continue
                        U = wedge_divide(L, F)
                        assert L.wedge(U).equals(F)
                        checked += 1
        assert checked > 1000
        rng = random.Random(123)
        trials = 0
        while trials < 10**4:
            n = rng.choice((4, 5))
            p = rng.randint(0, n - 1)
            L = random_const_form(rng, n, 1, exact=True)
            if L.is_zero():
                continue
            F = L.wedge(random_const_form(rng, n, p, exact=True))
            if F.is_zero():
                continue
            U = wedge_divide(L, F)
            assert L.wedge(U).equals(F)
            trials += 1


def _integer_polynomial_spec():
    return SystemSpec(2, 1, (
        ToroidalSymbol.polynomial({(0,): 2, (1,): 3}),
        ToroidalSymbol.polynomial({(1,): -1, (2,): 1}),
    ))


def test_criterion_2_manufactured_round_trip():
    with criterion(2, 10.0, "manufactured solutions, box 8, with growth bound"):
        spec = _integer_polynomial_spec()
        box = FrequencyBox(8, 8)
        scan = divisor_scan(spec, box, mode="exhaustive")
        rng = random.Random(7)
        for p in (0, 1):
            coeffs = {}
            for K in combinations_increasing(2, p):
                for eta in box.iter_eta(2):
                    for xi in box.iter_xi(1):
                        if rng.random() < 0.08:
                            coeffs[(K, eta, xi)] = complex(rng.gauss(0, 1),
                                                           rng.gauss(0, 1))
            u = TrigPForm(2, 1, p, coeffs)
            f = apply_operator(spec, u)
            result = solve_constant(spec, f, scan=scan)
            residual = apply_operator(spec, result.u).sub(f).max_abs()
            assert residual <= 1e-10, f"residual {residual:.2e}"
            # per-frequency solution bound against the certified envelope
            assert scan.c_hat > 0
            for (eta, xi), sl in result.u.by_frequency().items():
                L = eval_symbol_slice(spec, eta, xi)
                if L.max_abs() <= 1e-9:
                    continue
                radius = max(max(map(abs, eta)), max(map(abs, xi)), 1)
                cap = (1 / scan.c_hat) * radius**scan.lambda_hat * \
                    f.slice_at(eta, xi).max_abs()
                assert sl.max_abs() <= cap * (1 + 1e-9)
            assert not result.bound_violations


def test_criterion_3_rational_lower_bound():
    with criterion(3, 30.0, "rational drift: exact bound vs brute force"):
        a = (Fraction(1, 2), Fraction(1, 3))
        rv = detect_rational(list(a))
        assert rv.q0 == 6
        lb = rational_lowerbound(rv)

        # brute-force oracle on the +-1000 box in exact scaled integers;
        # the minimum over eta of the componentwise max splits by axis
        R = 1000
        etas = np.arange(-R, R + 1, dtype=np.int64)
        best = None
        for xi in range(-R, R + 1):
            if xi % 6 == 0:
                continue
            m1 = np.abs(6 * etas + 3 * xi).min()   # |eta_1 + xi/2| * 6
            m2 = np.abs(6 * etas + 2 * xi).min()   # |eta_2 + xi/3| * 6
            val = Fraction(int(max(m1, m2)), 6)
            if best is None or val < best:
                best = val
        assert best == lb.c0_sharp == Fraction(1, 3)
        assert lb.c0 == Fraction(1, 12)

        spec = SystemSpec(2, 1, tuple(ToroidalSymbol.linear(c) for c in a))
        scan = divisor_scan(spec, FrequencyBox(R, R), mode="critical")
        assert scan.min_record.norm_frac >= min(Fraction(1), lb.c0)
        assert scan.min_record.norm_frac >= min(Fraction(1), lb.c0_sharp)


def test_criterion_4_liouville_witness():
    with criterion(4, 60.0, "factorial-gap witness: scan, decay, blow-up"):
        a0 = liouville_constant(5)
        spec = SystemSpec(1, 1, (ToroidalSymbol.linear(a0),))

        # the scan exhibits the predicted divisors inside the box
        scan = divisor_scan(spec, FrequencyBox(10**6, 10**6), mode="critical")
        truncs = liouville_truncations(4)
        hits = {r.xi[0]: r for r in scan.offenders}
        for l, t in ((1, truncs[1]), (2, truncs[2])):     # levels 2 and 3
            assert t.q in hits
            rec = hits[t.q]
            assert rec.eta == (-t.p,)
            assert 0 < rec.norm_frac < Fraction(1, rec.radius**l)

        # the witness built from exact truncations (levels 2..4)
        terms = []
        for t in truncs[1:]:
            err = abs(a0 * t.q - t.p)
            terms.append(WitnessTerm((-t.p,), (t.q,), float(err), t.q,
                                     Fraction(err)))
        ws = WitnessSequence(terms, Fraction(1, 4))
        validate_witness(spec, ws)
        art = build_witness(spec, ws, p=0)
        assert art.compat.ok
        assert all(c.exact and c.decay_ok for c in art.certificates)

        report = demonstrate_blowup(spec, ws, p=0, lambda_cap=10.0)
        assert report.exceeded
        # forced coefficients overwhelm the two-term power-law fit within
        # the third term, and the implied exponents escalate monotonically
        assert report.prefix_fits[-1].prefix == 2
        assert report.prefix_fits[-1].violation_factor > 1e3
        assert all(report.pairwise_lambda[i] < report.pairwise_lambda[i + 1]
                   for i in range(len(report.pairwise_lambda) - 1))
        assert all(f.lambda_fit <= 10.0 for f in report.prefix_fits)


def test_criterion_5_golden_ratio_control():
    with criterion(5, 10.0, "golden drift: no witness, divisor product bound"):
        phi = (1 + sqrt_fraction(Fraction(5), 50)) / 2
        res = sda_search([phi], mu=1, q_max=10**4)
        assert isinstance(res, SDANotFound)
        assert 1.7 < res.best_exponent < 2.7     # Hurwitz regime

        worst = None
        for q in range(1, 10**4 + 1):
            v = phi * q
            r = v - math.floor(v + Fraction(1, 2))
            prod = q * abs(r)
            if worst is None or prod < worst:
                worst = prod
        assert worst >= Fraction(38, 100)        # theory: 1/sqrt(5) ~ 0.447


def test_criterion_6_homogeneous_dichotomy():
    with criterion(6, 120.0, "power-coupled pair: witnessed vs clean scan"):
        low = scenario_homogeneous_example(Fraction(1, 4))    # kappa = 1/2
        rep_low = characterize_homogeneous(low["alpha"], low["kappa"],
                                           box_xi=1000, digits=50)
        assert rep_low.mu == 2
        assert rep_low.verdict.tag == "sda_witnessed"
        assert rep_low.solvable_empirical is False

        high = scenario_homogeneous_example(Fraction(1, 2))   # kappa = 1
        rep_high = characterize_homogeneous(high["alpha"], high["kappa"],
                                            box_xi=1000, digits=50)
        assert rep_high.mu == 1
        assert rep_high.verdict.tag == "no_witness_found"
        assert not rep_high.scan.sub_polynomial_found
        assert rep_high.solvable_empirical is True


def test_criterion_7_conjugation_identity():
    with criterion(7, 60.0, "conjugation sandwich, box 8, 20 trials per level"):
        sc = scenario_example_47()
        box = FrequencyBox(8, 8)
        report = verify_conjugation(sc["profile"], sc["spec"], box, trials=20,
                                    p_list=(0, 1, 2), rng=random.Random(0),
                                    tail_tol=1e-10)
        worst = max(report.residuals.values())
        assert worst <= 1e-8, f"max residual {worst:.2e}"
        for p, (full, half) in report.halving.items():
            # halving the cap moves the residual up by orders of magnitude:
            # the gap is bandwidth-truncation dominated
            assert half > 1e4 * max(full, 1e-300) or half > 1e-6


def test_criterion_8_condition_reports():
    with criterion(8, 10.0, "growth condition: three reference behaviors"):
        # real coefficients: supremum identically one, exponent exactly zero
        profile = CoefficientProfile.decoupled(
            [{0: 1.0 + 0j, 1: 0.5 + 0j, -1: 0.5 + 0j}])
        spec = SystemSpec(1, 1, (ToroidalSymbol.linear(1),))
        nf = decompose(profile, spec, FrequencyBox(2, 8))
        rep = check_condition_D(nf)
        assert all(s == 1.0 for _, s, _ in rep.per_xi)
        assert rep.kappa == 0.0 and rep.passes

        # nonpositive data against the piecewise symbol: never above one
        sc = scenario_signed_supports()
        nf2 = decompose(sc["profile"], sc["spec"], sc["box"])
        rep2 = check_condition_D(nf2)
        assert all(s <= 1.0 + 1e-12 for _, s, _ in rep2.per_xi)
        assert rep2.passes

        # positive coefficient against super-log imaginary order: flagged
        profile3 = CoefficientProfile.decoupled(
            [{0: 1.0 + 0j, 1: 0.25 + 0j, -1: 0.25 + 0j}])
        spec3 = SystemSpec(1, 1, (ToroidalSymbol.polynomial({(1,): Q(0, 1)}),))
        nf3 = decompose(profile3, spec3, FrequencyBox(2, 16))
        rep3 = check_condition_D(nf3)
        assert rep3.super_polynomial and not rep3.passes


def _random_exact_form(rng, n, N, degree, terms=4):
    keys = list(combinations_increasing(n, degree))
    coeffs = {}
    for _ in range(terms):
        K = rng.choice(keys)
        eta = tuple(rng.randint(-2, 2) for _ in range(n))
        xi = tuple(rng.randint(-1, 1) for _ in range(N))
        coeffs[(K, eta, xi)] = Q(rng.randint(-2, 2), rng.randint(-2, 2))
    return TrigPForm(n, N, degree, coeffs)


def _random_closed_setup(rng):
    """Random system + closed coefficient profile in exact arithmetic."""
    n = rng.choice((2, 3))
    kind = rng.random()
    symbols = tuple(
        ToroidalSymbol.polynomial({(0,): Fraction(rng.randint(-2, 2)),
                                   (1,): Fraction(rng.randint(-2, 2), 1)})
        for _ in range(n))
    if kind < 0.4:
        return SystemSpec(n, 1, symbols), None, n
    if kind < 0.75:
        coeffs = []
        for _ in range(n):
            coeffs.append({0: Q(rng.randint(-2, 2), rng.randint(-1, 1)),
                           1: Q(Fraction(rng.randint(-2, 2), 2)),
                           -1: Q(Fraction(rng.randint(-2, 2), 2))})
        return SystemSpec(n, 1, symbols), CoefficientProfile.decoupled(coeffs), n
    # equal symbols with a potential-built profile: closed by symmetry
    sym = ToroidalSymbol.polynomial({(1,): Fraction(rng.randint(1, 3))})
    eq_symbols = tuple(sym for _ in range(n))
    phi_coeffs = {}
    for _ in range(3):
        eta = tuple(rng.randint(-1, 1) for _ in range(n))
        phi_coeffs[eta] = Q(rng.randint(-2, 2), rng.randint(-2, 2))
    phi = TrigPoly(n, phi_coeffs)
    profile = CoefficientProfile(n, [
        phi.partial(j).add(TrigPoly.constant(n, Q(rng.randint(-2, 2))))
        for j in range(1, n + 1)])
    return SystemSpec(n, 1, eq_symbols), profile, n


def test_criterion_9_complex_property():
    with criterion(9, 30.0, "twice-applied operator vanishes exactly"):
        rng = random.Random(31)
        for _ in range(1000):
            spec, profile, n = _random_closed_setup(rng)
            p = rng.randint(0, n - 1)
            u = _random_exact_form(rng, n, 1, p)
            once = apply_operator(spec, u, profile=profile)
            twice = apply_operator(spec, once, profile=profile)
            assert twice.is_zero(), "operator square failed to vanish"
