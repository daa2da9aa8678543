"""Bundled reproducible scenarios.

Each scenario packages a system (plus coefficient profile where the
coefficients vary) together with the box and command defaults that make
the bundled experiments deterministic. All irrational data is carried by
exact rational stand-ins at a declared precision and stamped as such in
reports.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict

from .diophantine import RealInput, liouville_constant
from .errors import ConfigError
from .forms import FrequencyBox
from .normal_form import CoefficientProfile
from .scalars import GaussianRational, sqrt_fraction
from .symbols import SystemSpec, ToroidalSymbol

PRECISION_DIGITS = 50


def scenario_rational_a0() -> dict:
    """Two commuting fields with rational drift (1/2, 1/3) on T^3."""
    a = (Fraction(1, 2), Fraction(1, 3))
    spec = SystemSpec(2, 1, tuple(ToroidalSymbol.linear(c) for c in a))
    return {
        "name": "rational-a0",
        "spec": spec,
        "alpha": list(a),
        "box": FrequencyBox(1000, 1000),
        "digits": None,
        "notes": "rational drift: solvable with an exact positive divisor bound",
    }


def scenario_liouville_a0(level: int = 5) -> dict:
    """Single field whose drift is a factorial-gap truncation (stand-in
    for the classical constant with precision 10^-(level!))."""
    import math

    a0 = liouville_constant(level)
    digits = math.factorial(level)
    spec = SystemSpec(1, 1, (ToroidalSymbol.linear(a0),))
    return {
        "name": "liouville-a0",
        "spec": spec,
        "alpha": [RealInput(a0, digits)],
        "box": FrequencyBox(10**6, 10**6),
        "digits": digits,
        "truncation_level": level,
        "notes": "factorial-gap drift: witness terms at the truncation "
                 "denominators, no polynomial divisor bound",
    }


def scenario_golden_a0() -> dict:
    """Single field with the golden ratio drift at 50 digits: the
    badly-approximable control where no witness exists."""
    phi = (1 + sqrt_fraction(Fraction(5), PRECISION_DIGITS)) / 2
    spec = SystemSpec(1, 1, (ToroidalSymbol.linear(phi),))
    return {
        "name": "golden-a0",
        "spec": spec,
        "alpha": [RealInput(phi, PRECISION_DIGITS)],
        "box": FrequencyBox(10**4, 10**4),
        "digits": PRECISION_DIGITS,
        "notes": "badly approximable drift: divisor products stay bounded away "
                 "from zero (Hurwitz regime)",
    }


def _cf_value(quotients) -> Fraction:
    x = Fraction(quotients[-1])
    for a in reversed(quotients[:-1]):
        x = a + 1 / x
    return x


def scenario_remark_pair() -> dict:
    """Two drifts, each admitting escalating approximations on its own,
    whose pair admits none: spikes in the two continued fractions are
    interleaved so no common denominator serves both.

    The construction is a standard interleaved-partial-quotient pair
    (the cited source for the phenomenon is not reproduced here); the
    properties below are desk-scale checks at the declared bounds, not a
    proof of the asymptotic statement.
    """
    q1 = [0, 1, 1]
    q2 = [0, 1, 1]
    scale = 1
    for k in range(1, 7):
        spike = max(2, scale ** (k // 2 + 1))
        if k % 2 == 0:
            q1 += [spike, 1, 1]
            q2 += [1, 1, 1]
        else:
            q1 += [1, 1, 1]
            q2 += [spike, 1, 1]
        scale = max(scale * 8, 8)
    a1 = _cf_value(q1 + [2])
    a2 = _cf_value(q2 + [2])
    spec = SystemSpec(2, 1, (ToroidalSymbol.linear(a1), ToroidalSymbol.linear(a2)))
    return {
        "name": "remark-pair",
        "spec": spec,
        "alpha": [RealInput(a1, PRECISION_DIGITS), RealInput(a2, PRECISION_DIGITS)],
        "box": FrequencyBox(10**4, 10**4),
        "digits": PRECISION_DIGITS,
        "notes": "externally sourced phenomenon, reproduced with an "
                 "interleaved-spike construction and checked only at the "
                 "declared desk bounds",
    }


def scenario_homogeneous_example(dsq_exponent: Fraction) -> dict:
    """The power-coupled pair alpha = (sqrt(3/2) L, sqrt(6) L) built from
    the level-4 truncation, attached to symbols (xi^2)^e.

    The homogeneity order is kappa = 2 e; e = 1/4 lands in the power-2
    approximation regime (witnessed: not solvable), e = 1/2 in the
    plain regime where the same vector carries no witness (solvable).
    """
    e = Fraction(dsq_exponent)
    kappa = 2 * e
    L4 = liouville_constant(4)
    r1 = Fraction(3, 2) * L4 * L4
    r2 = Fraction(6) * L4 * L4
    alpha = [("sqrt", r1), ("sqrt", r2)]
    approx = [RealInput.parse(a, PRECISION_DIGITS).approx for a in alpha]
    spec = SystemSpec(2, 1, tuple(
        ToroidalSymbol.homogeneous(c, kappa) for c in approx))
    return {
        "name": f"homogeneous-dsq-{e}",
        "spec": spec,
        "alpha": alpha,
        "kappa": kappa,
        "box": FrequencyBox(1000, 1000),
        "digits": PRECISION_DIGITS,
        "notes": "power-coupled drift pair from the factorial truncation; "
                 "verdicts carry the precision stamp",
    }


def scenario_example_47() -> dict:
    """Three decoupled operators mixing log, complex-linear, and linear
    symbols; every index satisfies one reduction condition, so the
    variable-coefficient system conjugates to its normal form."""
    n = 3
    half8 = Fraction(1, 8)
    c1 = {0: GaussianRational(1), 1: GaussianRational(0, Fraction(-1, 8)),
          -1: GaussianRational(0, Fraction(1, 8))}           # 1 + sin(t)/4
    c2 = {0: GaussianRational(Fraction(-3, 2)),
          1: GaussianRational(half8 / 2), -1: GaussianRational(half8 / 2)}  # -3/2 + cos(t)/8
    c3 = {0: GaussianRational(2),
          1: GaussianRational(half8 / 2), -1: GaussianRational(half8 / 2)}  # 2 + cos(t)/8
    profile = CoefficientProfile.decoupled([c1, c2, c3])
    symbols = (
        ToroidalSymbol.logarithmic(),                         # log(1 + |xi|)
        ToroidalSymbol.polynomial({(0,): 1, (1,): GaussianRational(0, 1)}),  # 1 + i xi
        ToroidalSymbol.polynomial({(1,): 1}),                 # xi
    )
    spec = SystemSpec(n, 1, symbols)
    return {
        "name": "decoupled-mixed-growth",
        "spec": spec,
        "profile": profile,
        "box": FrequencyBox(8, 8),
        "classify_box": FrequencyBox(0, 2048),
        "digits": None,
        "notes": "all three indices satisfy a reduction condition; "
                 "conjugation to the normal form is verified numerically",
    }


def scenario_signed_supports() -> dict:
    """One operator with a piecewise tabulated symbol and strictly
    nonpositive coefficient data: outside every reduction condition,
    yet the oriented growth supremum stays at one."""
    X = 2048
    alpha_vals: Dict[tuple, Fraction] = {}
    beta_vals: Dict[tuple, Fraction] = {}
    for x in range(-X, X + 1):
        if x < 0 and x % 2 != 0:
            alpha_vals[(x,)] = Fraction(1, x)
        elif x <= 0:
            alpha_vals[(x,)] = Fraction(abs(x))
        else:
            alpha_vals[(x,)] = Fraction(0)
        beta_vals[(x,)] = Fraction(1) if x <= 0 else Fraction(x)
    sym_values = {k: GaussianRational(alpha_vals[k], beta_vals[k])
                  for k in alpha_vals}
    sym = ToroidalSymbol.tabulated(sym_values, order=1.0, label="piecewise")
    # c = a + i b with a = -6/5 - cos(s)/2 strictly negative and
    # b = -1/4 - sin(s)/4 nonpositive, oscillating in opposite phases
    # (trig stand-in for negative bumps with separated supports)
    c = {
        0: GaussianRational(Fraction(-6, 5), Fraction(-1, 4)),
        1: GaussianRational(Fraction(-3, 8), 0),
        -1: GaussianRational(Fraction(-1, 8), 0),
    }
    profile = CoefficientProfile.decoupled([c])
    spec = SystemSpec(1, 1, (sym,))
    return {
        "name": "signed-supports",
        "spec": spec,
        "profile": profile,
        "box": FrequencyBox(8, 8),
        "classify_box": FrequencyBox(0, 2048),
        "digits": None,
        "notes": "outside every classifier condition while the growth "
                 "supremum stays at one: the two checks are independent",
    }


SCENARIOS = {
    "rational-a0": scenario_rational_a0,
    "liouville-a0": scenario_liouville_a0,
    "golden-a0": scenario_golden_a0,
    "remark-pair": scenario_remark_pair,
    "homogeneous-dsq-1/4": lambda: scenario_homogeneous_example(Fraction(1, 4)),
    "homogeneous-dsq-1/2": lambda: scenario_homogeneous_example(Fraction(1, 2)),
    "decoupled-mixed-growth": scenario_example_47,
    "signed-supports": scenario_signed_supports,
}


def load_scenario(name: str) -> dict:
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; available: "
                          f"{', '.join(sorted(SCENARIOS))}")
    return SCENARIOS[name]()
