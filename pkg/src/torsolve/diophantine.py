"""Exact-arithmetic Diophantine analysis.

Rational detection, continued fractions, Liouville-style truncations,
simultaneous power approximation searches, and the solvability
characterization for homogeneous symbols. All irrational inputs are
represented by rational stand-ins at a declared decimal precision, and
every verdict carries that precision stamp: finitely many digits can
never prove irrationality, so the verdicts are evidence, not proofs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import DomainError, ResourceError
from .scalars import frac_dist_to_int, integer_nth_root, sqrt_fraction

DEFAULT_DIGITS = 50


# ---------------------------------------------------------------------------
# input representations
# ---------------------------------------------------------------------------

RealLike = Union[int, Fraction, str, tuple]


@dataclass
class RealInput:
    """A real number known either exactly or through a decimal stand-in.

    Accepted forms: Fraction/int (exact), decimal string (precision
    limited by its digits), or ("sqrt", Fraction) for quadratic surds,
    whose even powers are exact while the value itself is approximated.
    """

    approx: Fraction
    digits: Optional[int]          # None = exact
    sqrt_of: Optional[Fraction] = None

    @staticmethod
    def parse(x: RealLike, digits: int = DEFAULT_DIGITS) -> "RealInput":
        if isinstance(x, RealInput):
            return x
        if isinstance(x, (int, Fraction)):
            return RealInput(Fraction(x), None)
        if isinstance(x, str):
            frac = Fraction(x)
            d = len(x.split(".")[1]) if "." in x else 0
            return RealInput(frac, d or digits)
        if isinstance(x, tuple) and len(x) == 2 and x[0] == "sqrt":
            r = Fraction(x[1])
            return RealInput(sqrt_fraction(r, digits), digits, sqrt_of=r)
        if isinstance(x, float):
            raise DomainError("floats are ambiguous; pass a decimal string")
        raise DomainError(f"cannot interpret {x!r} as a real input")

    @property
    def exact(self) -> bool:
        return self.digits is None

    def power(self, mu: int) -> Tuple[Fraction, bool]:
        """(value^mu, is_exact). Surd inputs are exact for even mu."""
        if self.sqrt_of is not None and mu % 2 == 0:
            return self.sqrt_of ** (mu // 2), True
        return self.approx**mu, self.exact

    def precision_floor(self, mu: int = 1) -> Fraction:
        """Radius below which |.| comparisons are not certifiable."""
        if self.exact and (self.sqrt_of is None or mu % 2 == 0):
            return Fraction(0)
        d = self.digits if self.digits is not None else DEFAULT_DIGITS
        slack = max(1, 4 * mu * (1 + abs(self.approx)) ** max(mu - 1, 0))
        return Fraction(int(slack), 1) * Fraction(1, 10**d)


# ---------------------------------------------------------------------------
# continued fractions and rational detection
# ---------------------------------------------------------------------------

def continued_fraction(x: Union[Fraction, str, RealInput], depth: int) -> List[Tuple[int, int]]:
    """Convergents (p_k, q_k) of x; |x - p_k/q_k| < 1/(q_k q_{k+1})."""
    if depth < 1:
        raise DomainError("depth must be >= 1")
    xi = RealInput.parse(x) if not isinstance(x, RealInput) else x
    v = xi.approx
    p_prev, p = 1, math.floor(v)
    q_prev, q = 0, 1
    out = [(p, q)]
    rem = v - p
    for _ in range(depth - 1):
        if rem == 0:
            break
        v = 1 / rem
        a = math.floor(v)
        rem = v - a
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append((p, q))
    return out


@dataclass
class RationalVector:
    components: Tuple[Fraction, ...]
    q0: int
    precision_limited: bool = False
    digits: Optional[int] = None

    def to_json(self) -> dict:
        return {"components": [f"{c.numerator}/{c.denominator}" for c in self.components],
                "q0": self.q0, "precision_limited": self.precision_limited,
                "precision_digits": self.digits}


@dataclass
class NotRationalAtPrecision:
    convergents: List[List[Tuple[int, int]]]
    digits: int

    def to_json(self) -> dict:
        return {"tag": "not-rational-at-precision", "precision_digits": self.digits,
                "convergents": [[list(pq) for pq in comp[-6:]] for comp in self.convergents]}


def detect_rational(alpha: Sequence[RealLike], digits: int = DEFAULT_DIGITS,
                    depth: int = 64) -> Union[RationalVector, NotRationalAtPrecision]:
    """Exact inputs: q0 = lcm of denominators. Decimal inputs: accept a
    convergent p/q only when it matches within 10^-d with q small enough
    (q <= 10^((d-1)/2)) for the match to be forced; otherwise declare
    not-rational at this precision."""
    inputs = [RealInput.parse(x, digits) for x in alpha]
    if all(i.exact and i.sqrt_of is None for i in inputs):
        comps = tuple(i.approx for i in inputs)
        q0 = 1
        for c in comps:
            q0 = q0 * c.denominator // math.gcd(q0, c.denominator)
        return RationalVector(comps, q0)
    d = min(i.digits or digits for i in inputs)
    eps = Fraction(1, 10**d)
    q_cap = 10 ** max((d - 1) // 2, 1)
    found = []
    all_convergents = []
    for i in inputs:
        convs = continued_fraction(i, depth)
        all_convergents.append(convs)
        hit = None
        for p, q in convs:
            if q <= q_cap and abs(i.approx - Fraction(p, q)) <= eps:
                hit = Fraction(p, q)
                break
        if hit is None:
            return NotRationalAtPrecision(all_convergents, d)
        found.append(hit)
    q0 = 1
    for c in found:
        q0 = q0 * c.denominator // math.gcd(q0, c.denominator)
    return RationalVector(tuple(found), q0, precision_limited=True, digits=d)


# ---------------------------------------------------------------------------
# Liouville truncations
# ---------------------------------------------------------------------------

@dataclass
class LiouvilleTerm:
    ell: int
    p: int
    q: int
    tail_bound: Fraction    # certified bound on |L - p/q|

    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


def liouville_truncations(ell_max: int) -> List[LiouvilleTerm]:
    """Truncations p_l / 10^(l!) of sum_k 10^(-k!).

    The omitted tail is sum_{k>l} 10^(-k!) < (10/9) * 10^(-(l+1)!),
    bounded here by 2 * 10^(-(l+1)!); for l >= 2 this is below q^-l.
    """
    if ell_max < 1:
        raise DomainError("need ell_max >= 1")
    if ell_max > 5:
        raise ResourceError("truncations beyond level 5 are not supported "
                            "(denominators 10^(l!) grow factorially)")
    out = []
    for ell in range(1, ell_max + 1):
        q = 10 ** math.factorial(ell)
        p = sum(10 ** (math.factorial(ell) - math.factorial(k))
                for k in range(1, ell + 1))
        tail = Fraction(2, 10 ** math.factorial(ell + 1))
        if ell >= 2:
            assert tail < Fraction(1, q**ell)
        out.append(LiouvilleTerm(ell, p, q, tail))
    return out


def liouville_constant(ell: int = 5) -> Fraction:
    """Exact truncation of the factorial-gap constant, the standard
    rational stand-in used by the bundled scenarios."""
    return liouville_truncations(ell)[-1].value()


# ---------------------------------------------------------------------------
# simultaneous power approximation search
# ---------------------------------------------------------------------------

@dataclass
class SDATerm:
    ell: int
    p: Tuple[int, ...]
    q: int
    err: Fraction
    bound: Fraction
    at_precision_floor: bool = False

    def to_json(self) -> dict:
        return {"ell": self.ell, "p": list(self.p), "q": self.q,
                "err": _frac_float(self.err), "bound": _frac_float(self.bound),
                "at_precision_floor": self.at_precision_floor}


@dataclass
class SDAWitness:
    mu: int
    terms: List[SDATerm]
    c_const: Fraction
    q_max: int
    digits: Optional[int]

    def to_json(self) -> dict:
        return {"tag": "sda_witnessed", "mu": self.mu,
                "witness": [t.to_json() for t in self.terms],
                "C": _frac_float(self.c_const), "search_q_max": self.q_max,
                "precision_digits": self.digits}


@dataclass
class SDANotFound:
    mu: int
    best_exponent: float
    best_q: int
    q_max: int
    ell_target: int
    digits: Optional[int]
    exponent_curve: List[Tuple[int, float]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"tag": "no_witness_found", "mu": self.mu,
                "best_exponent": self.best_exponent, "best_q": self.best_q,
                "search_q_max": self.q_max, "ell_target": self.ell_target,
                "precision_digits": self.digits}


def _frac_float(fr: Fraction) -> float:
    try:
        return fr.numerator / fr.denominator
    except OverflowError:
        return math.inf


def _frac_log10(fr: Fraction) -> float:
    if fr <= 0:
        return -math.inf
    return (math.log10(fr.numerator) if fr.numerator > 0 else -math.inf) - \
        math.log10(fr.denominator)


def power_error(x: Fraction, mu: int, q: int) -> Tuple[Fraction, int]:
    """min over integer p near (q x)^(1/mu) of |x - p^mu / q|, with argmin.

    Candidate numerators are the nearest integer mu-th root of q*x and
    its +-1 neighbors (and 0); full lattice search is out of scope.
    """
    candidates = {0}
    t = x * q
    if t > 0:
        base = integer_nth_root(t.numerator // t.denominator, mu)
        candidates |= {max(base - 1, 0), base, base + 1, base + 2}
    elif t < 0 and mu % 2 == 1:
        base = integer_nth_root((-t).numerator // (-t).denominator, mu)
        candidates |= {-(base - 1), -base, -(base + 1), -(base + 2)}
    best_err, best_p = None, 0
    for p in candidates:
        err = abs(x - Fraction(p**mu, q))
        if best_err is None or err < best_err:
            best_err, best_p = err, p
    return best_err, best_p


def _structured_q_candidates(powers: Sequence[Fraction], q_max: int,
                             depth: int = 40, mult_max: int = 24,
                             q_cap: int = 10**120) -> List[int]:
    """Denominators where simultaneous power approximation can succeed.

    Good q must make every x_j * q nearly a perfect mu-th power, hence q
    is (a small multiple of) a convergent denominator of each x_j; the
    candidate set is the union of convergent denominators (with their
    semiconvergent neighbors, since a perturbed rational's terminal
    denominator may sit one step off the convergent ladder), their small
    multiples, and small multiples of lcms of comparably sized pairs.
    """
    denoms = set()
    for x in powers:
        convs = continued_fraction(x, depth)
        for k in range(len(convs)):
            q = convs[k][1]
            if 2 <= q <= q_cap:
                denoms.add(q)
            if k + 1 < len(convs):
                q_next = convs[k + 1][1]
                for m in (-1, 0, 1):
                    s = q_next + m * q
                    if 2 <= s <= q_cap:
                        denoms.add(s)
    base = sorted(denoms)
    cands = set()
    for q in base:
        for k in range(1, mult_max + 1):
            kq = k * q
            if kq <= q_cap:
                cands.add(kq)
    for i, a in enumerate(base):
        for b in base[i + 1:]:
            if b > a << 6:
                break
            g = math.gcd(a, b)
            l = a // g * b
            if l > max(a, b) << 6:
                continue
            for k in range(1, mult_max + 1):
                if k * l <= q_cap:
                    cands.add(k * l)
    cands |= set(range(2, min(q_max, 4096) + 1))
    return sorted(cands)


def sda_search(alpha: Sequence[RealLike], mu: int, q_max: int = 10**4,
               ell_target: int = 3, c_const: Union[int, Fraction] = 1,
               digits: int = DEFAULT_DIGITS, use_structured: bool = True,
               exponent_floor_q: int = 16) -> Union[SDAWitness, SDANotFound]:
    """Search for escalating simultaneous approximations of the mu-th powers.

    A witness is a chain of terms at levels ell = 1..ell_target with
    strictly increasing denominators satisfying

        max_j |alpha_j^mu - p_j^mu / q| < C * q^(-ell),

    where numerator candidates are nearest-integer mu-th roots (+-1).
    Denominators are scanned up to q_max and, when use_structured is on,
    augmented with continued-fraction-guided candidates (brute force can
    never reach the factorially spaced denominators where such chains
    live). With C > 1 a term only counts when q >= C^2, so the bound is
    meaningfully tighter than the previous level. Errors below the
    precision floor of the inputs are clamped to the floor; verdicts are
    stamped with the precision.
    """
    if mu < 1:
        raise DomainError("mu must be >= 1")
    inputs = [RealInput.parse(x, digits) for x in alpha]
    powers = []
    exactness = []
    for i in inputs:
        v, ex = i.power(mu)
        powers.append(v)
        exactness.append(ex)
    floors = [i.precision_floor(mu) for i in inputs]
    floor = max(floors)
    c_const = Fraction(c_const)
    q_min_eff = max(2, int(math.ceil(c_const * c_const))) if c_const > 1 else 2

    qs = list(range(2, q_max + 1))
    if use_structured:
        qs = _structured_q_candidates(powers, q_max)
    if floor > 0:
        # no level can certify below the precision floor: c q^-1 > floor
        q_prune = int(c_const / floor) + 1
        qs = [q for q in qs if q < q_prune]
    digits_stamp = None if all(e for e in exactness) else min(
        (i.digits for i in inputs if i.digits is not None), default=digits)

    best_exp, best_q = 0.0, 0
    curve: List[Tuple[int, float]] = []
    per_q: Dict[int, Tuple[Fraction, Tuple[int, ...], bool]] = {}
    for q in qs:
        errs = []
        ps = []
        floored = False
        for x, fl in zip(powers, floors):
            e, p = power_error(x, mu, q)
            if e < fl:
                e = fl if fl > 0 else e
                floored = fl > 0
            errs.append(e)
            ps.append(p)
        err = max(errs)
        per_q[q] = (err, tuple(ps), floored)
        if q >= exponent_floor_q and err > 0:
            e = -_frac_log10(err) / math.log10(q)
            curve.append((q, e))
            if e > best_exp:
                best_exp, best_q = e, q

    terms: List[SDATerm] = []
    last_q = q_min_eff - 1
    for ell in range(1, ell_target + 1):
        found = None
        for q in qs:
            if q <= last_q:
                continue
            err, ps, floored = per_q[q]
            bound = c_const * Fraction(1, q**ell)
            if 0 < err < bound:
                found = SDATerm(ell, ps, q, err, bound, floored)
                break
        if found is None:
            return SDANotFound(mu, best_exp, best_q, q_max, ell_target,
                               digits_stamp, curve)
        terms.append(found)
        last_q = found.q
    return SDAWitness(mu, terms, c_const, q_max, digits_stamp)


# ---------------------------------------------------------------------------
# rational lower bounds
# ---------------------------------------------------------------------------

@dataclass
class RationalLowerBound:
    c0: Optional[Fraction]          # min_r dist(alpha, r^-1 Z^n), sup metric
    c0_sharp: Optional[Fraction]    # min_r max_j dist(r alpha_j, Z): attained
    infinite: bool

    def to_json(self) -> dict:
        if self.infinite:
            return {"C0": None, "infinite": True}
        return {"C0": _frac_float(self.c0), "C0_exact":
                f"{self.c0.numerator}/{self.c0.denominator}",
                "C0_sharp": _frac_float(self.c0_sharp), "C0_sharp_exact":
                f"{self.c0_sharp.numerator}/{self.c0_sharp.denominator}",
                "infinite": False}


def rational_lowerbound(rv: RationalVector, mu: int = 1) -> RationalLowerBound:
    """Positive lower bounds for slice norms of a rational system.

    c0 is the lattice-distance constant min_{r<q0} dist(alpha, r^-1 Z^n)
    (sup metric); c0_sharp = min_{r<q0} max_j dist(r alpha_j, Z) is the
    exact minimum of the slice norm over frequencies with xi not
    divisible by q0, attained by the residue construction. q0 = 1 means
    every frequency lies over the integral sector: +infinity sentinel.
    """
    comps = tuple(c**mu for c in rv.components)
    q0 = 1
    for c in comps:
        q0 = q0 * c.denominator // math.gcd(q0, c.denominator)
    if q0 == 1:
        return RationalLowerBound(None, None, True)
    if q0 > 10**6:
        raise ResourceError(
            f"residue enumeration over q0 - 1 = {q0 - 1} classes is infeasible")
    c0 = None
    c0_sharp = None
    for r in range(1, q0):
        d_lattice = max(frac_dist_to_int(r * a) / r for a in comps)
        d_sharp = max(frac_dist_to_int(r * a) for a in comps)
        c0 = d_lattice if c0 is None else min(c0, d_lattice)
        c0_sharp = d_sharp if c0_sharp is None else min(c0_sharp, d_sharp)
    return RationalLowerBound(c0, c0_sharp, False)


# ---------------------------------------------------------------------------
# homogeneous characterization
# ---------------------------------------------------------------------------

@dataclass
class HomogeneousScanRecord:
    eta: Tuple[int, ...]
    xi: int
    value: float          # max_j |eta_j / xi^kappa + c_j|
    magnitude: float      # |eta| + xi

    @property
    def local_exponent(self) -> float:
        if self.magnitude < 2 or self.value <= 0:
            return 0.0
        return -math.log(self.value) / math.log(self.magnitude)

    def to_json(self) -> dict:
        return {"eta": list(self.eta), "xi": self.xi, "value": self.value,
                "magnitude": self.magnitude, "local_exponent": self.local_exponent}


@dataclass
class HomogeneousScan:
    kappa: Fraction
    records: List[HomogeneousScanRecord]
    lambda_hat: float
    max_exponent: float
    sub_polynomial_found: bool

    def to_json(self) -> dict:
        return {"kappa": str(self.kappa), "lambda_hat": self.lambda_hat,
                "max_local_exponent": self.max_exponent,
                "sub_polynomial_found": self.sub_polynomial_found,
                "worst": [r.to_json() for r in
                          sorted(self.records, key=lambda r: -r.local_exponent)[:8]]}


def homogeneous_criterion_scan(c: Sequence[RealLike], kappa: Fraction,
                               box_xi: int, digits: int = DEFAULT_DIGITS) -> HomogeneousScan:
    """Scan max_j |eta_j / xi^kappa + c_j| >= C (|eta| + xi)^-lambda over
    xi = 1..box_xi at the minimizing eta (componentwise nearest integer)."""
    kappa = Fraction(kappa)
    inputs = [RealInput.parse(x, digits) for x in c]
    vals = [float(i.approx) for i in inputs]
    records = []
    for xi in range(1, box_xi + 1):
        w = float(xi) ** float(kappa)
        eta = tuple(-round(v * w) for v in vals)
        value = max(abs(e / w + v) for e, v in zip(eta, vals))
        mag = max((abs(e) for e in eta), default=0) + xi
        records.append(HomogeneousScanRecord(eta, xi, value, mag))
    pts = [(math.log(r.magnitude), math.log(r.value))
           for r in records if r.value > 0 and r.magnitude >= 2]
    slope = 0.0
    if len(pts) >= 2:
        mx = sum(x for x, _ in pts) / len(pts)
        my = sum(y for _, y in pts) / len(pts)
        sxx = sum((x - mx) ** 2 for x, _ in pts)
        slope = (sum((x - mx) * (y - my) for x, y in pts) / sxx) if sxx else 0.0
    lambda_hat = max(0.0, -slope)
    max_exp = max((r.local_exponent for r in records), default=0.0)
    found = max_exp > lambda_hat + 2.0
    return HomogeneousScan(kappa, records, lambda_hat, max_exp, found)


@dataclass
class DiophantineVerdict:
    tag: str
    payload: object
    precision_digits: Optional[int]

    def to_json(self) -> dict:
        base = {"tag": self.tag, "precision_digits": self.precision_digits}
        if hasattr(self.payload, "to_json"):
            base.update(self.payload.to_json())
        return base


@dataclass
class HomogeneousReport:
    kappa: Fraction
    mu: int
    verdict: DiophantineVerdict
    solvable_empirical: Optional[bool]
    scan: Optional[HomogeneousScan]
    paths_agree: Optional[bool]
    notes: List[str]
    lower_bound: Optional[RationalLowerBound] = None

    def to_json(self) -> dict:
        return {
            "kappa": str(self.kappa), "mu": self.mu,
            "verdict": self.verdict.to_json(),
            "solvable_empirical": self.solvable_empirical,
            "scan": self.scan.to_json() if self.scan else None,
            "paths_agree": self.paths_agree,
            "notes": self.notes,
            "lower_bound": self.lower_bound.to_json() if self.lower_bound else None,
        }


def characterize_homogeneous(c: Sequence, kappa: Fraction, box_xi: int = 1000,
                             digits: int = DEFAULT_DIGITS, q_max: int = 10**4,
                             imag: Optional[Sequence] = None) -> HomogeneousReport:
    """Solvability verdict for symbols c_j |xi|^kappa, kappa = rho/mu.

    Nonreal coefficients give immediate solvability. Real coefficient
    vectors are tested for rationality, then searched for a simultaneous
    mu-th power approximation witness; independently the direct criterion
    scan runs on the box, and disagreements between the two paths (a
    witness living far outside the box is invisible to the scan) are
    flagged rather than hidden.
    """
    kappa = Fraction(kappa)
    if kappa <= 0:
        raise DomainError("kappa must be a positive rational")
    mu = kappa.denominator
    notes: List[str] = []
    if imag is not None and any(RealInput.parse(b, digits).approx != 0 for b in imag):
        verdict = DiophantineVerdict("solvable_nonreal", None, None)
        return HomogeneousReport(kappa, mu, verdict, True, None, None,
                                 ["nonzero imaginary part: bound holds immediately"])

    detection = detect_rational(c, digits=digits)
    if isinstance(detection, RationalVector) and not detection.precision_limited:
        lb = rational_lowerbound(detection, mu=mu)
        verdict = DiophantineVerdict("rational", detection, detection.digits)
        notes.append("rational coefficients: solvable, lower bound attached")
        report = HomogeneousReport(kappa, mu, verdict, True, None, None, notes)
        report.lower_bound = lb
        return report
    if isinstance(detection, RationalVector):
        notes.append("rational at declared precision; treating per witness search")

    ell_target = 3 if mu == 1 else 2
    c_const = Fraction(1) if mu == 1 else Fraction(64)
    sda = sda_search(c, mu, q_max=q_max, ell_target=ell_target,
                     c_const=c_const, digits=digits)
    scan = homogeneous_criterion_scan(c, kappa, box_xi, digits=digits)

    if isinstance(sda, SDAWitness):
        verdict = DiophantineVerdict("sda_witnessed", sda, sda.digits)
        solvable = False
    else:
        verdict = DiophantineVerdict("no_witness_found", sda, sda.digits)
        solvable = True
    agree = (not solvable) == scan.sub_polynomial_found
    if not agree:
        notes.append("witness search and direct scan disagree at this box "
                     "scale; both datasets attached")
    return HomogeneousReport(kappa, mu, verdict, solvable, scan, agree, notes)
