"""Toroidal symbols p(xi) and system specifications.

A symbol is a total function Z^N -> C with declared order m, an optional
exact-rational evaluator, and a kind tag used for serialization and for
the growth classifier. Symbols are closed under pointwise sum and
scaling so derived systems can be assembled programmatically.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Optional, Sequence, Tuple

from .errors import DomainError
from .forms import ConstPForm, FrequencyBox
from .scalars import (
    GaussianRational,
    Scalar,
    as_exact,
    exact_abs,
    integer_nth_root,
    scalar_is_zero,
    to_complex,
)

Xi = Tuple[int, ...]


def _sup(xi: Xi) -> int:
    return max(map(abs, xi), default=0)


class ToroidalSymbol:
    """Fourier multiplier on Z^N with order metadata.

    kind is one of: polynomial, homogeneous, logarithmic, tabulated,
    constant, sum, scaled. The exact evaluator is optional and may be
    partial (homogeneous symbols are exact only on the sublattice where
    |xi|^kappa is rational); ``evaluate(xi, exact=True)`` raises when no
    exact value exists.
    """

    def __init__(self, N: int, order: float, kind: str,
                 eval_complex: Callable[[Xi], complex],
                 eval_exact: Optional[Callable[[Xi], GaussianRational]] = None,
                 params: Optional[dict] = None, label: str = ""):
        self.N = N
        self.order = float(order)
        self.kind = kind
        self._eval_complex = eval_complex
        self._eval_exact = eval_exact
        self.params = params or {}
        self.label = label or kind

    # -- evaluation -------------------------------------------------------
    def evaluate(self, xi, exact: bool = False) -> Scalar:
        xi = tuple(int(x) for x in xi)
        if len(xi) != self.N:
            raise DomainError("frequency arity mismatch")
        if exact:
            if self._eval_exact is None:
                raise DomainError(f"symbol {self.label!r} has no exact evaluator")
            return self._eval_exact(xi)
        return self._eval_complex(xi)

    def __call__(self, xi) -> complex:
        return self.evaluate(xi, exact=False)

    @property
    def has_exact(self) -> bool:
        return self._eval_exact is not None

    def order_constant(self, box: FrequencyBox) -> float:
        """Smallest C with |p(xi)| <= C <xi>^m over the box (sampled)."""
        best = 0.0
        for xi in box.iter_xi(self.N):
            w = (1.0 + sum(x * x for x in xi)) ** (self.order / 2.0)
            best = max(best, abs(self._eval_complex(xi)) / w)
        return best

    # -- constructors -------------------------------------------------------
    @staticmethod
    def constant(value, N: int = 1) -> "ToroidalSymbol":
        zc = to_complex(as_exact(value)) if not isinstance(value, complex) else value
        exact_v = None
        if not isinstance(value, complex):
            qv = as_exact(value)
            exact_v = lambda xi, q=qv: q
        return ToroidalSymbol(N, 0.0, "constant", lambda xi, z=zc: z, exact_v,
                              params={"value": value}, label=f"const({value})")

    @staticmethod
    def polynomial(coeffs: Dict[Tuple[int, ...], object], N: int = 1,
                   order: Optional[float] = None, label: str = "") -> "ToroidalSymbol":
        """p(xi) = sum_d c_d * xi^d over multi-degrees d (componentwise powers)."""
        table = {tuple(int(i) for i in d): as_exact(c) for d, c in coeffs.items()}
        for d in table:
            if len(d) != N:
                raise DomainError("polynomial degree arity mismatch")
        deg = max((sum(d) for d in table), default=0)

        def ev_exact(xi, table=table):
            total = GaussianRational(0)
            for d, c in table.items():
                term = c
                for x, e in zip(xi, d):
                    term = term * (x**e)
                total = total + term
            return total

        def ev(xi):
            return ev_exact(xi).to_complex()

        return ToroidalSymbol(N, order if order is not None else float(deg),
                              "polynomial", ev, ev_exact,
                              params={"coeffs": {",".join(map(str, d)): c for d, c in coeffs.items()}},
                              label=label or "polynomial")

    @staticmethod
    def linear(a, N: int = 1) -> "ToroidalSymbol":
        """p(xi) = a * xi_1; the D_x multiplier scaled by a constant."""
        return ToroidalSymbol.polynomial({(1,) + (0,) * (N - 1): a}, N=N, order=1.0,
                                         label=f"linear({a})")

    @staticmethod
    def homogeneous(c, kappa: Fraction, N: int = 1) -> "ToroidalSymbol":
        """p(xi) = c |xi|^kappa for xi != 0, and 0 at xi = 0.

        kappa = rho/mu > 0 in lowest terms. The exact evaluator covers the
        sublattice where |xi| is a perfect mu-th power.
        """
        kappa = Fraction(kappa)
        if kappa <= 0:
            raise DomainError("homogeneity order must be positive")
        rho, mu = kappa.numerator, kappa.denominator
        c_exact = as_exact(c) if not isinstance(c, complex) else None
        cc = to_complex(c_exact) if c_exact is not None else c

        def ev(xi):
            s = _sup(xi)
            if s == 0:
                return 0j
            return cc * float(s) ** (rho / mu)

        ev_exact = None
        if c_exact is not None:
            def ev_exact(xi, c0=c_exact, rho=rho, mu=mu):
                s = _sup(xi)
                if s == 0:
                    return GaussianRational(0)
                r = integer_nth_root(s, mu)
                if r**mu != s:
                    raise DomainError(
                        f"|xi| = {s} is not a perfect {mu}-th power; no exact value")
                return c0 * (r**rho)

        return ToroidalSymbol(N, float(kappa), "homogeneous", ev, ev_exact,
                              params={"c": c, "kappa": str(kappa)},
                              label=f"homogeneous(kappa={kappa})")

    @staticmethod
    def logarithmic(scale=1.0, shift: float = 1.0, N: int = 1) -> "ToroidalSymbol":
        sc = complex(scale)

        def ev(xi):
            return sc * math.log(shift + _sup(xi))

        return ToroidalSymbol(N, 0.5, "logarithmic", ev, None,
                              params={"scale": scale, "shift": shift},
                              label="logarithmic")

    @staticmethod
    def tabulated(values: Dict[Xi, object], N: int = 1, order: float = 1.0,
                  default=0, label: str = "tabulated") -> "ToroidalSymbol":
        table = {tuple(int(x) for x in k): v for k, v in values.items()}
        d = default

        def ev(xi):
            v = table.get(xi, d)
            return to_complex(as_exact(v)) if not isinstance(v, complex) else v

        all_exact = all(not isinstance(v, complex) for v in table.values()) \
            and not isinstance(default, complex)
        ev_exact = None
        if all_exact:
            def ev_exact(xi, table=table, d=d):
                return as_exact(table.get(xi, d))

        return ToroidalSymbol(N, order, "tabulated", ev, ev_exact,
                              params={"size": len(table)}, label=label)

    @staticmethod
    def scaled(sym: "ToroidalSymbol", factor) -> "ToroidalSymbol":
        f_exact = as_exact(factor) if not isinstance(factor, complex) else None
        fc = to_complex(f_exact) if f_exact is not None else factor

        ev = lambda xi: fc * sym._eval_complex(xi)
        ev_exact = None
        if f_exact is not None and sym._eval_exact is not None:
            ev_exact = lambda xi: f_exact * sym._eval_exact(xi)
        return ToroidalSymbol(sym.N, sym.order, "scaled", ev, ev_exact,
                              params={"factor": factor, "base": sym.label},
                              label=f"{factor}*{sym.label}")

    @staticmethod
    def sum(a: "ToroidalSymbol", b: "ToroidalSymbol") -> "ToroidalSymbol":
        if a.N != b.N:
            raise DomainError("summed symbols must share N")
        ev = lambda xi: a._eval_complex(xi) + b._eval_complex(xi)
        ev_exact = None
        if a._eval_exact is not None and b._eval_exact is not None:
            ev_exact = lambda xi: a._eval_exact(xi) + b._eval_exact(xi)
        return ToroidalSymbol(a.N, max(a.order, b.order), "sum", ev, ev_exact,
                              label=f"{a.label}+{b.label}")

    def real_part(self) -> "ToroidalSymbol":
        ev = lambda xi: complex(self._eval_complex(xi).real, 0.0)
        ev_exact = None
        if self._eval_exact is not None:
            ev_exact = lambda xi: GaussianRational(self._eval_exact(xi).re, 0)
        return ToroidalSymbol(self.N, self.order, self.kind, ev, ev_exact,
                              label=f"Re[{self.label}]")

    def imag_part(self) -> "ToroidalSymbol":
        ev = lambda xi: complex(self._eval_complex(xi).imag, 0.0)
        ev_exact = None
        if self._eval_exact is not None:
            ev_exact = lambda xi: GaussianRational(self._eval_exact(xi).im, 0)
        return ToroidalSymbol(self.N, self.order, self.kind, ev, ev_exact,
                              label=f"Im[{self.label}]")

    def __repr__(self):
        return f"ToroidalSymbol({self.label}, N={self.N}, order={self.order})"


@dataclass(frozen=True)
class SystemSpec:
    """Constant-coefficient system: n operators with symbols on Z^N.

    Constant coefficients are folded into the symbols at construction
    time, so the slice at (eta, xi) is i * sum_j (eta_j + p_j(xi)) dt_j.
    """

    n: int
    N: int
    symbols: Tuple[ToroidalSymbol, ...]

    def __post_init__(self):
        if len(self.symbols) != self.n:
            raise DomainError(f"expected {self.n} symbols, got {len(self.symbols)}")
        for s in self.symbols:
            if s.N != self.N:
                raise DomainError("symbol frequency arity mismatch")

    @staticmethod
    def constant_coefficients(symbols: Sequence[ToroidalSymbol],
                              coefficients: Optional[Sequence] = None,
                              N: Optional[int] = None) -> "SystemSpec":
        symbols = list(symbols)
        if coefficients is not None:
            symbols = [ToroidalSymbol.scaled(s, c) for s, c in zip(symbols, coefficients)]
        return SystemSpec(len(symbols), N if N is not None else symbols[0].N,
                          tuple(symbols))

    @property
    def has_exact(self) -> bool:
        return all(s.has_exact for s in self.symbols)

    def mean_form(self, xi, exact: bool = False):
        """Vector (p_1(xi), ..., p_n(xi)): the constant 1-form at frequency xi."""
        return tuple(s.evaluate(xi, exact=exact) for s in self.symbols)


def eval_symbol_slice(spec: SystemSpec, eta, xi, exact: bool = False) -> ConstPForm:
    """The constant 1-form i * sum_j (eta_j + p_j(xi)) dt_j."""
    eta = tuple(int(e) for e in eta)
    xi = tuple(int(x) for x in xi)
    if len(eta) != spec.n:
        raise DomainError("eta arity mismatch")
    coeffs = {}
    for j in range(1, spec.n + 1):
        p = spec.symbols[j - 1].evaluate(xi, exact=exact)
        if exact:
            z = GaussianRational(0, 1) * (p + eta[j - 1])
        else:
            z = 1j * (complex(p) + eta[j - 1])
        if not scalar_is_zero(z):
            coeffs[(j,)] = z
    return ConstPForm(spec.n, 1, coeffs)


def slice_norm(L: ConstPForm) -> float:
    """max_j |coefficient_j| of a constant 1-form (the i factor is modulus-neutral)."""
    if L.degree != 1:
        raise DomainError("slice norm is defined for 1-forms")
    return L.max_abs()


def slice_norm_exact(L: ConstPForm) -> Fraction:
    """Exact slice norm; requires axis-aligned (real or imaginary) coefficients."""
    if L.degree != 1:
        raise DomainError("slice norm is defined for 1-forms")
    best = Fraction(0)
    for _, v in L.items():
        if not isinstance(v, GaussianRational):
            raise DomainError("exact slice norm requires exact coefficients")
        best = max(best, exact_abs(v))
    return best


@dataclass(frozen=True)
class GrowthClass:
    tag: str                  # "log" | "superlog"
    constant: float           # C with |phi(xi)| <= C log|xi| when tag == "log"
    cutoff: int               # n0
    ratio_spread: float       # max/median diagnostic behind the verdict


def classify_growth(phi, box: FrequencyBox, margin: float = 0.25,
                    cutoff: int = 2) -> GrowthClass:
    """Heuristic log vs super-log growth classification over a finite box.

    Fits |phi(xi)| <= C log|xi| on cutoff <= |xi| <= X and calls the
    growth logarithmic when the ratio |phi(xi)|/log|xi| is flat over the
    outer half of the box (max/median <= 1 + margin). Finite-scale only;
    callers must label the verdict as empirical.
    """
    if box.X < 16:
        raise DomainError("growth classification needs box.X >= 16")
    evaluate = phi.evaluate if hasattr(phi, "evaluate") else None
    fn = (lambda xi: complex(phi(xi))) if evaluate is None else (lambda xi: complex(phi(xi)))
    N = getattr(phi, "N", 1)

    ratios = []          # (|xi|, |phi(xi)| / log|xi|)
    if N == 1:
        samples = [(x,) for x in range(-box.X, box.X + 1)]
    else:
        samples = list(box.iter_xi(N)) if box.grid_size(0, N) <= 200000 else [
            tuple(x if a == ax else 0 for a in range(N))
            for ax in range(N) for x in range(-box.X, box.X + 1)]
    for xi in samples:
        s = _sup(xi)
        if s < cutoff:
            continue
        ratios.append((s, abs(fn(xi)) / math.log(s)))
    if not ratios:
        raise DomainError("degenerate box for growth classification")
    constant = max(r for _, r in ratios)
    outer = [r for s, r in ratios if s >= box.X / 2]
    mx = max(outer)
    if mx == 0.0:
        return GrowthClass("log", 0.0, cutoff, 1.0)
    med = statistics.median(outer)
    spread = math.inf if med == 0 else mx / med
    tag = "log" if spread <= 1.0 + margin else "superlog"
    return GrowthClass(tag, constant, cutoff, spread)


# -- JSON system specification ------------------------------------------------

def symbol_from_json(doc: dict, N: int) -> ToroidalSymbol:
    kind = doc.get("kind")
    order = doc.get("order")
    if kind == "polynomial":
        coeffs = {}
        for key, c in doc["coeffs"].items():
            d = tuple(int(t) for t in str(key).split(","))
            coeffs[d] = _coeff_from_json(c)
        return ToroidalSymbol.polynomial(coeffs, N=N, order=order)
    if kind == "homogeneous":
        return ToroidalSymbol.homogeneous(_coeff_from_json(doc["c"]),
                                          Fraction(doc["kappa"]), N=N)
    if kind == "logarithmic":
        return ToroidalSymbol.logarithmic(doc.get("scale", 1.0), doc.get("shift", 1.0), N=N)
    if kind == "constant":
        return ToroidalSymbol.constant(_coeff_from_json(doc["value"]), N=N)
    if kind == "tabulated":
        values = {tuple(int(t) for t in str(k).split(",")): _coeff_from_json(v)
                  for k, v in doc["values"].items()}
        return ToroidalSymbol.tabulated(values, N=N, order=order or 1.0,
                                        default=_coeff_from_json(doc.get("default", 0)))
    raise DomainError(f"unknown symbol kind {kind!r}")


def _coeff_from_json(c):
    if isinstance(c, str):
        return Fraction(c)
    if isinstance(c, (int, float)):
        return c
    if isinstance(c, dict):
        re, im = c.get("re", 0), c.get("im", 0)
        if isinstance(re, str) or isinstance(im, str):
            return GaussianRational(Fraction(re), Fraction(im))
        return complex(re, im)
    if isinstance(c, list) and len(c) == 2:
        return complex(c[0], c[1])
    raise DomainError(f"cannot parse coefficient {c!r}")


def system_from_json(doc: dict) -> SystemSpec:
    n, N = int(doc["n"]), int(doc["N"])
    symbols = [symbol_from_json(s, N) for s in doc["symbols"]]
    if len(symbols) != n:
        raise DomainError("symbol count does not match n")
    constants = [1] * n
    for entry in doc.get("coefficients", []):
        if entry.get("kind") == "constant":
            constants[int(entry["j"]) - 1] = _coeff_from_json(entry["data"])
    symbols = [s if c == 1 else ToroidalSymbol.scaled(s, c)
               for s, c in zip(symbols, constants)]
    return SystemSpec(n, N, tuple(symbols))
