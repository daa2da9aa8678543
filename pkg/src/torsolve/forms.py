"""Exterior algebra of p-forms on the split torus.

Forms are spanned by wedge products dt_K over strictly increasing
multi-indices K in {1..n}; coefficients are either complex scalars
(:class:`ConstPForm`), trigonometric polynomials in the remaining torus
variables (:class:`TrigPForm`, indexed by integer frequency pairs
(eta, xi)), or plain trigonometric polynomials (:class:`TrigPoly`).

One sign convention exists in the codebase: every sign is derived from
:func:`wedge_sign` / :func:`merge_sign`, and the convention is pinned by
the wedge-division identity tests rather than by documentation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterable, Iterator, Optional, Tuple

import numpy as np

from .errors import DomainError
from .scalars import (
    GaussianRational,
    Scalar,
    is_exact_scalar,
    scalar_abs,
    scalar_from_json,
    scalar_i,
    scalar_is_zero,
    scalar_to_json,
    to_complex,
)

MultiIndex = Tuple[int, ...]
Frequency = Tuple[Tuple[int, ...], Tuple[int, ...]]


def check_multi_index(K: Iterable[int], n: int) -> MultiIndex:
    K = tuple(int(k) for k in K)
    if any(K[i] >= K[i + 1] for i in range(len(K) - 1)):
        raise DomainError(f"multi-index {K} is not strictly increasing")
    if K and (K[0] < 1 or K[-1] > n):
        raise DomainError(f"multi-index {K} leaves 1..{n}")
    return K


def wedge_sign(mu: int, J: MultiIndex) -> int:
    """Parity of the permutation carrying (mu, J\\{mu}) to J.

    Equals (-1)^(pos-1) with pos the 1-based position of mu inside J.
    """
    if mu not in J:
        raise DomainError(f"{mu} is not a member of {J}")
    return -1 if J.index(mu) % 2 else 1


def merge_sign(K1: MultiIndex, K2: MultiIndex) -> Tuple[Optional[MultiIndex], int]:
    """Sorted union of two multi-indices with the permutation parity.

    Returns (None, 0) when the indices overlap (dt_j ^ dt_j = 0).
    The sign counts inversions of the concatenation K1 + K2.
    """
    if set(K1) & set(K2):
        return None, 0
    inversions = 0
    for a in K1:
        for b in K2:
            if a > b:
                inversions += 1
    J = tuple(sorted(K1 + K2))
    return J, (-1 if inversions % 2 else 1)


@dataclass(frozen=True)
class FrequencyBox:
    """Truncation box |eta|_sup <= H, |xi|_sup <= X."""

    H: int
    X: int

    def __post_init__(self):
        if self.H < 0 or self.X < 0:
            raise DomainError("frequency box bounds must be nonnegative")

    def iter_eta(self, n: int) -> Iterator[Tuple[int, ...]]:
        return product(range(-self.H, self.H + 1), repeat=n)

    def iter_xi(self, N: int) -> Iterator[Tuple[int, ...]]:
        return product(range(-self.X, self.X + 1), repeat=N)

    def contains(self, eta: Tuple[int, ...], xi: Tuple[int, ...]) -> bool:
        return (max(map(abs, eta), default=0) <= self.H
                and max(map(abs, xi), default=0) <= self.X)

    def grid_size(self, n: int, N: int) -> int:
        return (2 * self.H + 1) ** n * (2 * self.X + 1) ** N


def freq_radius(eta: Tuple[int, ...], xi: Tuple[int, ...]) -> int:
    """Sup-norm |(eta, xi)| over all integer entries."""
    return max(max(map(abs, eta), default=0), max(map(abs, xi), default=0))


class ConstPForm:
    """Constant-coefficient p-form over C^n."""

    __slots__ = ("n", "degree", "coeffs")

    def __init__(self, n: int, degree: int, coeffs: Dict[MultiIndex, Scalar] | None = None):
        if degree < 0 or n < 0:
            raise DomainError("negative dimension or degree")
        self.n = n
        self.degree = degree
        self.coeffs: Dict[MultiIndex, Scalar] = {}
        if coeffs:
            for K, v in coeffs.items():
                K = check_multi_index(K, n)
                if len(K) != degree:
                    raise DomainError(f"component {K} has wrong degree (want {degree})")
                if not scalar_is_zero(v):
                    self.coeffs[K] = v

    @classmethod
    def zero(cls, n: int, degree: int) -> "ConstPForm":
        return cls(n, degree, {})

    @classmethod
    def dt(cls, n: int, j: int, value: Scalar = 1.0 + 0j) -> "ConstPForm":
        return cls(n, 1, {(j,): value})

    @classmethod
    def scalar(cls, n: int, value: Scalar) -> "ConstPForm":
        return cls(n, 0, {(): value})

    def items(self):
        return self.coeffs.items()

    def get(self, K: MultiIndex, default=None):
        return self.coeffs.get(tuple(K), default)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(scalar_is_zero(v, tol) for v in self.coeffs.values())

    @property
    def exact(self) -> bool:
        return all(is_exact_scalar(v) for v in self.coeffs.values())

    def max_abs(self) -> float:
        return max((scalar_abs(v) for v in self.coeffs.values()), default=0.0)

    def add(self, other: "ConstPForm") -> "ConstPForm":
        self._check_ambient(other)
        if other.degree != self.degree:
            raise DomainError("degree mismatch in addition")
        out = dict(self.coeffs)
        for K, v in other.coeffs.items():
            w = out.get(K)
            out[K] = v if w is None else w + v
        return ConstPForm(self.n, self.degree, out)

    def scale(self, c: Scalar) -> "ConstPForm":
        return ConstPForm(self.n, self.degree,
                          {K: c * v for K, v in self.coeffs.items()})

    def sub(self, other: "ConstPForm") -> "ConstPForm":
        return self.add(other.scale(-1 if other.exact else -1.0 + 0j))

    def wedge(self, other: "ConstPForm") -> "ConstPForm":
        self._check_ambient(other)
        degree = self.degree + other.degree
        if degree > self.n:
            return ConstPForm.zero(self.n, min(degree, self.n + 1))
        out: Dict[MultiIndex, Scalar] = {}
        for K1, v1 in self.coeffs.items():
            for K2, v2 in other.coeffs.items():
                J, s = merge_sign(K1, K2)
                if J is None:
                    continue
                term = v1 * v2 if s > 0 else -(v1 * v2)
                w = out.get(J)
                out[J] = term if w is None else w + term
        return ConstPForm(self.n, degree, out)

    def to_float(self) -> "ConstPForm":
        return ConstPForm(self.n, self.degree,
                          {K: to_complex(v) for K, v in self.coeffs.items()})

    def equals(self, other: "ConstPForm", tol: float = 0.0) -> bool:
        if self.n != other.n or self.degree != other.degree:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        for K in keys:
            a = self.coeffs.get(K)
            b = other.coeffs.get(K)
            if a is None:
                if not scalar_is_zero(b, tol):
                    return False
            elif b is None:
                if not scalar_is_zero(a, tol):
                    return False
            elif not scalar_is_zero(a - b, tol):
                return False
        return True

    def _check_ambient(self, other: "ConstPForm"):
        if self.n != other.n:
            raise DomainError(f"ambient dimension mismatch: {self.n} vs {other.n}")

    def __repr__(self):
        terms = ", ".join(f"{K}: {v}" for K, v in sorted(self.coeffs.items()))
        return f"ConstPForm(n={self.n}, p={self.degree}, {{{terms}}})"


class TrigPForm:
    """p-form on the split torus with finitely supported Fourier data.

    Coefficients are stored flat as {(K, eta, xi): scalar}; eta runs over
    Z^n (the form variables), xi over Z^N (the multiplier variables).
    """

    __slots__ = ("n", "N", "degree", "coeffs")

    def __init__(self, n: int, N: int, degree: int,
                 coeffs: Dict[Tuple[MultiIndex, Tuple[int, ...], Tuple[int, ...]], Scalar] | None = None):
        self.n = n
        self.N = N
        self.degree = degree
        self.coeffs: Dict[Tuple[MultiIndex, Tuple[int, ...], Tuple[int, ...]], Scalar] = {}
        if coeffs:
            for (K, eta, xi), v in coeffs.items():
                K = check_multi_index(K, n)
                if len(K) != degree:
                    raise DomainError(f"component {K} has wrong degree (want {degree})")
                eta = tuple(int(e) for e in eta)
                xi = tuple(int(x) for x in xi)
                if len(eta) != n or len(xi) != N:
                    raise DomainError("frequency arity mismatch")
                if not scalar_is_zero(v):
                    self.coeffs[(K, eta, xi)] = v

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, n: int, N: int, degree: int) -> "TrigPForm":
        return cls(n, N, degree, {})

    @classmethod
    def monomial(cls, n: int, N: int, K: Iterable[int], eta, xi, value: Scalar = 1.0 + 0j) -> "TrigPForm":
        K = tuple(K)
        return cls(n, N, len(K), {(K, tuple(eta), tuple(xi)): value})

    # -- bookkeeping ----------------------------------------------------
    def items(self):
        return self.coeffs.items()

    def get(self, K, eta, xi, default=None):
        return self.coeffs.get((tuple(K), tuple(eta), tuple(xi)), default)

    @property
    def exact(self) -> bool:
        return all(is_exact_scalar(v) for v in self.coeffs.values())

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(scalar_is_zero(v, tol) for v in self.coeffs.values())

    def max_abs(self) -> float:
        return max((scalar_abs(v) for v in self.coeffs.values()), default=0.0)

    def frequencies(self) -> set:
        return {(eta, xi) for (_, eta, xi) in self.coeffs}

    def xi_values(self) -> set:
        return {xi for (_, _, xi) in self.coeffs}

    def eta_bandwidth(self) -> int:
        return max((max(map(abs, eta), default=0) for (_, eta, _) in self.coeffs), default=0)

    def xi_bandwidth(self) -> int:
        return max((max(map(abs, xi), default=0) for (_, _, xi) in self.coeffs), default=0)

    def in_box(self, box: FrequencyBox) -> bool:
        return all(box.contains(eta, xi) for (_, eta, xi) in self.coeffs)

    def slice_at(self, eta, xi) -> ConstPForm:
        eta, xi = tuple(eta), tuple(xi)
        out = {}
        for (K, e, x), v in self.coeffs.items():
            if e == eta and x == xi:
                out[K] = v
        return ConstPForm(self.n, self.degree, out)

    def by_frequency(self) -> Dict[Frequency, ConstPForm]:
        slices: Dict[Frequency, Dict[MultiIndex, Scalar]] = {}
        for (K, eta, xi), v in self.coeffs.items():
            slices.setdefault((eta, xi), {})[K] = v
        return {fq: ConstPForm(self.n, self.degree, d) for fq, d in slices.items()}

    # -- algebra ---------------------------------------------------------
    def add(self, other: "TrigPForm") -> "TrigPForm":
        self._check_shape(other)
        out = dict(self.coeffs)
        for key, v in other.coeffs.items():
            w = out.get(key)
            out[key] = v if w is None else w + v
        return TrigPForm(self.n, self.N, self.degree, out)

    def scale(self, c: Scalar) -> "TrigPForm":
        return TrigPForm(self.n, self.N, self.degree,
                         {key: c * v for key, v in self.coeffs.items()})

    def sub(self, other: "TrigPForm") -> "TrigPForm":
        minus = GaussianRational(-1, 0) if other.exact and other.coeffs else -1.0 + 0j
        return self.add(other.scale(minus))

    def set_slice(self, eta, xi, form: ConstPForm) -> None:
        """Replace all components at one frequency (in place; builder use)."""
        eta, xi = tuple(eta), tuple(xi)
        for key in [k for k in self.coeffs if k[1] == eta and k[2] == xi]:
            del self.coeffs[key]
        for K, v in form.items():
            if not scalar_is_zero(v):
                self.coeffs[(K, eta, xi)] = v

    def shift_eta(self, m: Tuple[int, ...]) -> "TrigPForm":
        """Multiply by e^{i m.t}: relabels eta -> eta + m."""
        out = {}
        for (K, eta, xi), v in self.coeffs.items():
            out[(K, tuple(e + mm for e, mm in zip(eta, m)), xi)] = v
        return TrigPForm(self.n, self.N, self.degree, out)

    def d_t(self) -> "TrigPForm":
        """Exterior derivative in the form variables."""
        i_one = scalar_i(self.exact and bool(self.coeffs))
        out: Dict[Tuple[MultiIndex, Tuple[int, ...], Tuple[int, ...]], Scalar] = {}
        for (K, eta, xi), v in self.coeffs.items():
            for j in range(1, self.n + 1):
                if eta[j - 1] == 0:
                    continue
                J, s = merge_sign((j,), K)
                if J is None:
                    continue
                term = i_one * eta[j - 1] * v
                if s < 0:
                    term = -term
                key = (J, eta, xi)
                w = out.get(key)
                out[key] = term if w is None else w + term
        return TrigPForm(self.n, self.N, self.degree + 1, out)

    def to_float(self) -> "TrigPForm":
        return TrigPForm(self.n, self.N, self.degree,
                         {key: to_complex(v) for key, v in self.coeffs.items()})

    def _check_shape(self, other: "TrigPForm"):
        if (self.n, self.N, self.degree) != (other.n, other.N, other.degree):
            raise DomainError("form shape mismatch")

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        terms = []
        for (K, eta, xi), v in sorted(self.coeffs.items()):
            entry = {"K": list(K), "eta": list(eta), "xi": list(xi)}
            entry.update(scalar_to_json(v))
            terms.append(entry)
        return {"n": self.n, "N": self.N, "degree": self.degree, "terms": terms}

    @classmethod
    def from_json(cls, doc: dict) -> "TrigPForm":
        exact = any(isinstance(t.get("re"), str) for t in doc.get("terms", []))
        coeffs = {}
        for t in doc.get("terms", []):
            key = (tuple(t["K"]), tuple(t["eta"]), tuple(t["xi"]))
            coeffs[key] = scalar_from_json(t, exact)
        return cls(int(doc["n"]), int(doc["N"]), int(doc["degree"]), coeffs)

    def __repr__(self):
        return (f"TrigPForm(n={self.n}, N={self.N}, p={self.degree}, "
                f"{len(self.coeffs)} terms)")


@dataclass
class ExactnessResult:
    exact: bool
    primitive: Optional[TrigPForm]
    closed_residual: float
    zero_mode_residual: float
    failures: list


def is_exact(g: TrigPForm, tol: float = 1e-10) -> ExactnessResult:
    """Decide d_t-exactness of a form of degree >= 1 and build a primitive.

    Exactness on the torus amounts to (a) d_t g = 0 and (b) every eta = 0
    coefficient of g vanishing; the primitive is recovered per frequency
    by wedge division against i * sum_j eta_j dt_j.
    """
    from .wedge_solver import wedge_divide  # local import to avoid a cycle

    if g.degree < 1:
        raise DomainError("exactness is defined for forms of degree >= 1")
    exact_mode = g.exact and bool(g.coeffs)
    eff_tol = 0.0 if exact_mode else tol * max(g.max_abs(), 1.0)

    closed_residual = g.d_t().max_abs()
    zero_mode = 0.0
    failures = []
    zero_eta = (0,) * g.n
    for (K, eta, xi), v in g.coeffs.items():
        if eta == zero_eta and not scalar_is_zero(v, eff_tol):
            zero_mode = max(zero_mode, scalar_abs(v))
            failures.append(("zero-mode", K, eta, xi))
    closed_ok = closed_residual <= (0.0 if exact_mode else tol * max(g.max_abs(), 1.0))
    if not closed_ok:
        failures.append(("not-closed", None, None, None))
    ok = closed_ok and zero_mode == 0.0
    primitive = None
    if ok:
        prim = TrigPForm.zero(g.n, g.N, g.degree - 1)
        i_one = scalar_i(exact_mode)
        for (eta, xi), sl in g.by_frequency().items():
            if eta == zero_eta:
                continue
            L = ConstPForm(g.n, 1, {(j,): i_one * eta[j - 1]
                                    for j in range(1, g.n + 1) if eta[j - 1] != 0})
            v = wedge_divide(L, sl, tol=tol)
            prim.set_slice(eta, xi, v)
        primitive = prim
    return ExactnessResult(ok, primitive, closed_residual, zero_mode, failures)


class TrigPoly:
    """Trigonometric polynomial on T^n as a finite Fourier coefficient map."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Dict[Tuple[int, ...], Scalar] | None = None):
        self.n = n
        self.coeffs: Dict[Tuple[int, ...], Scalar] = {}
        if coeffs:
            for eta, v in coeffs.items():
                eta = tuple(int(e) for e in eta)
                if len(eta) != n:
                    raise DomainError("frequency arity mismatch")
                if not scalar_is_zero(v):
                    self.coeffs[eta] = v

    @classmethod
    def constant(cls, n: int, value: Scalar) -> "TrigPoly":
        return cls(n, {(0,) * n: value})

    @classmethod
    def axis(cls, n: int, j: int, coeffs_1d: Dict[int, Scalar]) -> "TrigPoly":
        """Lift a 1-d polynomial in t_j to T^n."""
        out = {}
        for k, v in coeffs_1d.items():
            eta = [0] * n
            eta[j - 1] = int(k)
            out[tuple(eta)] = v
        return cls(n, out)

    def items(self):
        return self.coeffs.items()

    @property
    def exact(self) -> bool:
        return all(is_exact_scalar(v) for v in self.coeffs.values())

    def mean(self) -> Scalar:
        zero = (0,) * self.n
        return self.coeffs.get(zero, 0j if not self.exact or not self.coeffs else GaussianRational(0))

    def bandwidth(self) -> int:
        return max((max(map(abs, eta), default=0) for eta in self.coeffs), default=0)

    def support_axes(self) -> set:
        axes = set()
        for eta in self.coeffs:
            for j, e in enumerate(eta, start=1):
                if e != 0:
                    axes.add(j)
        return axes

    def add(self, other: "TrigPoly") -> "TrigPoly":
        out = dict(self.coeffs)
        for eta, v in other.coeffs.items():
            w = out.get(eta)
            out[eta] = v if w is None else w + v
        return TrigPoly(self.n, out)

    def scale(self, c: Scalar) -> "TrigPoly":
        return TrigPoly(self.n, {eta: c * v for eta, v in self.coeffs.items()})

    def mul(self, other: "TrigPoly") -> "TrigPoly":
        out: Dict[Tuple[int, ...], Scalar] = {}
        for e1, v1 in self.coeffs.items():
            for e2, v2 in other.coeffs.items():
                eta = tuple(a + b for a, b in zip(e1, e2))
                term = v1 * v2
                w = out.get(eta)
                out[eta] = term if w is None else w + term
        return TrigPoly(self.n, out)

    def partial(self, j: int) -> "TrigPoly":
        i_one = scalar_i(self.exact and bool(self.coeffs))
        return TrigPoly(self.n, {eta: i_one * eta[j - 1] * v
                                 for eta, v in self.coeffs.items() if eta[j - 1] != 0})

    def convolve_coeffs(self, series: Dict[Tuple[int, ...], Scalar]) -> Dict[Tuple[int, ...], Scalar]:
        """Convolution of this polynomial against an arbitrary coefficient map."""
        out: Dict[Tuple[int, ...], Scalar] = {}
        for e1, v1 in self.coeffs.items():
            for e2, v2 in series.items():
                eta = tuple(a + b for a, b in zip(e1, e2))
                term = v1 * v2
                w = out.get(eta)
                out[eta] = term if w is None else w + term
        return out

    def eval_at(self, t) -> complex:
        t = np.asarray(t, dtype=float)
        total = 0j
        for eta, v in self.coeffs.items():
            total += to_complex(v) * np.exp(1j * float(np.dot(eta, t)))
        return total

    def eval_grid(self, grid: int) -> np.ndarray:
        """Values on the uniform grid (2*pi*k/grid) in every axis."""
        spec = np.zeros((grid,) * self.n, dtype=complex)
        for eta, v in self.coeffs.items():
            spec[tuple(e % grid for e in eta)] += to_complex(v)
        return np.fft.ifftn(spec) * grid**self.n

    def is_real_valued(self, tol: float = 1e-12) -> bool:
        for eta, v in self.coeffs.items():
            w = self.coeffs.get(tuple(-e for e in eta))
            conj = (w.conjugate() if w is not None
                    else (GaussianRational(0) if is_exact_scalar(v) else 0j))
            if not scalar_is_zero(v - conj, tol):
                return False
        return True

    def to_float(self) -> "TrigPoly":
        return TrigPoly(self.n, {eta: to_complex(v) for eta, v in self.coeffs.items()})

    def __repr__(self):
        return f"TrigPoly(n={self.n}, {len(self.coeffs)} terms)"


def random_const_form(rng, n: int, degree: int, exact: bool = False,
                      lo: int = -2, hi: int = 2) -> ConstPForm:
    """Random form with small integer coefficient grid (test helper)."""
    coeffs = {}
    for K in combinations_increasing(n, degree):
        a = rng.randint(lo, hi)
        b = rng.randint(lo, hi)
        if exact:
            coeffs[K] = GaussianRational(a, b)
        else:
            coeffs[K] = complex(a, b)
    return ConstPForm(n, degree, coeffs)


def combinations_increasing(n: int, p: int):
    from itertools import combinations

    return combinations(range(1, n + 1), p)
