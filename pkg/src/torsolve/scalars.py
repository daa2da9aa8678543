"""Scalar arithmetic for the two coefficient modes.

Every form in the package carries coefficients in exactly one of two
scalar modes:

* float mode -- plain Python ``complex``,
* exact mode -- :class:`GaussianRational`, a complex number with
  ``fractions.Fraction`` real and imaginary parts.

Exact mode exists so that the algebraic identities (wedge division,
d_t o d_t = 0, divisor lower bounds) can be asserted with literal
equality; float mode exists for scale. The two modes are never mixed
inside a single form.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

from .errors import DomainError

FractionLike = Union[int, str, Fraction]


class GaussianRational:
    """Complex number with exact rational real/imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: FractionLike = 0, im: FractionLike = 0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    # -- arithmetic ----------------------------------------------------
    def _coerce(self, other) -> "GaussianRational":
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other, 0)
        raise TypeError(f"cannot mix GaussianRational with {type(other).__name__}")

    def __add__(self, other):
        o = self._coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return GaussianRational(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    # -- predicates / conversions --------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            o = self._coerce(other)
            return self.re == o.re and self.im == o.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    @property
    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return math.sqrt(float(self.abs2))

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"


Scalar = Union[complex, GaussianRational]

QC_ZERO = GaussianRational(0, 0)
QC_ONE = GaussianRational(1, 0)
QC_I = GaussianRational(0, 1)


def as_exact(x) -> GaussianRational:
    """Coerce ints/Fractions/strings ("3/4") to a GaussianRational."""
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction, str)):
        return GaussianRational(Fraction(x), 0)
    if isinstance(x, tuple) and len(x) == 2:
        return GaussianRational(Fraction(x[0]), Fraction(x[1]))
    raise TypeError(f"cannot interpret {x!r} as an exact scalar")


def is_exact_scalar(z: Scalar) -> bool:
    return isinstance(z, GaussianRational)


def scalar_zero(exact: bool) -> Scalar:
    return GaussianRational(0, 0) if exact else 0j


def scalar_i(exact: bool) -> Scalar:
    return GaussianRational(0, 1) if exact else 1j


def scalar_is_zero(z: Scalar, tol: float = 0.0) -> bool:
    if isinstance(z, GaussianRational):
        return not z
    return abs(z) <= tol


def scalar_abs(z: Scalar) -> float:
    return abs(z)


def scalar_abs2(z: Scalar):
    """|z|^2, exact (Fraction) in exact mode, float otherwise."""
    if isinstance(z, GaussianRational):
        return z.abs2
    return (z * z.conjugate()).real


def exact_abs(z: GaussianRational) -> Fraction:
    """Exact |z| for scalars lying on the real or imaginary axis."""
    if z.im == 0:
        return abs(z.re)
    if z.re == 0:
        return abs(z.im)
    raise DomainError("exact modulus requires a real or purely imaginary scalar")


def to_complex(z: Scalar) -> complex:
    if isinstance(z, GaussianRational):
        return z.to_complex()
    return complex(z)


def frac_nearest_int(x: Fraction) -> int:
    """Nearest integer with half-cases rounded down (deterministic)."""
    return math.floor(x + Fraction(1, 2))


def frac_dist_to_int(x: Fraction) -> Fraction:
    r = x - math.floor(x)
    return min(r, 1 - r)


def integer_nth_root(a: int, n: int) -> int:
    """Floor of the n-th root of a nonnegative integer."""
    if a < 0 or n < 1:
        raise DomainError("integer_nth_root expects a >= 0 and n >= 1")
    if a == 0:
        return 0
    if n == 1:
        return a
    if n == 2:
        return math.isqrt(a)
    x = int(round(a ** (1.0 / n))) + 1
    while x > 0 and x**n > a:
        x -= 1
    while (x + 1) ** n <= a:
        x += 1
    return x


def sqrt_fraction(x: Fraction, digits: int) -> Fraction:
    """Rational lower approximation of sqrt(x) accurate to 10^-digits."""
    if x < 0:
        raise DomainError("sqrt of negative rational")
    scale = 10**digits
    num = x.numerator * scale * scale * x.denominator
    return Fraction(math.isqrt(num), x.denominator * scale)


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def scalar_to_json(z: Scalar) -> dict:
    if isinstance(z, GaussianRational):
        return {"re": format_fraction(z.re), "im": format_fraction(z.im)}
    zc = complex(z)
    return {"re": zc.real, "im": zc.imag}


def scalar_from_json(d: dict, exact: bool) -> Scalar:
    if exact:
        return GaussianRational(Fraction(d["re"]), Fraction(d["im"]))
    re = d["re"]
    im = d["im"]
    if isinstance(re, str):
        re = float(Fraction(re))
    if isinstance(im, str):
        im = float(Fraction(im))
    return complex(re, im)
