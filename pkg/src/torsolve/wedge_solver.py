"""Wedge division: solve L ^ U = F for constant forms.

Given a nonzero constant 1-form L and a (p+1)-form F with L ^ F = 0,
a particular solution is assembled from the components of F on the
multi-indices containing a fixed pivot index mu:

    U0 = sum_{J contains mu} sign(mu, J) * F_J / L_mu * dt_{J \\ mu}.

The pivot is chosen with maximal modulus (every division is by the
largest coefficient of L); the defining identity wedge(L, U0) = F is the
master property test of the package. Summing instead over per-J pivots
breaks the identity (see tests for a concrete 3-dimensional
counterexample), so a single global pivot is the only mode offered.
"""

from __future__ import annotations

from .errors import CompatibilityError, DomainError
from .forms import ConstPForm, wedge_sign
from .scalars import scalar_abs, scalar_abs2

DEFAULT_COMPAT_TOL = 1e-9


def wedge_compat(L: ConstPForm, F: ConstPForm, tol: float = DEFAULT_COMPAT_TOL) -> bool:
    """True iff wedge(L, F) vanishes (exactly in exact mode, else relatively)."""
    if L.n != F.n:
        raise DomainError("ambient dimension mismatch")
    residual = L.wedge(F)
    if L.exact and F.exact:
        return residual.is_zero()
    return residual.max_abs() <= tol * max(L.max_abs() * F.max_abs(), 1e-300)


def compat_residual(L: ConstPForm, F: ConstPForm) -> float:
    return L.wedge(F).max_abs()


def pivot_index(L: ConstPForm) -> int:
    """Index of the maximal-modulus coefficient of a 1-form (ties: smallest j)."""
    if L.degree != 1:
        raise DomainError("pivot selection expects a 1-form")
    best_j, best = None, None
    for (j,), v in sorted(L.items()):
        m = scalar_abs2(v)
        if best is None or m > best:
            best_j, best = j, m
    if best_j is None or best == 0:
        raise DomainError("zero 1-form has no pivot")
    return best_j


def wedge_divide(L: ConstPForm, F: ConstPForm, tol: float = DEFAULT_COMPAT_TOL,
                 check: bool = True) -> ConstPForm:
    """Particular solution U0 of wedge(L, U0) = F via max-modulus pivoting."""
    if L.n != F.n:
        raise DomainError("ambient dimension mismatch")
    if L.degree != 1:
        raise DomainError("left factor must be a 1-form")
    if F.degree < 1:
        raise DomainError("right-hand side must have degree >= 1")
    if L.is_zero():
        raise DomainError("wedge division by the zero 1-form")
    if check and not wedge_compat(L, F, tol):
        raise CompatibilityError(
            f"compatibility violated: |L^F| = {compat_residual(L, F):.3e}")
    mu = pivot_index(L)
    L_mu = L.get((mu,))
    # Pivot stability: division is always by the largest-magnitude coefficient.
    assert scalar_abs(L_mu) >= max(scalar_abs(v) for _, v in L.items()) * (1 - 1e-12)
    out = {}
    for J, F_J in F.items():
        if mu not in J:
            continue
        K = tuple(k for k in J if k != mu)
        term = F_J / L_mu
        if wedge_sign(mu, J) < 0:
            term = -term
        out[K] = term
    return ConstPForm(L.n, F.degree - 1, out)


def wedge_general(L: ConstPForm, F: ConstPForm, W: ConstPForm,
                  tol: float = DEFAULT_COMPAT_TOL) -> ConstPForm:
    """General solution U0 + L ^ W; W has degree p-1 (degree -1 means W = 0)."""
    U0 = wedge_divide(L, F, tol=tol)
    if U0.degree == 0:
        if not W.is_zero():
            raise DomainError("degree-0 solutions admit no homogeneous part")
        return U0
    if W.degree != U0.degree - 1:
        raise DomainError("homogeneous part has wrong degree")
    return U0.add(L.wedge(W))
