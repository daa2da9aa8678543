"""Reduction of variable coefficients to the constant-coefficient normal form.

The coefficient 1-form splits per frequency as a constant part (the
means) plus an exact part with a trig-polynomial potential; the
conjugating isomorphism multiplies each partial Fourier slice by the
exponential of that potential. A polynomial bound on the exponential's
magnitude (the growth condition checked by :func:`check_condition_D`)
is what keeps the conjugation tame as the frequency grows; at desk
scale everything is finite and the identity itself is verified
numerically by :func:`verify_conjugation`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BandwidthError, ClosednessError, DomainError
from .forms import FrequencyBox, TrigPForm, TrigPoly, combinations_increasing, merge_sign
from .scalars import to_complex
from .spectral import _least_squares, apply_operator
from .symbols import SystemSpec, ToroidalSymbol, classify_growth

Xi = Tuple[int, ...]


# ---------------------------------------------------------------------------
# coefficient profiles
# ---------------------------------------------------------------------------

@dataclass
class CoefficientProfile:
    """The smooth coefficients c_j(t), one trig polynomial per operator."""

    n: int
    coefficients: List[TrigPoly]

    def __post_init__(self):
        if len(self.coefficients) != self.n:
            raise DomainError("need one coefficient per operator")
        for c in self.coefficients:
            if c.n != self.n:
                raise DomainError("coefficient arity mismatch")

    @staticmethod
    def decoupled(coeffs_1d: Sequence[Dict[int, object]]) -> "CoefficientProfile":
        """Build from per-axis 1-d coefficient maps c_j(t_j)."""
        n = len(coeffs_1d)
        return CoefficientProfile(
            n, [TrigPoly.axis(n, j + 1, dict(c)) for j, c in enumerate(coeffs_1d)])

    @property
    def exact(self) -> bool:
        return all(c.exact for c in self.coefficients)

    @property
    def is_decoupled(self) -> bool:
        return all(c.support_axes() <= {j} for j, c in
                   enumerate(self.coefficients, start=1))

    def means(self) -> List[complex]:
        return [to_complex(c.mean()) for c in self.coefficients]

    def axis_poly(self, j: int) -> Dict[int, complex]:
        """1-d coefficient map of c_j along t_j (decoupled profiles)."""
        out = {}
        for eta, v in self.coefficients[j - 1].coeffs.items():
            out[eta[j - 1]] = out.get(eta[j - 1], 0j) + to_complex(v)
        return out

    def bandwidth(self) -> int:
        return max((c.bandwidth() for c in self.coefficients), default=0)


def normal_form_system(spec: SystemSpec, profile: CoefficientProfile) -> SystemSpec:
    """Constant-coefficient system with the coefficients replaced by means."""
    means = profile.means()
    return SystemSpec(spec.n, spec.N, tuple(
        ToroidalSymbol.scaled(s, m) for s, m in zip(spec.symbols, means)))


def closedness_violations(profile: CoefficientProfile, spec: SystemSpec,
                          box: FrequencyBox, tol: float = 1e-10) -> List[tuple]:
    """Check p_j(xi) d_k c_j = p_k(xi) d_j c_k for all j < k over the box."""
    n = profile.n
    violations = []
    for xi in box.iter_xi(spec.N):
        ps = [complex(spec.symbols[j].evaluate(xi)) for j in range(n)]
        for j in range(n):
            for k in range(j + 1, n):
                cj, ck = profile.coefficients[j], profile.coefficients[k]
                etas = set(cj.coeffs) | set(ck.coeffs)
                for eta in etas:
                    lhs = ps[j] * 1j * eta[k] * to_complex(cj.coeffs.get(eta, 0))
                    rhs = ps[k] * 1j * eta[j] * to_complex(ck.coeffs.get(eta, 0))
                    if abs(lhs - rhs) > tol:
                        violations.append((xi, j + 1, k + 1, eta, abs(lhs - rhs)))
    return violations


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------

@dataclass
class NormalFormData:
    """Per-xi split of the coefficient form into mean + exact part.

    potentials[xi] is the trig polynomial with d_t potential = c(., xi)
    minus its mean form, normalized to vanish at t = 0 (matching the
    base-point primitives used for decoupled systems)."""

    spec: SystemSpec
    profile: CoefficientProfile
    box: FrequencyBox
    means: List[complex]
    potentials: Dict[Xi, TrigPoly]
    decoupled: bool

    def mean_form(self, xi: Xi) -> List[complex]:
        return [m * complex(s.evaluate(xi))
                for m, s in zip(self.means, self.spec.symbols)]

    def axis_potentials(self, xi: Xi) -> List[Dict[int, complex]]:
        """Per-axis 1-d potentials g_j with potential = sum_j g_j(t_j)
        (decoupled profiles only); the constant term is split onto axis 1."""
        if not self.decoupled:
            raise DomainError("axis potentials need a decoupled profile")
        pot = self.potentials[xi]
        out = [dict() for _ in range(self.spec.n)]
        const = 0j
        for eta, v in pot.coeffs.items():
            axes = [j for j, e in enumerate(eta) if e != 0]
            if not axes:
                const += to_complex(v)
                continue
            out[axes[0]][eta[axes[0]]] = to_complex(v)
        out[0][0] = out[0].get(0, 0j) + const
        return out


def decompose(profile: CoefficientProfile, spec: SystemSpec, box: FrequencyBox,
              tol: float = 1e-10) -> NormalFormData:
    """Split c(., xi) = mean + d_t potential per box frequency.

    The potential is solved in Fourier space (dividing by i eta_j on a
    maximal component) with cross-component consistency enforced by the
    closedness of the coefficient form; it is normalized to vanish at the
    origin so outputs are deterministic and match base-point primitives.
    """
    bad = closedness_violations(profile, spec, box, tol=tol)
    if bad:
        raise ClosednessError(
            f"coefficient form is not closed at {len(bad)} box frequencies",
            violations=bad)
    means = profile.means()
    potentials: Dict[Xi, TrigPoly] = {}
    n = profile.n
    for xi in box.iter_xi(spec.N):
        ps = [complex(spec.symbols[j].evaluate(xi)) for j in range(n)]
        coeffs: Dict[Tuple[int, ...], complex] = {}
        etas = set()
        for c in profile.coefficients:
            etas |= set(c.coeffs)
        for eta in etas:
            if all(e == 0 for e in eta):
                continue
            j = max(range(n), key=lambda jj: abs(eta[jj]))
            num = ps[j] * to_complex(profile.coefficients[j].coeffs.get(eta, 0))
            val = num / (1j * eta[j])
            if val != 0:
                coeffs[eta] = val
        at_zero = sum(coeffs.values(), 0j)
        if at_zero != 0:
            coeffs[(0,) * n] = -at_zero
        potentials[xi] = TrigPoly(n, coeffs)
    return NormalFormData(spec, profile, box, means, potentials,
                          profile.is_decoupled)


# ---------------------------------------------------------------------------
# growth condition
# ---------------------------------------------------------------------------

@dataclass
class ConditionDReport:
    mode: str                       # "integral" | "periodic"
    per_xi: List[Tuple[Xi, float, float]]   # (xi, S, log S)
    kappa: float
    log10_c: float
    super_polynomial: bool
    passes: bool

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "per_xi": [{"xi": list(x), "sup_exp_im": s, "log_sup": ls}
                       for x, s, ls in self.per_xi],
            "fit": {"kappa": self.kappa, "log10_C": self.log10_c},
            "verdict": "super-polynomial" if self.super_polynomial else "polynomial",
            "scope": "empirical (finite box)",
        }


def _imag_part_coeffs(m: Dict[int, complex]) -> Dict[int, complex]:
    keys = set(m) | {-k for k in m}
    return {k: (m.get(k, 0j) - m.get(-k, 0j).conjugate()) / 2j for k in keys}


def _axis_integral_sup(m_coeffs: Dict[int, complex], grid: int = 1024) -> float:
    """sup over [0, 2pi] of the base-point primitive of a real 1-d trig
    polynomial given by coefficients of its complex exponentials."""
    zeta = 2 * np.pi * np.arange(grid + 1) / grid
    total = np.zeros(grid + 1)
    for k, v in m_coeffs.items():
        if k == 0:
            total += v.real * zeta
        else:
            total += ((v * (np.exp(1j * k * zeta) - 1)) / (1j * k)).real
    return float(total.max())


def check_condition_D(nf: NormalFormData, box: Optional[FrequencyBox] = None,
                      mode: Optional[str] = None, grid_factor: int = 4) -> ConditionDReport:
    """Bound sup_t exp(Im potential) by a power of |xi| over the box.

    Decoupled profiles default to the per-axis integral form (the sup of
    exp of the base-point primitive of Im[c_j(s) p_j(xi)], multiplied
    over axes); general profiles use the periodic potential itself. The
    fit is a least-violation power law in log-log coordinates and the
    verdict flags super-polynomial escalation.
    """
    box = box or nf.box
    if mode is None:
        mode = "integral" if nf.decoupled else "periodic"
    per_xi: List[Tuple[Xi, float, float]] = []
    for xi in box.iter_xi(nf.spec.N):
        if mode == "integral":
            if not nf.decoupled:
                raise DomainError("integral mode needs a decoupled profile")
            log_s = 0.0
            for j in range(1, nf.spec.n + 1):
                p = complex(nf.spec.symbols[j - 1].evaluate(xi))
                m = {k: v * p for k, v in nf.profile.axis_poly(j).items()}
                log_s += _axis_integral_sup(_imag_part_coeffs(m))
        else:
            pot = nf.potentials[xi]
            grid = max(32, grid_factor * max(pot.bandwidth(), 1))
            vals = pot.eval_grid(grid)
            log_s = float(vals.imag.max())
        s = math.exp(log_s) if log_s < 700 else math.inf
        per_xi.append((xi, s, log_s))

    def radius(xi):
        return max(map(abs, xi), default=0)

    pts = [(math.log(radius(xi)), ls) for xi, _, ls in per_xi if radius(xi) >= 2]
    slope, _ = _least_squares(pts)
    kappa = max(0.0, slope)
    resid = max((ls - kappa * lx for lx, ls in pts), default=0.0)
    log10_c = resid / math.log(10)
    exps = [(radius(xi), ls / math.log(radius(xi)))
            for xi, _, ls in per_xi if radius(xi) >= 2]
    xmax = max((r for r, _ in exps), default=0)
    split = math.sqrt(xmax) if xmax >= 4 else 1
    inner = [e for r, e in exps if r < split]
    outer = [e for r, e in exps if r >= split]
    super_poly = bool(outer) and max(outer) > max(
        1.0, (max(inner) if inner else 0.0) + 0.5)
    return ConditionDReport(mode, per_xi, kappa, log10_c, super_poly,
                            not super_poly)


# ---------------------------------------------------------------------------
# the conjugating multiplier
# ---------------------------------------------------------------------------

def _factor_coeffs_1d(g: Dict[int, complex], sign: float, keep: int) -> np.ndarray:
    """Fourier coefficients of exp(sign * i * g(t)) on offsets [-keep, keep]."""
    band = max((abs(k) for k in g), default=0)
    grid = 1
    while grid < 4 * (keep + band + 2):
        grid *= 2
    t = 2 * np.pi * np.arange(grid) / grid
    vals = np.zeros(grid, dtype=complex)
    for k, v in g.items():
        vals += v * np.exp(1j * k * t)
    fac = np.exp(sign * 1j * vals)
    spectrum = np.fft.fft(fac) / grid
    idx = np.arange(-keep, keep + 1) % grid
    return spectrum[idx]


def _effective_width(fac: np.ndarray, rel_tol: float) -> int:
    """Smallest w with all |coefficients| beyond offset w below rel_tol."""
    keep = (fac.size - 1) // 2
    mags = np.abs(fac)
    top = mags.max()
    w = keep
    while w > 0:
        lo = mags[keep - w]
        hi = mags[keep + w]
        if max(lo, hi) > rel_tol * top:
            break
        w -= 1
    return w


class MultiplierBank:
    """Per-(xi, axis, sign) Toeplitz blocks of the conjugating multiplier.

    Only decoupled profiles factor per axis; general potentials fall back
    to an n-dimensional grid multiply. Widths are chosen adaptively from
    the measured factor tails, capped by cap_factor times the input
    bandwidth, and every discard is audited against tail_tol.
    """

    def __init__(self, nf: NormalFormData, cap_factor: int = 4,
                 tail_tol: float = 1e-9):
        self.nf = nf
        self.cap_factor = cap_factor
        self.tail_tol = tail_tol
        self._fac: Dict[Tuple[Xi, int, int], np.ndarray] = {}
        self._width: Dict[Tuple[Xi, int], int] = {}

    def factor(self, xi: Xi, axis: int, sign: int) -> np.ndarray:
        key = (xi, axis, sign)
        if key not in self._fac:
            if xi not in self.nf.potentials:
                raise DomainError(f"xi={xi} outside the decomposed box")
            axes = self.nf.axis_potentials(xi)
            probe = 96
            self._fac[key] = _factor_coeffs_1d(axes[axis], float(sign), probe)
        return self._fac[key]

    def width(self, xi: Xi, b_in: int) -> int:
        key = (xi, b_in)
        if key not in self._width:
            w = 0
            for axis in range(self.nf.spec.n):
                for sign in (-1, 1):
                    fac = self.factor(xi, axis, sign)
                    w = max(w, _effective_width(fac, self.tail_tol * 1e-2))
            cap = self.cap_factor * max(b_in, 1)
            width = min(b_in + w + 2, cap)
            # audit: whatever the cap discards must be below tail_tol
            lo = max(width - b_in, 0)
            if math.isfinite(self.tail_tol):
                for axis in range(self.nf.spec.n):
                    for sign in (-1, 1):
                        fac = self.factor(xi, axis, sign)
                        keep = (fac.size - 1) // 2
                        if lo >= keep:
                            continue
                        tail = np.abs(np.concatenate(
                            [fac[:keep - lo], fac[keep + lo + 1:]])).max()
                        if tail > self.tail_tol * max(np.abs(fac).max(), 1e-300):
                            raise BandwidthError(
                                "multiplier tail exceeds the bandwidth cap; "
                                "raise cap_factor or tail_tol")
            self._width[key] = width
        return self._width[key]

    def matrix(self, xi: Xi, axis: int, sign: int, out_w: int, in_b: int) -> np.ndarray:
        fac = self.factor(xi, axis, sign)
        keep = (fac.size - 1) // 2
        out_idx = np.arange(-out_w, out_w + 1)
        in_idx = np.arange(-in_b, in_b + 1)
        offs = out_idx[:, None] - in_idx[None, :]
        if np.abs(offs).max() > keep:
            fac = _factor_coeffs_1d(self.nf.axis_potentials(xi)[axis],
                                    float(sign), int(np.abs(offs).max()))
            keep = (fac.size - 1) // 2
            self._fac[(xi, axis, sign)] = fac
        return fac[offs + keep]

    def apply_stack(self, arr: np.ndarray, xi: Xi, sign: int, out_w: int) -> np.ndarray:
        """Multiply a stacked batch (B, m, ..., m) by the xi multiplier."""
        n = self.nf.spec.n
        b_in = (arr.shape[1] - 1) // 2
        res = arr
        for axis in range(n):
            M = self.matrix(xi, axis, sign, out_w, (res.shape[axis + 1] - 1) // 2)
            res = np.tensordot(M, res, axes=([1], [axis + 1]))
            res = np.moveaxis(res, 0, axis + 1)
        return res


def psi_apply(nf: NormalFormData, u: TrigPForm, direction: str = "forward",
              cap_factor: int = 4, tail_tol: float = 1e-9,
              drop_tol: float = 1e-15, bank: Optional[MultiplierBank] = None
              ) -> TrigPForm:
    """Multiply each partial slice by exp(-+ i potential(t, xi)).

    forward uses exp(-i potential), inverse exp(+i potential); output
    bandwidth is chosen from the measured multiplier tails, capped at
    cap_factor times the input bandwidth, with the discarded tail audited
    against tail_tol. forward(inverse(u)) returns u up to that audit.
    """
    if direction not in ("forward", "inverse"):
        raise DomainError("direction must be forward or inverse")
    sign = -1 if direction == "forward" else 1
    if not nf.decoupled:
        return _psi_apply_grid(nf, u, sign, cap_factor, tail_tol, drop_tol)
    bank = bank or MultiplierBank(nf, cap_factor, tail_tol)
    n = u.n
    grouped: Dict[Tuple[tuple, Xi], Dict[tuple, complex]] = {}
    for (K, eta, xi), v in u.coeffs.items():
        grouped.setdefault((K, xi), {})[eta] = to_complex(v)
    out: Dict[tuple, complex] = {}
    for (K, xi), series in grouped.items():
        b_in = max(max(abs(e) for eta in series for e in eta), 1)
        width = bank.width(xi, b_in)
        arr = _dense_from_series(series, b_in, n)[None, ...]
        res = bank.apply_stack(arr, xi, sign, width)[0]
        _dense_to_coeffs(res, width, K, xi, out, drop_tol)
    return TrigPForm(u.n, u.N, u.degree, out)


def _psi_apply_grid(nf: NormalFormData, u: TrigPForm, sign: int,
                    cap_factor: int, tail_tol: float, drop_tol: float) -> TrigPForm:
    """Grid-based multiplier for non-separable potentials (small n only)."""
    n = u.n
    out: Dict[tuple, complex] = {}
    grouped: Dict[Tuple[tuple, Xi], Dict[tuple, complex]] = {}
    for (K, eta, xi), v in u.coeffs.items():
        grouped.setdefault((K, xi), {})[eta] = to_complex(v)
    for (K, xi), series in grouped.items():
        pot = nf.potentials[xi]
        b_in = max(max(abs(e) for eta in series for e in eta), 1)
        width = cap_factor * b_in
        band = max(pot.bandwidth(), 1)
        grid = 1
        while grid < 4 * (width + band + 2):
            grid *= 2
        vals = pot.eval_grid(grid)
        fac = np.exp(sign * 1j * vals)
        fac_spec = np.fft.fftn(fac) / grid**n
        # audit the multiplier tail beyond what the cap can absorb
        mags = np.abs(fac_spec)
        freqs = np.fft.fftfreq(grid, d=1.0 / grid).astype(int)
        sup = np.zeros((grid,) * n)
        for axis in range(n):
            shape = [1] * n
            shape[axis] = grid
            sup = np.maximum(sup, np.abs(freqs).reshape(shape))
        tail = mags[sup > max(width - b_in, 0)].max(initial=0.0)
        if tail > tail_tol * max(mags.max(), 1e-300):
            raise BandwidthError("multiplier tail exceeds the bandwidth cap; "
                                 "raise cap_factor or tail_tol")
        spec_u = np.zeros((grid,) * n, dtype=complex)
        for eta, v in series.items():
            spec_u[tuple(e % grid for e in eta)] = v
        prod = np.fft.fftn(fac * (np.fft.ifftn(spec_u) * grid**n)) / grid**n
        res = np.empty((2 * width + 1,) * n, dtype=complex)
        it = np.nditer(res, flags=["multi_index"], op_flags=["writeonly"])
        for slot in it:
            eta = tuple(i - width for i in it.multi_index)
            slot[...] = prod[tuple(e % grid for e in eta)]
        _dense_to_coeffs(res, width, K, xi, out, drop_tol)
    return TrigPForm(u.n, u.N, u.degree, out)


def _dense_from_series(series: Dict[tuple, complex], b: int, n: int) -> np.ndarray:
    arr = np.zeros((2 * b + 1,) * n, dtype=complex)
    for eta, v in series.items():
        arr[tuple(e + b for e in eta)] = v
    return arr


def _dense_to_coeffs(res: np.ndarray, width: int, K, xi, out: dict,
                     drop_tol: float) -> None:
    top = np.abs(res).max()
    if top == 0:
        return
    keep = np.argwhere(np.abs(res) > drop_tol * top)
    for idx in keep:
        eta = tuple(int(i) - width for i in idx)
        key = (K, eta, xi)
        out[key] = out.get(key, 0j) + complex(res[tuple(idx)])


# ---------------------------------------------------------------------------
# conjugation check
# ---------------------------------------------------------------------------

@dataclass
class ConjugationReport:
    residuals: Dict[int, float]              # p -> max residual over trials
    halving: Dict[int, Tuple[float, float]]  # p -> (residual@cap, residual@half cap)
    trials: int
    cap_factor: int

    def to_json(self) -> dict:
        return {
            "max_residual": max(self.residuals.values(), default=0.0),
            "per_level": {str(p): r for p, r in self.residuals.items()},
            "halving": {str(p): list(v) for p, v in self.halving.items()},
            "trials": self.trials,
        }


def random_trig_form(rng, n: int, N: int, degree: int, box: FrequencyBox,
                     fill: float = 1.0) -> TrigPForm:
    coeffs = {}
    for K in combinations_increasing(n, degree):
        for eta in box.iter_eta(n):
            for xi in box.iter_xi(N):
                if fill >= 1.0 or rng.random() < fill:
                    coeffs[(K, eta, xi)] = complex(rng.gauss(0, 1), rng.gauss(0, 1))
    f = TrigPForm(n, N, degree, coeffs)
    top = f.max_abs()
    return f.scale(1.0 / top) if top > 0 else f


def _random_stacks(seed: int, trials: int, n_keys: int, b: int, n: int,
                   box: FrequencyBox, N: int) -> Dict[Xi, np.ndarray]:
    """Per-xi stacked random slices (trials*n_keys, (2b+1)^n), normalized
    so every trial form has unit sup coefficient norm."""
    gen = np.random.default_rng(seed)
    shape = (trials * n_keys,) + (2 * b + 1,) * n
    stacks = {xi: gen.standard_normal(shape) + 1j * gen.standard_normal(shape)
              for xi in box.iter_xi(N)}
    tops = np.zeros(trials)
    for arr in stacks.values():
        per = np.abs(arr).reshape(trials, -1).max(axis=1)
        tops = np.maximum(tops, per)
    scale = 1.0 / np.where(tops > 0, tops, 1.0)
    for arr in stacks.values():
        arr *= scale.repeat(n_keys).reshape((-1,) + (1,) * n)
    return stacks


def _operator_stack(arr: np.ndarray, keys_in: List[tuple], keys_out: List[tuple],
                    lead: List[complex], n: int, n_trials: int) -> np.ndarray:
    """Apply the constant-coefficient slice action on a stacked batch.

    arr is (n_trials*len(keys_in), m, ..., m); lead[j] = c_j0 p_j(xi).
    Output components J = j ^ K with the derivative index added."""
    m = arr.shape[1]
    b = (m - 1) // 2
    eta_axis = np.arange(-b, b + 1)
    out = np.zeros((n_trials * len(keys_out),) + arr.shape[1:], dtype=complex)
    idx_in = {K: i for i, K in enumerate(keys_in)}
    idx_out = {K: i for i, K in enumerate(keys_out)}
    arr_view = arr.reshape((n_trials, len(keys_in)) + arr.shape[1:])
    out_view = out.reshape((n_trials, len(keys_out)) + arr.shape[1:])
    for K in keys_in:
        for j in range(1, n + 1):
            J, s = merge_sign((j,), K)
            if J is None:
                continue
            shape = [1] * n
            shape[j - 1] = m
            mult = 1j * (eta_axis.reshape(shape) + lead[j - 1])
            out_view[:, idx_out[J]] += (s * mult) * arr_view[:, idx_in[K]]
    return out


def verify_conjugation(profile: CoefficientProfile, spec: SystemSpec,
                       box: FrequencyBox, trials: int = 5,
                       p_list: Sequence[int] = (0,), rng=None,
                       cap_factor: int = 4, tail_tol: float = 1e-9,
                       nf: Optional[NormalFormData] = None,
                       halving_check: bool = True) -> ConjugationReport:
    """Drive the conjugation identity on random forms.

    The variable-coefficient action is computed directly (spectral d_t
    plus coefficient convolution) and compared against the multiplier
    sandwich around the normal form; the sup-norm gap is reported per
    level together with a halved-cap rerun showing the gap is dominated
    by bandwidth truncation. Decoupled profiles run on stacked per-xi
    batches; general profiles fall back to the form-level path.
    """
    import random as _random

    rng = rng or _random.Random(0)
    nf = nf or decompose(profile, spec, box)
    spec0 = normal_form_system(spec, profile)
    residuals: Dict[int, float] = {}
    halving: Dict[int, Tuple[float, float]] = {}
    for p in p_list:
        if nf.decoupled:
            seed = rng.randrange(2**31)
            worst = _conjugation_batch(nf, spec, spec0, profile, box, seed,
                                       trials, p, cap_factor, tail_tol)
            if halving_check:
                half = _conjugation_batch(nf, spec, spec0, profile, box, seed,
                                          1, p, max(1, cap_factor // 2), math.inf)
                first = _conjugation_batch(nf, spec, spec0, profile, box, seed,
                                           1, p, cap_factor, tail_tol)
                halving[p] = (first, half)
            residuals[p] = worst
            continue
        us = [random_trig_form(rng, spec.n, spec.N, p, box) for _ in range(trials)]
        worst = 0.0
        for t, u in enumerate(us):
            direct = apply_operator(spec, u, profile=profile)
            w = psi_apply(nf, u, "inverse", cap_factor, tail_tol)
            w = apply_operator(spec0, w)
            back = psi_apply(nf, w, "forward", cap_factor, tail_tol)
            res = back.sub(direct).max_abs()
            worst = max(worst, res)
            if t == 0 and halving_check:
                half_cap = max(1, cap_factor // 2)
                wh = psi_apply(nf, u, "inverse", half_cap, math.inf)
                wh = apply_operator(spec0, wh)
                backh = psi_apply(nf, wh, "forward", half_cap, math.inf)
                halving[p] = (res, backh.sub(direct).max_abs())
        residuals[p] = worst
    return ConjugationReport(residuals, halving, trials, cap_factor)


def _conjugation_batch(nf: NormalFormData, spec: SystemSpec, spec0: SystemSpec,
                       profile: CoefficientProfile, box: FrequencyBox,
                       seed: int, trials: int, p: int, cap_factor: int,
                       tail_tol: float) -> float:
    """Max residual over a batch of random trial forms (decoupled path).

    The comparison window is the direct action's exact support (input
    bandwidth plus the coefficient bandwidth, padded by 2); the sandwich
    modes discarded beyond it are bounded by the audited multiplier
    tails rather than measured."""
    n = spec.n
    bank = MultiplierBank(nf, cap_factor, tail_tol)
    keys_in = list(combinations_increasing(n, p))
    keys_out = list(combinations_increasing(n, p + 1))
    worst = 0.0
    b = box.H
    out_w = b + profile.bandwidth() + 2
    stacks = _random_stacks(seed, trials, len(keys_in), b, n, box, spec.N)
    for xi in box.iter_xi(spec.N):
        lead0 = [complex(s.evaluate(xi)) for s in spec0.symbols]
        lead_var = [complex(s.evaluate(xi)) for s in spec.symbols]
        width = bank.width(xi, b)
        U = stacks[xi]
        V = bank.apply_stack(U, xi, +1, width)
        W = _operator_stack(V, keys_in, keys_out, lead0, n, trials)
        back = bank.apply_stack(W, xi, -1, out_w)
        direct = _direct_stack(U, keys_in, keys_out, lead_var, profile, n,
                               trials, out_w)
        worst = max(worst, float(np.abs(back - direct).max()))
    return worst


def _direct_stack(U: np.ndarray, keys_in: List[tuple], keys_out: List[tuple],
                  p_vals: List[complex], profile: CoefficientProfile, n: int,
                  n_trials: int, width: int) -> np.ndarray:
    """Variable-coefficient slice action on a stacked batch (decoupled)."""
    m = U.shape[1]
    b = (m - 1) // 2
    out = np.zeros((n_trials * len(keys_out),) + (2 * width + 1,) * n,
                   dtype=complex)
    pad = width - b
    idx_out = {K: i for i, K in enumerate(keys_out)}
    U_view = U.reshape((n_trials, len(keys_in)) + U.shape[1:])
    out_view = out.reshape((n_trials, len(keys_out)) + out.shape[1:])
    eta_axis = np.arange(-b, b + 1)
    for ki, K in enumerate(keys_in):
        blk = U_view[:, ki]
        for j in range(1, n + 1):
            J, s = merge_sign((j,), K)
            if J is None:
                continue
            shape = [1] * n
            shape[j - 1] = m
            term = _embed((1j * eta_axis.reshape(shape)) * blk, pad)
            if p_vals[j - 1] != 0:
                conv = _axis_conv_small(blk, profile.axis_poly(j), j - 1)
                term = term + (1j * p_vals[j - 1]) * _fit_to_width(conv, width)
            out_view[:, idx_out[J]] += s * term
    return out


def _embed(arr: np.ndarray, pad: int) -> np.ndarray:
    if pad == 0:
        return arr
    widths = [(0, 0)] + [(pad, pad)] * (arr.ndim - 1)
    return np.pad(arr, widths)


def _fit_to_width(arr: np.ndarray, width: int) -> np.ndarray:
    """Pad or crop every trailing axis to size 2*width + 1 symmetrically."""
    pads = [(0, 0)]
    slices = [slice(None)]
    for m in arr.shape[1:]:
        b = (m - 1) // 2
        d = width - b
        if d >= 0:
            pads.append((d, d))
            slices.append(slice(None))
        else:
            pads.append((0, 0))
            slices.append(slice(-d, m + d))
    return np.pad(arr[tuple(slices)], pads)


def _axis_conv_small(arr: np.ndarray, stencil: Dict[int, complex], axis: int
                     ) -> np.ndarray:
    """Convolve one axis with a small coefficient stencil (bandwidth grows)."""
    band = max((abs(k) for k in stencil), default=0)
    m = arr.shape[axis + 1]
    b = (m - 1) // 2
    out_b = b + band
    out_idx = np.arange(-out_b, out_b + 1)
    in_idx = np.arange(-b, b + 1)
    M = np.zeros((out_idx.size, in_idx.size), dtype=complex)
    for k, v in stencil.items():
        rows = in_idx + k
        for col, r in enumerate(rows):
            M[r + out_b, col] += v
    res = np.tensordot(M, arr, axes=([1], [axis + 1]))
    return np.moveaxis(res, 0, axis + 1)


# ---------------------------------------------------------------------------
# decoupled classifier
# ---------------------------------------------------------------------------

@dataclass
class SignVerdict:
    changes_sign: bool
    certified: bool
    min_abs: float


def sign_change(poly_1d: Dict[int, complex], grid: int = 1024) -> SignVerdict:
    """Sign-change detection for a real 1-d trig polynomial.

    Grid evaluation plus a derivative bound: if every grid value clears
    h * sup|f'| with one sign, the sign is certified constant; genuinely
    mixed strict signs certify a change; anything else is reported
    uncertified (and treated as changing by the classifier).
    """
    t = 2 * np.pi * np.arange(grid) / grid
    vals = np.zeros(grid)
    deriv_bound = 0.0
    for k, v in poly_1d.items():
        vals += (v * np.exp(1j * k * t)).real
        deriv_bound += abs(k) * abs(v)
    step = 2 * np.pi / grid
    margin = step * deriv_bound
    if (vals > 0).any() and (vals < 0).any():
        return SignVerdict(True, True, float(np.abs(vals).min()))
    if (vals >= margin).all() or (vals <= -margin).all() or deriv_bound == 0:
        return SignVerdict(False, True, float(np.abs(vals).min()))
    return SignVerdict(True, False, float(np.abs(vals).min()))


@dataclass
class ClassifierEntry:
    j: int
    condition: Optional[str]        # "log-symbol" | "re-log" | "im-log" | None
    alpha_growth: str
    beta_growth: str
    a_sign_fixed: bool
    b_sign_fixed: bool

    def to_json(self) -> dict:
        return {"j": self.j, "condition": self.condition,
                "alpha_growth": self.alpha_growth, "beta_growth": self.beta_growth,
                "a_sign_fixed": self.a_sign_fixed, "b_sign_fixed": self.b_sign_fixed}


@dataclass
class ClassifierReport:
    entries: List[ClassifierEntry]
    members: List[int]
    reduction_applies: bool

    def to_json(self) -> dict:
        return {"per_j": [e.to_json() for e in self.entries],
                "L_set": self.members,
                "reduction_applies": self.reduction_applies,
                "scope": "empirical (finite box)"}


def classify_decoupled(profile: CoefficientProfile, spec: SystemSpec,
                       box: FrequencyBox, margin: float = 0.25) -> ClassifierReport:
    """Membership of each operator index in the reduction class.

    Per index: (log-symbol) the whole symbol grows at most
    logarithmically; (re-log) Re p log, Im p super-log, and Re c_j keeps
    one sign; (im-log) the mirrored condition on Im p and Im c_j.
    """
    if not profile.is_decoupled:
        raise DomainError("classifier needs a decoupled profile")
    entries = []
    members = []
    for j in range(1, spec.n + 1):
        sym = spec.symbols[j - 1]
        whole = classify_growth(sym, box, margin=margin)
        alpha = classify_growth(sym.real_part(), box, margin=margin)
        beta = classify_growth(sym.imag_part(), box, margin=margin)
        axis = profile.axis_poly(j)
        keys = set(axis) | {-k for k in axis}
        a_poly = {k: (axis.get(k, 0j) + axis.get(-k, 0j).conjugate()) / 2
                  for k in keys}
        b_poly = {k: complex((axis.get(k, 0j) - axis.get(-k, 0j).conjugate()) / 2j)
                  for k in keys}
        a_sign = sign_change(a_poly)
        b_sign = sign_change(b_poly)
        condition = None
        if whole.tag == "log":
            condition = "log-symbol"
        elif (alpha.tag == "log" and beta.tag == "superlog"
              and not a_sign.changes_sign):
            condition = "re-log"
        elif (alpha.tag == "superlog" and beta.tag == "log"
              and not b_sign.changes_sign):
            condition = "im-log"
        entries.append(ClassifierEntry(j, condition, alpha.tag, beta.tag,
                                       not a_sign.changes_sign,
                                       not b_sign.changes_sign))
        if condition is not None:
            members.append(j)
    return ClassifierReport(entries, members,
                            members == list(range(1, spec.n + 1)))
