"""Piecewise closed-form eigenfunctions.

Two representations per side of the origin:

* ``HypergeometricForm``: psi = exp(-x^2/2) [c_even M(c, 1/2, x^2) + c_odd x M(c + 1/2, 3/2, x^2)]
  with c = -(E + a_side)/4. The same (c_even, c_odd) = (psi(0), psi'(0)) serve
  both sides, so matching at the origin holds by construction. Away from the
  origin the side is evaluated as tail_scale * exp(-x^2/2) U(c, 1/2, x^2),
  the decaying solution the coefficients were chosen to select. The 1F1 pair
  is used only at the origin itself: at x != 0 its two growing terms cancel
  and lose digits in proportion to exp(x^2), which the U branch avoids.
* ``HermiteForm``: psi = scale * exp(-x^2/2) H_degree(x), exact for a = 4l, E >= 0.

Derivatives of any order come from psi and psi' through the Schroedinger
equation psi'' = (V - E) psi, differentiated with Leibniz' rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from . import spectrum as spec_mod
from .errors import (
    DegenerateNullVector,
    IndexBelowLadder,
    NotAnEigenvalue,
    QuadratureFailure,
)
from .model import AUTO, LEFT, RIGHT, BoundaryReport, PotentialSpec, resolve_side, side_offset
from .specfun import (
    SQRT_PI,
    DecayingBranch,
    hermite,
    hermite_derivative,
    kummer_1f1,
    kummer_1f1_x_derivative,
    recip_gamma,
)

MAX_DERIVATIVE_ORDER = 16


@lru_cache(maxsize=512)
def _branch(c: float) -> DecayingBranch:
    return DecayingBranch(c)


@dataclass(frozen=True)
class HypergeometricForm:
    c_even: float
    c_odd: float
    param: float
    tail_scale: float

    def stripped(self, x: np.ndarray, left: bool):
        """phi = exp(x**2/2) psi and phi' at points x that all lie on this form's side."""
        phi = np.empty_like(x)
        dphi = np.empty_like(x)
        near = x == 0.0
        if np.any(near):
            xs = x[near]
            z = xs * xs
            s = np.zeros_like(xs)
            ds = np.zeros_like(xs)
            if self.c_even != 0.0:
                s += self.c_even * kummer_1f1(self.param, 0.5, z)
                ds += self.c_even * kummer_1f1_x_derivative(self.param, 0.5, xs)
            if self.c_odd != 0.0:
                mo = kummer_1f1(self.param + 0.5, 1.5, z)
                s += self.c_odd * xs * mo
                ds += self.c_odd * (mo + xs * kummer_1f1_x_derivative(self.param + 0.5, 1.5, xs))
            phi[near] = s
            dphi[near] = ds
        far = ~near
        if np.any(far):
            w, dw = _branch(self.param)(np.abs(x[far]))
            sign = -1.0 if left else 1.0
            phi[far] = self.tail_scale * w
            dphi[far] = self.tail_scale * sign * dw
        return phi, dphi

    def value_and_slope(self, x: np.ndarray, left: bool):
        """psi and psi' at points x that all lie on this form's side."""
        phi, dphi = self.stripped(x, left)
        g = np.exp(-0.5 * x * x)
        return g * phi, g * (dphi - x * phi)


@dataclass(frozen=True)
class HermiteForm:
    degree: int
    scale: Fraction

    def stripped(self, x: np.ndarray, left: bool):
        c = float(self.scale)
        return c * hermite(self.degree, x), c * hermite_derivative(self.degree, x)

    def value_and_slope(self, x: np.ndarray, left: bool):
        phi, dphi = self.stripped(x, left)
        g = np.exp(-0.5 * x * x)
        return g * phi, g * (dphi - x * phi)


Form = Union[HypergeometricForm, HermiteForm]


@dataclass(frozen=True)
class NormalizationConstant:
    ell: int
    n: int
    value: Fraction


@dataclass(frozen=True, eq=False)
class PiecewiseState:
    spec: PotentialSpec
    E: float
    left_form: Form
    right_form: Form
    n: Optional[int] = None
    norm: Optional[float] = field(default=None, compare=False)

    def _forms_eval(self, x, side):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xa = np.atleast_1d(x)
        left = resolve_side(xa, side)
        psi = np.empty_like(xa)
        dpsi = np.empty_like(xa)
        if np.any(left):
            psi[left], dpsi[left] = self.left_form.value_and_slope(xa[left], True)
        if np.any(~left):
            psi[~left], dpsi[~left] = self.right_form.value_and_slope(xa[~left], False)
        return xa, left, psi, dpsi, scalar

    def derivatives(self, x, k_max: int, side: str = AUTO) -> np.ndarray:
        """Array of shape (k_max + 1, len(x)) holding psi^(0..k_max)."""
        xa, left, psi, dpsi, _ = self._forms_eval(x, side)
        out = np.empty((k_max + 1, xa.size))
        out[0] = psi
        if k_max >= 1:
            out[1] = dpsi
        q = xa * xa + np.where(left, side_offset(self.spec, LEFT), side_offset(self.spec, RIGHT)) - self.E
        for k in range(k_max - 1):
            # (V psi)^(k) with V' = 2x, V'' = 2, V''' = 0
            nxt = q * out[k]
            if k >= 1:
                nxt += 2.0 * k * xa * out[k - 1]
            if k >= 2:
                nxt += k * (k - 1) * out[k - 2]
            out[k + 2] = nxt
        return out

    def stripped_derivatives(self, x, k_max: int, side: str = AUTO) -> np.ndarray:
        """Derivatives 0..k_max of phi = exp(x**2/2) psi, shape (k_max + 1, len(x)).

        phi solves phi'' = 2x phi' - (a_side + E) phi, so
        phi^(k+2) = 2x phi^(k+1) + (2k - a_side - E) phi^(k); a_side is a on the
        left and 0 on the right. Free of the Gaussian, these are the
        well-conditioned entries for Wronskians.
        """
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        left = resolve_side(xa, side)
        phi = np.empty_like(xa)
        dphi = np.empty_like(xa)
        if np.any(left):
            phi[left], dphi[left] = self.left_form.stripped(xa[left], True)
        if np.any(~left):
            phi[~left], dphi[~left] = self.right_form.stripped(xa[~left], False)
        out = np.empty((k_max + 1, xa.size))
        out[0] = phi
        if k_max >= 1:
            out[1] = dphi
        shift = np.where(left, self.spec.a, 0.0) + self.E
        for k in range(k_max - 1):
            out[k + 2] = 2.0 * xa * out[k + 1] + (2.0 * k - shift) * out[k]
        return out

    def __call__(self, x, side: str = AUTO):
        return evaluate(self, x, side)


# ----------------------------------------------------------- construction


def _null_vector(r1, r2, r3, r4):
    """(psi(0), psi'(0)) killing the growing parts on both sides.

    Right decay: alpha r3 + beta r4/2 = 0; left decay: alpha r1 - beta r2/2 = 0.
    The better-conditioned (longer) row defines the direction.
    """
    right = math.hypot(r3, 0.5 * r4)
    left = math.hypot(r1, 0.5 * r2)
    if max(right, left) < 1e-300:
        raise DegenerateNullVector("both decay conditions vanish")
    if right >= left:
        alpha, beta = 0.5 * r4, -r3
    else:
        alpha, beta = 0.5 * r2, r1
    big = alpha if abs(alpha) >= abs(beta) else beta
    return alpha / big, beta / big


def general_state(spec: PotentialSpec, E: float, tol: float = 1e-8, n: Optional[int] = None) -> PiecewiseState:
    """1F1 eigenfunction at eigenvalue E; normalized so max(|psi(0)|, |psi'(0)|) = 1 > 0."""
    E = float(E)
    resid = abs(spec_mod.normalized_determinant(spec, E))
    if not resid <= tol:
        raise NotAnEigenvalue(f"E={E} is not an eigenvalue of a={spec.a} (|D|/scale = {resid:.3e})")
    a = spec.a
    r1 = recip_gamma(-(E + a) / 4.0)
    r2 = recip_gamma(-(E + a - 2.0) / 4.0)
    r3 = recip_gamma(-E / 4.0)
    r4 = recip_gamma(-(E - 2.0) / 4.0)
    alpha, beta = _null_vector(r1, r2, r3, r4)
    # psi(0) = A w(0), psi'(0) = -/+ A w'(0) with w(0) = sqrt(pi) r(c + 1/2), w'(0) = -2 sqrt(pi) r(c)
    wl0, wl1 = SQRT_PI * r2, 2.0 * SQRT_PI * r1
    wr0, wr1 = SQRT_PI * r4, -2.0 * SQRT_PI * r3
    a_left = (alpha * wl0 + beta * wl1) / (wl0 * wl0 + wl1 * wl1)
    a_right = (alpha * wr0 + beta * wr1) / (wr0 * wr0 + wr1 * wr1)
    left = HypergeometricForm(alpha, beta, -(E + a) / 4.0, a_left)
    right = HypergeometricForm(alpha, beta, -E / 4.0, a_right)
    return PiecewiseState(spec, E, left, right, n=n)


def _hermite_at_zero(n: int) -> int:
    if n % 2:
        return 0
    m = n // 2
    return (-1) ** m * math.factorial(n) // math.factorial(m)


def normalization_constant(ell: int, n: int) -> NormalizationConstant:
    """Left-side factor making the H_{n+l} / H_{n-l} pair continuous at 0."""
    if n < ell:
        raise IndexBelowLadder(f"n={n} < l={ell}")
    f = math.factorial
    d = n - ell
    if d % 2 == 0:
        value = Fraction(f(d) * f((n + ell) // 2), f(n + ell) * f(d // 2))
    else:
        value = Fraction(f(d) * f((n + ell - 1) // 2), f(n + ell) * f((d - 1) // 2))
    if ell % 2:
        value = -value
    return NormalizationConstant(ell, n, value)


def continuity_ratio(ell: int, n: int) -> Fraction:
    """The same constant forced by continuity: H_{n-l}(0)/H_{n+l}(0) or the derivative ratio."""
    lo, hi = n - ell, n + ell
    if lo % 2 == 0:
        return Fraction(_hermite_at_zero(lo), _hermite_at_zero(hi))
    # H_k'(0) = 2k H_{k-1}(0)
    return Fraction(2 * lo * _hermite_at_zero(lo - 1), 2 * hi * _hermite_at_zero(hi - 1))


def hermite_state(ell: int, n: int) -> PiecewiseState:
    if n < ell:
        raise IndexBelowLadder(f"level {n} lies below the Hermite ladder (l={ell})")
    spec = PotentialSpec.from_ell(ell)
    nc = normalization_constant(ell, n).value
    return PiecewiseState(
        spec, 2.0 * (n - ell), HermiteForm(n + ell, nc), HermiteForm(n - ell, Fraction(1)), n=n
    )


@lru_cache(maxsize=512)
def eigenstate(spec: PotentialSpec, n: int) -> PiecewiseState:
    """The n-th eigenstate of ``spec`` in its natural closed form."""
    ell = spec.hermite_case
    if ell is not None and n >= ell:
        return hermite_state(ell, n)
    lev = spec_mod.level(spec, n)
    return general_state(spec, lev.E, n=n)


# -------------------------------------------------------------- evaluation


def evaluate(state: PiecewiseState, x, side: str = AUTO):
    _, _, psi, _, scalar = state._forms_eval(x, side)
    return float(psi[0]) if scalar else psi


def evaluate_derivative(state: PiecewiseState, x, k: int, side: str = AUTO):
    if not 0 <= k <= MAX_DERIVATIVE_ORDER:
        raise ValueError(f"derivative order must lie in [0, {MAX_DERIVATIVE_ORDER}]")
    x_arr = np.asarray(x, dtype=float)
    out = state.derivatives(x_arr, k, side)[k]
    return float(out[0]) if x_arr.ndim == 0 else out


def tail_probe_point(state: PiecewiseState) -> float:
    """|x| where the tail is probed: 7, or 4 beyond the outer classical turning point."""
    turn = math.sqrt(max(state.E + 1.0 + state.spec.a, 0.0))
    return max(7.0, turn + 4.0)


def boundary_report(state: PiecewiseState, tail_x: Optional[float] = None, n_probe: int = 2001) -> BoundaryReport:
    if tail_x is None:
        tail_x = tail_probe_point(state)
    d_left = state.derivatives(0.0, 1, LEFT)[:, 0]
    d_right = state.derivatives(0.0, 1, RIGHT)[:, 0]
    xs = np.linspace(-tail_x, tail_x, n_probe)
    xs = xs[xs != 0]
    peak = float(np.max(np.abs(evaluate(state, xs))))
    tails = np.abs(evaluate(state, np.array([-tail_x, tail_x])))
    return BoundaryReport(
        value_jump=float(abs(d_right[0] - d_left[0])),
        slope_jump=float(abs(d_right[1] - d_left[1])),
        tail_decay_ok=bool(np.all(tails < 1e-6 * peak)),
    )


def count_nodes(state: PiecewiseState, half_width: float = 8.0, samples: int = 4000) -> int:
    """Strict sign changes of psi on a uniform grid over [-L, L]."""
    if half_width < 6:
        raise ValueError("half_width must be at least 6")
    if samples < 2000:
        raise ValueError("samples must be at least 2000")
    xs = np.linspace(-half_width, half_width, samples)
    psi = np.empty_like(xs)
    nz = xs != 0
    psi[nz] = evaluate(state, xs[nz])
    if not np.all(nz):
        # a grid point exactly at the origin is read from the right
        psi[~nz] = evaluate(state, 0.0, RIGHT)
    peak = np.max(np.abs(psi))
    keep = np.abs(psi) >= 1e-13 * peak
    signs = np.sign(psi[keep])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def _adaptive_simpson(f, a, b, tol, max_depth=30):
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0, abs(delta) / 15.0
        if depth >= max_depth:
            raise QuadratureFailure(f"adaptive Simpson exceeded depth {max_depth} on [{a}, {b}]")
        l_val, l_err = recurse(a, m, fa, flm, fm, left, tol / 2.0, depth + 1)
        r_val, r_err = recurse(m, b, fm, frm, fb, right, tol / 2.0, depth + 1)
        return l_val + r_val, l_err + r_err

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)


def norm_l2(state: PiecewiseState, half_width: float = 8.0, quad_tol: float = 1e-10):
    """Return (||psi||_2, error bound) by adaptive Simpson on [-L, 0] and [0, L].

    The mass beyond +-L is bounded with the Gaussian tail estimate
    int_L^inf psi^2 <~ psi(L)^2 / (2L - 1) and added to the error bound.
    """
    if half_width < 7:
        raise ValueError("half_width must be at least 7")
    L = float(half_width)
    sq_left = lambda x: float(evaluate(state, x, LEFT)) ** 2  # noqa: E731
    sq_right = lambda x: float(evaluate(state, x, RIGHT)) ** 2  # noqa: E731
    # unit panels plus an edge where evaluation switches from series to tail branch
    edges = np.linspace(0.0, L, int(math.ceil(L)) + 1)
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        for f, a, b in ((sq_right, lo, hi), (sq_left, -hi, -lo)):
            val, e = _adaptive_simpson(f, a, b, quad_tol / (4 * len(edges)))
            total += val
            err += e
    tail = (sq_left(-L) + sq_right(L)) / (2.0 * L - 1.0)
    err += tail
    norm = math.sqrt(total)
    return norm, err / (2.0 * norm)


def sample_rows(state: PiecewiseState, xs, with_derivative: bool = False):
    """Rows (x, psi[, dpsi]) on ``xs`` minus the origin, plus 0- and 0+ sentinels."""
    xs = np.asarray(xs, dtype=float)
    xs = xs[xs != 0]
    neg = xs[xs < 0]
    pos = xs[xs > 0]
    k = 2 if with_derivative else 1
    blocks = [
        (neg, state.derivatives(neg, 1, LEFT)),
        (np.array([-0.0]), state.derivatives(0.0, 1, LEFT)),
        (np.array([0.0]), state.derivatives(0.0, 1, RIGHT)),
        (pos, state.derivatives(pos, 1, RIGHT)),
    ]
    rows = []
    for x, d in blocks:
        for i in range(x.size):
            rows.append((float(x[i]), *(float(v) for v in d[:k, i])))
    return rows
