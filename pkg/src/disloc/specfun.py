"""Special functions used by the closed-form solutions.

Everything here is real-valued and double precision:

* ``recip_gamma``: 1/Gamma(z), an entire function (Lanczos g=7, n=9 plus reflection).
* ``kummer_1f1``: Kummer's M(a, b, z) for z >= 0 by a compensated power series.
* ``hermite``: physicists' Hermite polynomials by upward recurrence.
* ``DecayingBranch``: the recessive solution U(c, 1/2, x**2) of the Hermite
  equation for x >= 0, which the power series cannot deliver at large x
  because of cancellation between exponentially large terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidB, NonConvergence

SQRT_PI = math.sqrt(math.pi)

_LANCZOS_G = 7
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

HERMITE_MAX_DEGREE = 64
KUMMER_MAX_Z = 400.0


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-14
    max_terms: int = 400

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_terms < 10:
            raise ValueError("max_terms must be at least 10")


DEFAULT_SERIES = SeriesControl()


def _sin_pi(z: float) -> float:
    # sin(pi z) with the argument reduced first, so integers give exactly 0
    n = round(z)
    f = z - n
    if f == 0.0:
        return 0.0
    s = math.sin(math.pi * f)
    return -s if n % 2 else s


def recip_gamma(z: float) -> float:
    """Return 1/Gamma(z). Zero (exactly) at z = 0, -1, -2, ..."""
    z = float(z)
    if z < 0.5:
        s = _sin_pi(z)
        if s == 0.0:
            return 0.0
        return s / (math.pi * recip_gamma(1.0 - z))
    zm = z - 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (zm + i)
    t = zm + _LANCZOS_G + 0.5
    return math.exp(t - (zm + 0.5) * math.log(t) - _LOG_SQRT_2PI) / acc


def _is_nonpositive_integer(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def kummer_1f1_with_error(a: float, b: float, z, ctl: SeriesControl = DEFAULT_SERIES):
    """Kummer M(a, b, z) and an error estimate; ``z`` may be an array.

    The error estimate is the size of the last retained term plus the
    rounding bound eps * sum |term_k|.
    """
    if _is_nonpositive_integer(b):
        raise InvalidB(f"b = {b} is a nonpositive integer")
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0):
        raise ValueError("kummer_1f1 is only implemented for z >= 0")
    if np.any(z_arr > KUMMER_MAX_Z):
        raise NonConvergence(f"z > {KUMMER_MAX_Z}: power series not attempted")

    total = np.ones_like(z_arr)
    comp = np.zeros_like(z_arr)
    abs_sum = np.ones_like(z_arr)
    term = np.ones_like(z_arr)
    quiet = np.zeros(z_arr.shape, dtype=int)
    terminating = _is_nonpositive_integer(a)
    last = np.zeros_like(z_arr)
    converged = False
    for k in range(ctl.max_terms):
        term = term * ((a + k) / ((b + k) * (k + 1.0))) * z_arr
        # Kahan step
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        abs_sum = abs_sum + np.abs(term)
        small = np.abs(term) <= ctl.rel_tol * np.abs(total)
        quiet = np.where(small, quiet + 1, 0)
        last = np.where(small, last, np.abs(term))
        if terminating and k + 1 > -a:
            converged = True
            break
        if np.all(quiet >= 3):
            converged = True
            break
    if not converged:
        raise NonConvergence(
            f"M({a}, {b}, z) did not converge in {ctl.max_terms} terms"
        )
    err = np.abs(term) + np.finfo(float).eps * abs_sum
    if terminating:
        err = np.finfo(float).eps * abs_sum
    if z_arr.ndim == 0:
        return float(total), float(err)
    return total, err


def kummer_1f1(a: float, b: float, z, ctl: SeriesControl = DEFAULT_SERIES):
    """Kummer's confluent hypergeometric function M(a, b, z), z >= 0."""
    return kummer_1f1_with_error(a, b, z, ctl)[0]


def kummer_1f1_x_derivative(a: float, b: float, x, ctl: SeriesControl = DEFAULT_SERIES):
    """d/dx M(a, b, x**2) = 2x (a/b) M(a+1, b+1, x**2)."""
    if _is_nonpositive_integer(b):
        raise InvalidB(f"b = {b} is a nonpositive integer")
    x_arr = np.asarray(x, dtype=float)
    if a == 0:
        out = np.zeros_like(x_arr)
    else:
        out = 2.0 * x_arr * (a / b) * kummer_1f1(a + 1.0, b + 1.0, x_arr * x_arr, ctl)
    return float(out) if np.ndim(out) == 0 else out


def hermite(n: int, x):
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if n > HERMITE_MAX_DEGREE:
        raise ValueError(f"degree capped at {HERMITE_MAX_DEGREE}")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        out = h_prev
    else:
        h = 2.0 * x
        for k in range(1, n):
            h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
        out = h
    return float(out) if out.ndim == 0 else out


def hermite_derivative(n: int, x):
    """H_n'(x) = 2n H_{n-1}(x)."""
    if n == 0:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        return float(out) if out.ndim == 0 else out
    return 2.0 * n * hermite(n - 1, x)


class DecayingBranch:
    """w(x) = U(c, 1/2, x**2) and w'(x) on x >= 0.

    w solves w'' = 2x w' + 4c w and behaves like x**(-2c) for large x. It is
    started from the asymptotic series of U at a far point and carried inward
    by Taylor steps of the ODE (stable, since w is the dominant solution in
    that direction). The Taylor expansions are kept as anchors, so evaluation
    anywhere is a short polynomial evaluation.

    At the origin w(0) = sqrt(pi)/Gamma(c + 1/2) and w'(0) = -2 sqrt(pi)/Gamma(c).
    """

    n_coef = 40

    def __init__(self, c: float):
        self.c = float(c)
        self.x_far = max(8.0, 2.0 * abs(self.c) + 10.0)
        anchors = []
        coefs = []
        x = self.x_far
        w, dw = self._asymptotic(np.array(x))
        w, dw = float(w), float(dw)
        while True:
            cj = self._taylor(x, w, dw)
            anchors.append(x)
            coefs.append(cj)
            if x == 0.0:
                break
            h = min(0.25, 1.0 / x)
            x_new = max(x - h, 0.0)
            t = x_new - x
            w = np.polyval(cj[::-1], t)
            dw = np.polyval((cj[1:] * np.arange(1, self.n_coef))[::-1], t)
            x = x_new
        self._anchors = np.array(anchors[::-1])
        self._coefs = np.array(coefs[::-1])

    def _taylor(self, xk: float, w: float, dw: float) -> np.ndarray:
        cj = np.zeros(self.n_coef)
        cj[0] = w
        cj[1] = dw
        for j in range(self.n_coef - 2):
            cj[j + 2] = (2.0 * xk * (j + 1) * cj[j + 1] + (2.0 * j + 4.0 * self.c) * cj[j]) / (
                (j + 2.0) * (j + 1.0)
            )
        return cj

    def _asymptotic(self, x: np.ndarray):
        c = self.c
        inv_z = 1.0 / (x * x)
        term = np.ones_like(x)
        total = np.ones_like(x)
        dtotal = np.zeros_like(x)  # sum of k * term_k
        prev = np.inf
        for k in range(200):
            term = term * (-(c + k) * (c + k + 0.5) / (k + 1.0)) * inv_z
            mag = float(np.max(np.abs(term)))
            if mag > prev:
                break
            total = total + term
            dtotal = dtotal + (k + 1) * term
            prev = mag
            if mag <= 1e-18 * float(np.min(np.abs(total))) or mag == 0.0:
                break
        power = x ** (-2.0 * c)
        w = power * total
        # d/dx [x^(-2c-2k)] = (-2c-2k) x^(-2c-2k-1)
        dw = power * (-2.0 * c * total - 2.0 * dtotal) / x
        return w, dw

    def __call__(self, x):
        """Return (w, dw/dx) for x >= 0 (arrays accepted)."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if np.any(x < 0):
            raise ValueError("DecayingBranch is defined for x >= 0")
        w = np.empty_like(x)
        dw = np.empty_like(x)
        far = x > self.x_far
        if np.any(far):
            w[far], dw[far] = self._asymptotic(x[far])
        near = ~far
        if np.any(near):
            xs = x[near]
            idx = np.searchsorted(self._anchors, xs)
            idx = np.clip(idx, 1, len(self._anchors) - 1)
            left = self._anchors[idx - 1]
            right = self._anchors[idx]
            idx = np.where(xs - left < right - xs, idx - 1, idx)
            t = xs - self._anchors[idx]
            cf = self._coefs[idx]
            p = np.zeros_like(xs)
            dp = np.zeros_like(xs)
            for j in range(self.n_coef - 1, -1, -1):
                dp = dp * t + p
                p = p * t + cf[:, j]
            w[near] = p
            dw[near] = dp
        if scalar:
            return float(w[0]), float(dw[0])
        return w, dw
