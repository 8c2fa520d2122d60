"""Eigenvalues of the stepped oscillator.

General a: zeros of the entire matching function

    D(E) = r(-(E+a)/4) r(-(E-2)/4) + r(-(E+a-2)/4) r(-E/4),   r = 1/Gamma,

which is the determinant of the two decay conditions at x -> -inf and
x -> +inf once the common factor Gamma(1/2)Gamma(3/2) is dropped. Being
pole-free it also covers a = 4l, where the gamma-ratio form breaks down.

a = 4l: the l negative levels are the roots of the integer polynomial
prod(E + 4k) + prod(E + 4k - 2), isolated with exact Sturm sequences; all
other levels sit on the ladder E = 2(n - l).
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import EmptyWindow, NonRealResult, RootCountMismatch, StepTooCoarse
from .model import PotentialSpec
from .specfun import recip_gamma

MATCHING_ROOT = "matching-root"
POLYNOMIAL_ROOT = "polynomial-root"
HERMITE_LADDER = "hermite-ladder"
GRID_ORACLE = "grid-oracle"

MAX_ELL = 32


@dataclass(frozen=True)
class Eigenvalue:
    n: int
    E: float
    provenance: str
    residual: float = 0.0
    tangential: bool = False


@dataclass(frozen=True)
class AlgebraicEquation:
    """Integer polynomial whose roots are the negative levels for a = 4l.

    ``coefficients[i]`` multiplies E**i.
    """

    ell: int
    coefficients: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, E):
        if isinstance(E, (int, Fraction)):
            return _poly_eval(self.coefficients, Fraction(E))
        return float(np.polyval(self.coefficients[::-1], E))


# ---------------------------------------------------------------- matching


def _gamma_factors(spec: PotentialSpec, E: float):
    a = spec.a
    r1 = recip_gamma(-(E + a) / 4.0)
    r2 = recip_gamma(-(E + a - 2.0) / 4.0)
    r3 = recip_gamma(-E / 4.0)
    r4 = recip_gamma(-(E - 2.0) / 4.0)
    return r1, r2, r3, r4


def matching_determinant(spec: PotentialSpec, E: float) -> float:
    r1, r2, r3, r4 = _gamma_factors(spec, float(E))
    return r1 * r4 + r2 * r3


def determinant_scale(spec: PotentialSpec, E: float) -> float:
    """Natural size of D(E): 2 |left row| |right row| of the decay conditions.

    D / scale is the sine of the angle between the two rows, so it lies in
    [-1, 1] and never suffers from the gamma factors' wide dynamic range.
    """
    r1, r2, r3, r4 = _gamma_factors(spec, float(E))
    return 2.0 * math.hypot(r1, 0.5 * r2) * math.hypot(r3, 0.5 * r4)


def normalized_determinant(spec: PotentialSpec, E: float) -> float:
    r1, r2, r3, r4 = _gamma_factors(spec, float(E))
    scale = 2.0 * math.hypot(r1, 0.5 * r2) * math.hypot(r3, 0.5 * r4)
    return (r1 * r4 + r2 * r3) / scale


# ---------------------------------------------------------------- scanning


def _bisect(f: Callable[[float], float], lo: float, hi: float, flo: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scan_roots(
    f: Callable[[float], float],
    e_min: float,
    e_max: float,
    scan_step: float,
    tol: float,
    tangential_tol: float = 1e-9,
) -> List[Tuple[float, bool]]:
    """Roots of a smooth f on [e_min, e_max] as (E, tangential) pairs.

    Sign changes between scan samples are bisected to width ``tol``. Local
    minima of |f| without a sign change are polished; if |f| drops below
    ``tangential_tol`` there the point is reported as a tangential root, and
    if f actually changes sign there the two hidden roots are bisected and
    StepTooCoarse is warned.
    """
    if not e_min < e_max:
        raise ValueError("need e_min < e_max")
    if scan_step <= 0:
        raise ValueError("scan_step must be positive")
    n_cells = max(1, int(math.ceil((e_max - e_min) / scan_step)))
    grid = np.linspace(e_min, e_max, n_cells + 1)
    vals = np.array([f(e) for e in grid])
    roots: List[Tuple[float, bool]] = []
    bracketed = np.zeros(len(grid), dtype=bool)
    for i in range(n_cells):
        if vals[i] == 0.0:
            roots.append((float(grid[i]), False))
            bracketed[i] = True
        elif vals[i] * vals[i + 1] < 0:
            roots.append((_bisect(f, grid[i], grid[i + 1], vals[i], tol), False))
            bracketed[i] = bracketed[i + 1] = True
    if vals[-1] == 0.0:
        roots.append((float(grid[-1]), False))
        bracketed[-1] = True

    absv = np.abs(vals)
    for i in range(1, n_cells):
        if bracketed[i - 1] or bracketed[i] or bracketed[i + 1]:
            continue
        if not (absv[i] <= absv[i - 1] and absv[i] <= absv[i + 1]):
            continue
        if absv[i] > 0.1:
            continue
        lo, hi = grid[i - 1], grid[i + 1]
        res = minimize_scalar(lambda e: abs(f(e)), bounds=(lo, hi), method="bounded",
                              options={"xatol": tol})
        e_star = float(res.x)
        f_star = f(e_star)
        if f_star == 0.0 or (f_star < 0) != (vals[i] < 0):
            warnings.warn(
                f"two roots share the scan cell around E={e_star:.6g}; "
                "reduce scan_step", StepTooCoarse, stacklevel=2)
            if f_star == 0.0:
                roots.append((e_star, True))
                continue
            roots.append((_bisect(f, lo, e_star, vals[i - 1], tol), False))
            roots.append((_bisect(f, e_star, hi, f_star, tol), False))
        elif abs(f_star) <= tangential_tol:
            roots.append((e_star, True))

    roots.sort()
    deduped: List[Tuple[float, bool]] = []
    for e, tang in roots:
        if deduped and e - deduped[-1][0] < 10 * tol:
            continue
        deduped.append((float(e), bool(tang)))
    return deduped


def default_window(spec: PotentialSpec, n_max: int) -> Tuple[float, float]:
    # E_0 > min V = -1 - a, and the step only lowers levels so E_n <= 2n
    return (-1.0 - spec.a - 1.0, 2.0 * n_max + 2.0)


def find_spectrum_general(
    spec: PotentialSpec,
    e_min: Optional[float] = None,
    e_max: Optional[float] = None,
    scan_step: float = 0.05,
    tol: float = 1e-10,
    n_max: int = 6,
) -> List[Eigenvalue]:
    lo, hi = default_window(spec, n_max)
    e_min = lo if e_min is None else e_min
    e_max = hi if e_max is None else e_max
    f = lambda e: normalized_determinant(spec, e)  # noqa: E731
    roots = scan_roots(f, e_min, e_max, scan_step, tol)
    if not roots:
        raise EmptyWindow(f"no eigenvalue of a={spec.a} in [{e_min}, {e_max}]")
    return [
        Eigenvalue(n, e, MATCHING_ROOT, abs(f(e)), tangential=tang)
        for n, (e, tang) in enumerate(roots)
    ]


# ------------------------------------------------------ exact polynomials


def _poly_mul(p: Sequence, q: Sequence) -> List:
    out = [0] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        for j, qj in enumerate(q):
            out[i + j] += pi * qj
    return out


def _poly_eval(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _poly_trim(p: List) -> List:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _poly_derivative(p: Sequence) -> List:
    return _poly_trim([i * p[i] for i in range(1, len(p))] or [0])


def _poly_rem(p: Sequence, q: Sequence) -> List[Fraction]:
    r = [Fraction(c) for c in p]
    q = [Fraction(c) for c in q]
    dq = len(q) - 1
    while len(r) - 1 >= dq and any(r):
        coef = r[-1] / q[-1]
        shift = len(r) - 1 - dq
        for i in range(dq + 1):
            r[shift + i] -= coef * q[i]
        r.pop()
        _poly_trim(r)
        if len(r) - 1 < dq:
            break
    return _poly_trim(r)


def sturm_sequence(p: Sequence) -> List[List[Fraction]]:
    seq = [[Fraction(c) for c in p], [Fraction(c) for c in _poly_derivative(p)]]
    while len(seq[-1]) > 1:
        rem = _poly_rem(seq[-2], seq[-1])
        if len(rem) == 1 and rem[0] == 0:
            break
        seq.append([-c for c in rem])
    return seq


def _sign_changes(seq, x: Fraction) -> int:
    signs = []
    for p in seq:
        v = _poly_eval(p, x)
        if v != 0:
            signs.append(v > 0)
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def count_real_roots(seq, lo: Fraction, hi: Fraction) -> int:
    """Number of distinct real roots in (lo, hi]."""
    return _sign_changes(seq, lo) - _sign_changes(seq, hi)


def isolate_real_roots(p: Sequence[int], lo, hi) -> List[Tuple[Fraction, Fraction]]:
    """Disjoint intervals (lo, hi] each holding exactly one root of p."""
    seq = sturm_sequence(p)
    lo, hi = Fraction(lo), Fraction(hi)
    out = []
    stack = [(lo, hi, count_real_roots(seq, lo, hi))]
    while stack:
        a, b, k = stack.pop()
        if k == 0:
            continue
        if k == 1:
            out.append((a, b))
            continue
        m = (a + b) / 2
        stack.append((m, b, count_real_roots(seq, m, b)))
        stack.append((a, m, count_real_roots(seq, a, m)))
    out.sort()
    return out


def refine_root(p: Sequence[int], lo: Fraction, hi: Fraction, tol: float) -> float:
    """Shrink an isolating interval of a simple root by exact bisection."""
    f_hi = _poly_eval(p, hi)
    if f_hi == 0:
        return float(hi)
    tol = Fraction(tol)
    while hi - lo > tol:
        m = (lo + hi) / 2
        fm = _poly_eval(p, m)
        if fm == 0:
            return float(m)
        if (fm > 0) == (f_hi > 0):
            hi, f_hi = m, fm
        else:
            lo = m
    mid = (lo + hi) / 2
    nearest = Fraction(round(mid))
    if lo < nearest <= hi and _poly_eval(p, nearest) == 0:
        return float(nearest)
    return float(mid)


def build_algebraic_equation(ell: int) -> AlgebraicEquation:
    """Expand prod_{k=1}^l (E + 4k) + prod_{k=1}^l (E + 4k - 2) exactly."""
    if not 1 <= ell <= MAX_ELL:
        raise ValueError(f"ell must lie in [1, {MAX_ELL}], got {ell}")
    p = [1]
    q = [1]
    for k in range(1, ell + 1):
        p = _poly_mul(p, [4 * k, 1])
        q = _poly_mul(q, [4 * k - 2, 1])
    return AlgebraicEquation(ell, tuple(int(x + y) for x, y in zip(p, q)))


def _poly_residual(eq: AlgebraicEquation, E: float) -> float:
    x = Fraction(E)
    val = _poly_eval(eq.coefficients, x)
    size = _poly_eval([abs(c) for c in eq.coefficients], abs(x))
    return float(abs(val) / size) if size else 0.0


@lru_cache(maxsize=None)
def _negative_roots(ell: int, tol: float) -> Tuple[float, ...]:
    eq = build_algebraic_equation(ell)
    # every bound state lies above the potential minimum -1 - 4l
    intervals = isolate_real_roots(eq.coefficients, -1 - 4 * ell, 0)
    if len(intervals) != ell:
        raise RootCountMismatch(f"isolated {len(intervals)} real roots for l={ell}, expected {ell}")
    return tuple(refine_root(eq.coefficients, a, b, tol) for a, b in intervals)


def negative_spectrum_hermite_case(ell: int, tol: float = 1e-13) -> List[Eigenvalue]:
    eq = build_algebraic_equation(ell)
    roots = _negative_roots(ell, tol)
    if any(r >= 0 or r <= -1 - 4 * ell for r in roots):
        raise RootCountMismatch("polynomial root outside (-1-4l, 0)")
    return [Eigenvalue(n, e, POLYNOMIAL_ROOT, _poly_residual(eq, e)) for n, e in enumerate(roots)]


def full_spectrum_hermite_case(ell: int, n_max: int, tol: float = 1e-13) -> List[Eigenvalue]:
    if n_max < ell:
        raise ValueError("n_max must be at least l")
    levels = negative_spectrum_hermite_case(ell, tol)
    levels += [Eigenvalue(n, 2.0 * (n - ell), HERMITE_LADDER, 0.0) for n in range(ell, n_max + 1)]
    for lower, upper in zip(levels, levels[1:]):
        if not lower.E < upper.E:
            raise RootCountMismatch("levels are not strictly increasing")
    return levels


def check_root_symmetry(roots: Sequence[float], ell: int) -> float:
    """Largest deviation of mirrored root pairs from the centre -1 - 2l."""
    centre = -1.0 - 2.0 * ell
    m = len(roots)
    return max(abs(roots[j] + roots[m - 1 - j] - 2.0 * centre) for j in range(m))


def appendix_closed_forms(ell: int = 6, imag_tol: float = 1e-10) -> List[float]:
    """The six radical expressions for the l = 6 negative levels."""
    if ell != 6:
        raise ValueError("closed forms are only available for l = 6")
    w = complex(28315.0, 216.0 * math.sqrt(43798.0))
    cbrt = w ** (1.0 / 3.0)  # principal branch
    s3 = math.sqrt(3.0)
    inner = [
        2.0 * cbrt + 2834.0 / cbrt + 125.0,
        complex(-1.0, -s3) * cbrt + 1417.0 * complex(-1.0, s3) / cbrt + 125.0,
        complex(-1.0, s3) * cbrt - 1417.0 * complex(1.0, s3) / cbrt + 125.0,
    ]
    rad = [cmath.sqrt(v / 3.0) for v in inner]
    values = [-13 - rad[0], -13 - rad[1], -13 - rad[2], -13 + rad[2], -13 + rad[1], -13 + rad[0]]
    for v in values:
        if abs(v.imag) > imag_tol:
            raise NonRealResult(f"imaginary residue {v.imag:.3e} exceeds {imag_tol}")
    return [v.real for v in values]


# --------------------------------------------------------------- dispatch


@lru_cache(maxsize=256)
def levels(spec: PotentialSpec, n_max: int) -> Tuple[Eigenvalue, ...]:
    """Levels 0..n_max by the exact route available for ``spec``."""
    if spec.hermite_case is not None:
        ell = spec.hermite_case
        if n_max < ell:
            return tuple(negative_spectrum_hermite_case(ell)[: n_max + 1])
        return tuple(full_spectrum_hermite_case(ell, n_max))
    lo, hi = default_window(spec, n_max)
    found = find_spectrum_general(spec, lo, hi)
    if len(found) < n_max + 1:
        raise EmptyWindow(f"found {len(found)} levels below E={hi}, wanted {n_max + 1}")
    return tuple(found[: n_max + 1])


def level(spec: PotentialSpec, n: int) -> Eigenvalue:
    return levels(spec, max(n, 6))[n]
