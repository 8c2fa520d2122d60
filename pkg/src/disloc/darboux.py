"""Wronskian-based isospectral deformations of the stepped oscillator.

Deleting eigenstates psi_d (d in a deletion set) gives

    V_D(x) = V(x) - 2 d^2/dx^2 ln W[psi_d1, psi_d2, ...](x),
    psi_D,n(x) = W[psi_d1, ..., psi_n](x) / W[psi_d1, ...](x),   E_n kept.

Consecutive lowest deletions {0..M-1} are Crum's chain, M = l removes all
negative levels of V(x; 4l) and leaves exactly {0, 2, 4, ...}, and unions of
adjacent pairs {d, d+1} are Krein-Adler deletions.

All derivatives entering the Wronskians come from the closed forms (see
``PiecewiseState.derivatives``); nothing is differentiated numerically. At
x = 0 every quantity is one-sided because psi'' jumps with V.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InvalidDeletionSet, WronskianZero
from .model import AUTO, LEFT, RIGHT, PotentialSpec, potential_value
from .states import PiecewiseState, eigenstate, evaluate

MAX_WRONSKIAN_ORDER = 12
MAX_CRUM_M = 8
MAX_STRICT_ELL = 6


@dataclass(frozen=True)
class DeformationSpec:
    ell: int
    kind: str  # "crum" or "krein_adler"
    M: Optional[int] = None
    D: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError("ell must be positive")
        if self.kind == "crum":
            if self.M is None or self.M < 1:
                raise ValueError("Crum deformation needs M >= 1")
        elif self.kind == "krein_adler":
            validate_deletion_set(self.D)
        else:
            raise ValueError(f"unknown deformation kind {self.kind!r}")

    @property
    def deleted(self) -> Tuple[int, ...]:
        if self.kind == "crum":
            return tuple(range(self.M))
        return tuple(sorted(self.D))

    def to_json(self) -> dict:
        if self.kind == "crum":
            return {"ell": self.ell, "crum": self.M}
        return {"ell": self.ell, "delete": list(self.deleted)}

    @classmethod
    def from_json(cls, obj: dict) -> "DeformationSpec":
        keys = set(obj)
        if keys == {"ell", "crum"}:
            return cls(int(obj["ell"]), "crum", M=int(obj["crum"]))
        if keys == {"ell", "delete"}:
            return cls(int(obj["ell"]), "krein_adler", D=tuple(int(d) for d in obj["delete"]))
        raise ValueError('expected {"ell", "crum"} or {"ell", "delete"}')


def validate_deletion_set(D: Sequence[int]) -> Tuple[int, ...]:
    """Check that D = {d1, d1+1 < d2, d2+1 < ...}; returns it sorted."""
    items = sorted(int(d) for d in D)
    if not items:
        raise InvalidDeletionSet("deletion set is empty")
    dup = [a for a, b in zip(items, items[1:]) if a == b]
    if dup:
        raise InvalidDeletionSet(f"index {dup[0]} is repeated", index=dup[0])
    if items[0] < 0:
        raise InvalidDeletionSet("indices must be nonnegative", index=items[0])
    if len(items) % 2:
        raise InvalidDeletionSet(f"index {items[-1]} has no adjacent partner", index=items[-1])
    for j in range(0, len(items), 2):
        if items[j + 1] != items[j] + 1:
            raise InvalidDeletionSet(f"index {items[j]} is not paired with {items[j] + 1}", index=items[j])
    return tuple(items)


# ------------------------------------------------------------- Wronskians


def _derivative_tensor(states: Sequence[PiecewiseState], x, k_max: int, side: str,
                       stripped: bool = True) -> np.ndarray:
    """T[p, j, k] = d^j f_k / dx^j at point p, f = phi (default) or psi."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if stripped:
        cols = [s.stripped_derivatives(x, k_max, side) for s in states]
    else:
        cols = [s.derivatives(x, k_max, side) for s in states]
    return np.stack(cols, axis=-1).transpose(1, 0, 2)


def _check_states(states):
    M = len(states)
    if M < 1:
        raise ValueError("need at least one state")
    if M > MAX_WRONSKIAN_ORDER:
        raise ValueError(f"Wronskian order capped at {MAX_WRONSKIAN_ORDER}")
    if len({s.spec for s in states}) != 1:
        raise ValueError("all states must share one potential")
    return M


# Every eigenfunction is psi = g phi with g = exp(-x^2/2), and a Wronskian of
# M such products is W[psi] = g^M W[phi]. The phi determinants are far better
# conditioned (no common Gaussian making the derivative rows nearly
# parallel), so all determinants below are of phi and the Gaussian is
# restored analytically.


def wronskian(states: Sequence[PiecewiseState], x, side: str = AUTO):
    """det(d^j psi_k/dx^j), j = 0..M-1, by LU with partial pivoting."""
    M = _check_states(states)
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    T = _derivative_tensor(states, xa, M - 1, side)
    w = np.exp(-0.5 * M * xa * xa) * np.linalg.det(T[:, :M, :])
    return float(w[0]) if scalar else w


def _slogdet_rows(T: np.ndarray, rows: Sequence[int]):
    return np.linalg.slogdet(T[:, list(rows), :])


def _stripped_log_derivatives(states, x: np.ndarray, side: str):
    """(W'/W, W''/W) for W = W[phi] by row replacement on log-determinants.

    W'  = det(rows 0..M-2, M)
    W'' = det(rows 0..M-2, M+1) + det(rows 0..M-3, M-1, M)
    """
    M = _check_states(states)
    T = _derivative_tensor(states, x, M + 1, side)
    base = list(range(M - 1))
    s0, l0 = _slogdet_rows(T, range(M))
    bad = (s0 == 0) | ~np.isfinite(l0)
    if np.any(bad):
        raise WronskianZero("Wronskian vanishes", x=float(x[np.argmax(bad)]))
    s1, l1 = _slogdet_rows(T, base + [M])
    s2, l2 = _slogdet_rows(T, base + [M + 1])
    r1 = s0 * s1 * np.exp(l1 - l0)
    r2 = s0 * s2 * np.exp(l2 - l0)
    if M >= 2:
        s3, l3 = _slogdet_rows(T, list(range(M - 2)) + [M - 1, M])
        r2 = r2 + s0 * s3 * np.exp(l3 - l0)
    return r1, r2


def log_derivatives(states: Sequence[PiecewiseState], x, side: str = AUTO):
    """(W'/W, W''/W) of the eigenfunction Wronskian W = g^M W[phi]."""
    M = _check_states(states)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p1, p2 = _stripped_log_derivatives(states, x, side)
    r1 = p1 - M * x
    r2 = p2 - 2.0 * M * x * p1 + (M * M * x * x - M)
    return r1, r2


def log_wronskian_second_derivative(states: Sequence[PiecewiseState], x, side: str = AUTO):
    """(ln W)'' = -M + (ln W[phi])''."""
    M = _check_states(states)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p1, p2 = _stripped_log_derivatives(states, x, side)
    return (p2 - p1 * p1) - M


def wronskian_derivatives(states: Sequence[PiecewiseState], x, side: str = AUTO):
    """(W, W', W'')."""
    scalar = np.ndim(x) == 0
    w = np.atleast_1d(wronskian(states, x, side))
    r1, r2 = log_derivatives(states, x, side)
    out = (w, w * r1, w * r2)
    if scalar:
        return tuple(float(v[0]) for v in out)
    return out


# ------------------------------------------------------ deformed systems


class DeformedSystem:
    """V(x; a) with the eigenstates listed in ``deleted`` removed."""

    def __init__(self, spec: PotentialSpec, deleted: Sequence[int], deformation: Optional[DeformationSpec] = None):
        self.spec = spec
        self.deleted = tuple(sorted(int(d) for d in deleted))
        self.deformation = deformation
        self.seed_states = tuple(eigenstate(spec, d) for d in self.deleted)

    def retained_levels(self, count: int):
        """First ``count`` kept levels as (index, energy) pairs."""
        out = []
        n = 0
        while len(out) < count:
            if n not in self.deleted:
                out.append((n, eigenstate(self.spec, n).E))
            n += 1
        return out

    def wronskian(self, x, side: str = AUTO):
        return wronskian(self.seed_states, x, side)

    def potential(self, x, side: str = AUTO):
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        v = np.asarray(potential_value(self.spec, x, side), dtype=float)
        if self.seed_states:
            v = v - 2.0 * log_wronskian_second_derivative(self.seed_states, x, side)
        return float(v[0]) if scalar else v

    def __call__(self, x):
        return self.potential(x)

    def state(self, n: int, x, side: str = AUTO):
        """Deformed eigenfunction carrying the original level n (n not deleted)."""
        if n in self.deleted:
            raise ValueError(f"level {n} was deleted")
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        target = eigenstate(self.spec, n)
        if not self.seed_states:
            out = target.derivatives(x, 0, side)[0]
        else:
            M = len(self.seed_states)
            T = _derivative_tensor(self.seed_states + (target,), x, M, side)
            s_ext, l_ext = np.linalg.slogdet(T)
            s0, l0 = np.linalg.slogdet(T[:, :M, :M])
            if np.any(s0 == 0):
                raise WronskianZero("Wronskian vanishes", x=float(x[np.argmax(s0 == 0)]))
            out = s_ext * s0 * np.exp(l_ext - l0 - 0.5 * x * x)
        return float(out[0]) if scalar else out

    def regularity_scan(self, half_width: float = 8.0, points: int = 4001, floor: float = 1e-12,
                        window: float = 0.2):
        """Check the seed Wronskian for zeros on [-L, L], both sides of 0.

        A sign change, an exact zero, or a dip of |W| below ``floor`` times its
        maximum over the surrounding +-``window`` raises WronskianZero. The
        comparison is local because |W| legitimately spans many decades over
        [-L, L] (Gaussian envelope times non-polynomial tails). Returns the
        smallest local ratio found.
        """
        if not self.seed_states:
            return 1.0
        M = len(self.seed_states)
        xs = np.linspace(-half_width, half_width, points)
        xs = xs[xs != 0]
        neg, pos = xs[xs < 0], xs[xs > 0]
        parts = []
        for x, side in ((neg, LEFT), (np.array([0.0]), LEFT), (np.array([0.0]), RIGHT), (pos, RIGHT)):
            T = _derivative_tensor(self.seed_states, x, M - 1, side)
            s, l = np.linalg.slogdet(T[:, :M, :])
            parts.append((x, s, l))
        x_all = np.concatenate([p[0] for p in parts])
        s_all = np.concatenate([p[1] for p in parts])
        l_all = np.concatenate([p[2] for p in parts])
        if np.any(s_all == 0) or not np.all(np.isfinite(l_all)):
            bad = (s_all == 0) | ~np.isfinite(l_all)
            raise WronskianZero("Wronskian vanishes", x=float(x_all[np.argmax(bad)]))
        flips = np.nonzero(s_all[1:] != s_all[:-1])[0]
        if flips.size:
            raise WronskianZero("Wronskian changes sign", x=float(x_all[flips[0]]))
        w = max(1, int(round(window / (2.0 * half_width / (points - 1)))))
        padded = np.pad(l_all, w, mode="edge")
        local_max = np.lib.stride_tricks.sliding_window_view(padded, 2 * w + 1).max(axis=1)
        depth = l_all - local_max
        ratio = float(np.exp(depth.min()))
        if ratio < floor:
            raise WronskianZero(f"|W| dips to {ratio:.2e} of its local maximum",
                                x=float(x_all[np.argmin(depth)]))
        return ratio

    def schrodinger_residual(self, n: int, xs, h: float = 1e-4) -> np.ndarray:
        """Relative residual of -psi'' + V_D psi = E_n psi with second differences."""
        xs = np.asarray(xs, dtype=float)
        e = eigenstate(self.spec, n).E
        f0 = self.state(n, xs)
        fp = self.state(n, xs + h)
        fm = self.state(n, xs - h)
        d2 = (fp - 2.0 * f0 + fm) / (h * h)
        v = self.potential(xs)
        resid = -d2 + (v - e) * f0
        size = np.abs(d2) + np.abs(v * f0) + np.abs(e * f0)
        return np.abs(resid) / size


@lru_cache(maxsize=64)
def deformed_system(spec: PotentialSpec, deleted: Tuple[int, ...]) -> DeformedSystem:
    return DeformedSystem(spec, deleted)


def crum_system(ell: int, M: int) -> DeformedSystem:
    if not 1 <= M <= MAX_CRUM_M:
        raise ValueError(f"M must lie in [1, {MAX_CRUM_M}]")
    return deformed_system(PotentialSpec.from_ell(ell), tuple(range(M)))


def krein_adler_system(ell: int, D: Sequence[int]) -> DeformedSystem:
    return deformed_system(PotentialSpec.from_ell(ell), validate_deletion_set(D))


def strict_iso_system(ell: int) -> DeformedSystem:
    if not 1 <= ell <= MAX_STRICT_ELL:
        raise ValueError(f"ell must lie in [1, {MAX_STRICT_ELL}]")
    return crum_system(ell, ell)


def system_for(deformation: DeformationSpec) -> DeformedSystem:
    if deformation.kind == "crum":
        return crum_system(deformation.ell, deformation.M)
    return krein_adler_system(deformation.ell, deformation.D)


def crum_potential(ell: int, M: int, x, side: str = AUTO):
    return crum_system(ell, M).potential(x, side)


def crum_state(ell: int, M: int, n: int, x, side: str = AUTO):
    """psi^[M]_n, which carries the energy E_{l, n+M}."""
    if M == 0:
        return evaluate(eigenstate(PotentialSpec.from_ell(ell), n), x, side)
    return crum_system(ell, M).state(n + M, x, side)


def strict_iso_potential(ell: int, x, side: str = AUTO):
    return strict_iso_system(ell).potential(x, side)


def krein_adler_potential(ell: int, D: Sequence[int], x, side: str = AUTO):
    return krein_adler_system(ell, D).potential(x, side)


def krein_adler_state(ell: int, D: Sequence[int], n_tilde: int, x, side: str = AUTO):
    return krein_adler_system(ell, D).state(n_tilde, x, side)


def shape_invariance_probe(ell, M: int, x_lo: float = 1.0, x_hi: float = 5.0,
                           samples: int = 401) -> float:
    """Uniform misfit of V^[M+1](x) ~ c0 + V^[M](x - s) on [x_lo, x_hi].

    ``ell`` is an integer l (a = 4l) or a PotentialSpec. For fixed s the best
    c0 is the midrange of the difference, so the residual is half its spread;
    s in [-0.9, 0.9] is found by a bounded scalar search, keeping x - s right
    of the step. A shape-invariant pair (the pure oscillator) fits exactly.
    """
    spec = ell if isinstance(ell, PotentialSpec) else PotentialSpec.from_ell(ell)
    if not 0 <= M <= 3:
        raise ValueError("M must lie in [0, 3]")
    lower = deformed_system(spec, tuple(range(M)))
    upper = deformed_system(spec, tuple(range(M + 1)))
    xs = np.linspace(x_lo, x_hi, samples)
    target = upper.potential(xs)

    def misfit(s):
        diff = target - lower.potential(xs - s)
        return 0.5 * float(diff.max() - diff.min())

    res = minimize_scalar(misfit, bounds=(-0.9, 0.9), method="bounded", options={"xatol": 1e-10})
    return float(min(res.fun, misfit(0.0)))
