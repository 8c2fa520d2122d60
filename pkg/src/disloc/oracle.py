"""Finite-difference cross-check for any pointwise potential.

-psi'' + V psi = E psi is discretized with the 3-point stencil on a staggered
grid x_i = -L + (i + 1/2) h, h = 2L/N with N even, so no node sits on the
jump at x = 0 (the origin is a cell face). Dirichlet conditions close the box.
The lowest eigenvalues of the resulting symmetric tridiagonal matrix are
found by Sturm-count bisection, and a half-resolution run gives a
Richardson error estimate.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceFailure, TruncationWarning
from .spectrum import GRID_ORACLE, Eigenvalue

Potential = Callable[[np.ndarray], np.ndarray]


def max_workers() -> int:
    try:
        return max(1, int(os.environ.get("DISLOC_THREADS", "")))
    except ValueError:
        return min(4, os.cpu_count() or 1)


@dataclass(frozen=True)
class GridConfig:
    L: float = 8.0
    N: int = 4000
    levels: int = 6

    def __post_init__(self):
        if self.L < 6:
            raise ValueError("L must be at least 6")
        if self.N < 500:
            raise ValueError("N must be at least 500")
        if self.N % 2:
            raise ValueError("N must be even (an odd N puts a grid point on the step at 0)")
        if not 1 <= self.levels <= 20:
            raise ValueError("levels must lie in [1, 20]")


def staggered_grid(L: float, N: int):
    if N % 2:
        raise ValueError("N must be even (an odd N puts a grid point on the step at 0)")
    h = 2.0 * L / N
    return -L + (np.arange(N) + 0.5) * h, h


def assemble(potential: Potential, L: float, N: int):
    """Diagonal, off-diagonal and grid of the discretized Hamiltonian."""
    x, h = staggered_grid(L, N)
    v = np.asarray(potential(x), dtype=float)
    if not np.all(np.isfinite(v)):
        bad = x[~np.isfinite(v)][0]
        raise ValueError(f"potential is not finite at x={bad}")
    diag = 2.0 / (h * h) + v
    off = np.full(N - 1, -1.0 / (h * h))
    return diag, off, x


def sturm_count(diag: np.ndarray, off: np.ndarray, lam: float) -> int:
    """Number of eigenvalues strictly below ``lam`` (LDL^T inertia count)."""
    count = 0
    d = diag[0] - lam
    if d < 0:
        count += 1
    off2 = off * off
    tiny = np.finfo(float).tiny
    for i in range(1, len(diag)):
        if d == 0.0:
            d = tiny
        d = diag[i] - lam - off2[i - 1] / d
        if d < 0:
            count += 1
    return count


def lowest_eigenvalues(diag, off, k: int, vectors: bool = False):
    """Lowest k eigenvalues by bisection (LAPACK stebz), certified by Sturm counts."""
    res = eigh_tridiagonal(diag, off, eigvals_only=not vectors, select="i",
                           select_range=(0, k - 1), lapack_driver="stebz" if not vectors else "stemr")
    vals = res if not vectors else res[0]
    scale = max(1.0, float(np.max(np.abs(vals))))
    delta = 1e-9 * scale
    for j, lam in enumerate(vals):
        if sturm_count(diag, off, lam - delta) > j or sturm_count(diag, off, lam + delta) < j + 1:
            raise ConvergenceFailure(f"eigenvalue {j} at {lam} failed the Sturm count check")
    return res


def grid_eigenpairs(potential: Potential, cfg: GridConfig):
    """Grid, eigenvalues and unit-norm eigenvectors (columns)."""
    diag, off, x = assemble(potential, cfg.L, cfg.N)
    vals, vecs = lowest_eigenvalues(diag, off, cfg.levels, vectors=True)
    return x, vals, vecs


def _raw_levels(potential: Potential, L: float, N: int, levels: int) -> np.ndarray:
    diag, off, _ = assemble(potential, L, N)
    return np.asarray(lowest_eigenvalues(diag, off, levels))


def grid_spectrum(potential: Potential, cfg: GridConfig = GridConfig(), order: float = 2.0) -> List[Eigenvalue]:
    """Lowest ``cfg.levels`` grid eigenvalues; ``residual`` holds the Richardson error estimate."""
    x, fine, vecs = grid_eigenpairs(potential, cfg)
    n_coarse = cfg.N // 2 - (cfg.N // 2) % 2
    coarse = _raw_levels(potential, cfg.L, n_coarse, cfg.levels)
    est = np.abs(fine - coarse) / ((cfg.N / n_coarse) ** order - 1.0)
    edge = np.maximum(np.abs(vecs[0]), np.abs(vecs[-1])) / np.max(np.abs(vecs), axis=0)
    for j in np.nonzero(edge > 1e-5)[0]:
        warnings.warn(f"level {j}: |psi(+-L)| ~ {edge[j]:.1e} of its peak; enlarge L",
                      TruncationWarning, stacklevel=2)
    return [Eigenvalue(j, float(fine[j]), GRID_ORACLE, float(est[j])) for j in range(cfg.levels)]


@dataclass(frozen=True)
class ConvergenceTable:
    N: tuple
    energies: np.ndarray  # shape (len(N), levels)
    orders: np.ndarray  # shape (len(N) - 2, levels)

    def order_ok(self, lo: float = 1.7, hi: float = 2.3) -> bool:
        return bool(np.all((self.orders >= lo) & (self.orders <= hi)))

    def monotone_towards(self, exact: Sequence[float]) -> bool:
        err = np.abs(self.energies - np.asarray(exact)[None, : self.energies.shape[1]])
        return bool(np.all(np.diff(err, axis=0) < 0))


def convergence_study(potential: Potential, L: float, N_list: Sequence[int], levels: int) -> ConvergenceTable:
    N_list = tuple(int(n) for n in N_list)
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be increasing")
    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        rows = list(pool.map(lambda n: _raw_levels(potential, L, n, levels), N_list))
    energies = np.array(rows)
    orders = []
    for i in range(len(N_list) - 2):
        d1 = np.abs(energies[i] - energies[i + 1])
        d2 = np.abs(energies[i + 1] - energies[i + 2])
        ratio = N_list[i + 1] / N_list[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            orders.append(np.log(d1 / d2) / math.log(ratio))
    return ConvergenceTable(N_list, energies, np.array(orders).reshape(-1, levels))
