"""Acceptance suites: one pass/fail line per criterion.

``quick`` covers the a = 2 reference levels, the l = 6 negative levels, the
Hermite ladder and root symmetry (seconds). ``full`` adds state checks, grid
oracle concordance, the deformations and the shape-invariance probe.
"""
from __future__ import annotations

import time
from typing import Callable, Dict, List, Tuple

import numpy as np

from .darboux import crum_system, krein_adler_system, shape_invariance_probe, strict_iso_system
from .io import Check, RunReport
from .model import LEFT, RIGHT, PotentialSpec, potential_value
from .oracle import GridConfig, convergence_study, grid_spectrum
from .spectrum import (
    appendix_closed_forms,
    check_root_symmetry,
    find_spectrum_general,
    levels as exact_levels,
    negative_spectrum_hermite_case,
    normalized_determinant,
)
from .states import boundary_report, count_nodes, eigenstate

# Reference values, six significant digits.
A2_LEVELS = (-1.30908, 1.09714, 2.93715, 5.04459, 6.96479, 9.02870, 10.9756)
ELL6_NEGATIVE = (-22.4357, -18.6885, -14.8995, -11.1005, -7.31152, -3.56427)

TABLE_TOL = 1e-4
TABLE_RUNTIME = 1.0
CLOSED_FORM_TOL = 1e-9
LADDER_TOL = 1e-8
LADDER_DET_TOL = 1e-9
SYMMETRY_TOL = 1e-10
ODD_CENTRE_TOL = 1e-12
CONTINUITY_TOL = 1e-10
CONCORDANCE_FACTOR = 5.0
ORDER_BAND = (1.9, 2.1)
ISO_TOL = 2e-3
SHAPE_LO = 0.1
SHAPE_HO = 1e-6
GAP_BAND = (1.8, 2.5)
FULL_RUNTIME = 300.0

Result = Tuple[str, float, float, bool, str]


def _max_dev(got, want) -> float:
    if len(got) < len(want):
        return float("inf")
    return float(np.max(np.abs(np.asarray(got[: len(want)]) - np.asarray(want))))


def crit_a2_levels() -> List[Result]:
    t0 = time.perf_counter()
    found = find_spectrum_general(PotentialSpec(2.0), -5.0, 12.0)
    dt = time.perf_counter() - t0
    dev = _max_dev([e.E for e in found], A2_LEVELS)
    return [
        ("1 a=2 levels E0..E6 match reference", dev, TABLE_TOL, dev <= TABLE_TOL, ""),
        ("1 a=2 spectrum runtime (s)", dt, TABLE_RUNTIME, dt < TABLE_RUNTIME, ""),
    ]


def crit_ell6() -> List[Result]:
    roots = [e.E for e in negative_spectrum_hermite_case(6)]
    dev = _max_dev(roots, ELL6_NEGATIVE)
    closed = appendix_closed_forms(6)
    cdev = _max_dev(sorted(closed), roots)
    return [
        ("2 l=6 negative levels match reference", dev, TABLE_TOL, dev <= TABLE_TOL, ""),
        ("2 l=6 radical closed forms vs Sturm roots", cdev, CLOSED_FORM_TOL, cdev <= CLOSED_FORM_TOL, ""),
    ]


def crit_ladder() -> List[Result]:
    worst_e, worst_d = 0.0, 0.0
    n_top = 6
    for ell in range(1, 9):
        spec = PotentialSpec.from_ell(ell)
        # generic determinant scan, independent of the ladder formula
        found = find_spectrum_general(spec, -0.5, 2.0 * n_top + 1.0)
        want = [2.0 * k for k in range(n_top + 1)]
        worst_e = max(worst_e, _max_dev([e.E for e in found], want))
        worst_d = max(worst_d, max(abs(normalized_determinant(spec, e)) for e in want))
    return [("3 ladder E=2(n-l) for l=1..8 (energy dev)", worst_e, LADDER_TOL, worst_e <= LADDER_TOL, ""),
            ("3 ladder D(E)/scale at E=2k", worst_d, LADDER_DET_TOL, worst_d <= LADDER_DET_TOL, "")]


def crit_symmetry() -> List[Result]:
    worst, worst_c = 0.0, 0.0
    for ell in range(1, 13):
        roots = [e.E for e in negative_spectrum_hermite_case(ell)]
        worst = max(worst, check_root_symmetry(roots, ell))
        if ell % 2:
            worst_c = max(worst_c, min(abs(r + 1 + 2 * ell) for r in roots))
    return [("4 root symmetry about -1-2l, l=1..12", worst, SYMMETRY_TOL, worst <= SYMMETRY_TOL, ""),
            ("4 odd l: -1-2l is a root", worst_c, ODD_CENTRE_TOL, worst_c <= ODD_CENTRE_TOL, "")]


def crit_ell1() -> List[Result]:
    found = find_spectrum_general(PotentialSpec.from_ell(1), -4.5, 9.0)
    dev = _max_dev([e.E for e in found], (-3.0, 0.0, 2.0, 4.0, 6.0, 8.0))
    return [("l=1 spectrum {-3,0,2,4,6,8}", dev, LADDER_TOL, dev <= LADDER_TOL, "")]


def crit_continuity() -> List[Result]:
    worst = 0.0
    for a in (0.5, 2.0):
        for n in range(13):
            r = boundary_report(eigenstate(PotentialSpec(a), n))
            worst = max(worst, r.value_jump, r.slope_jump)
    bad_class = []
    for ell in range(1, 9):
        spec = PotentialSpec.from_ell(ell)
        for n in range(13):
            st = eigenstate(spec, n)
            r = boundary_report(st)
            worst = max(worst, r.value_jump, r.slope_jump)
            if n < ell:
                continue
            d_l = st.derivatives(0.0, 1, LEFT)[:, 0]
            d_r = st.derivatives(0.0, 1, RIGHT)[:, 0]
            if (n - ell) % 2 == 0:
                ok = d_l[1] == 0.0 and d_r[1] == 0.0 and d_r[0] != 0.0
            else:
                ok = d_l[0] == 0.0 and d_r[0] == 0.0 and d_r[1] != 0.0
            if not ok:
                bad_class.append((ell, n))
    return [("5 origin continuity residuals", worst, CONTINUITY_TOL, worst <= CONTINUITY_TOL, ""),
            ("5 Neumann/Dirichlet classification (a=4l, n>=l)", float(len(bad_class)), 0.0,
             not bad_class, f"failures: {bad_class}" if bad_class else "")]


def crit_nodes() -> List[Result]:
    bad = []
    for a in (2, 4, 24):
        spec = PotentialSpec.from_a(a)
        for n in range(13):
            k = count_nodes(eigenstate(spec, n))
            if k != n:
                bad.append((a, n, k))
    return [("6 node count equals n (n<=12, a=2,4,24)", float(len(bad)), 0.0, not bad,
             f"(a, n, nodes): {bad}" if bad else "")]


def _oracle_cfg(a: float) -> GridConfig:
    # the deep a=24 levels have wide left tails: use a larger box
    return GridConfig(L=9.0, N=6000, levels=6) if a > 20 else GridConfig(levels=6)


def crit_oracle() -> List[Result]:
    worst = 0.0
    for a in (0.5, 2.0, 4.0, 24.0):
        spec = PotentialSpec.from_a(int(a)) if a == int(a) and int(a) % 4 == 0 else PotentialSpec(a)
        exact = [e.E for e in exact_levels(spec, 5)]
        grid = grid_spectrum(lambda x, s=spec: potential_value(s, x), _oracle_cfg(a))
        for g, e in zip(grid, exact):
            worst = max(worst, abs(g.E - e) / g.residual if g.residual > 0 else (0.0 if g.E == e else np.inf))
    ho = PotentialSpec(1e-9)
    tab = convergence_study(lambda x: potential_value(ho, x), 8.0, (1000, 2000, 4000), 6)
    order_dev = float(np.max(np.abs(tab.orders - 2.0)))
    half = 0.5 * (ORDER_BAND[1] - ORDER_BAND[0])
    return [("7 grid vs exact |dE| / Richardson estimate (a=0.5,2,4,24)", worst, CONCORDANCE_FACTOR,
             worst <= CONCORDANCE_FACTOR, ""),
            ("7 oscillator control convergence order |p-2|", order_dev, half, order_dev <= half, "")]


def _oracle_dev(system, want) -> float:
    grid = grid_spectrum(system.potential, GridConfig(levels=len(want)))
    return _max_dev([g.E for g in grid], want)


def crit_crum() -> List[Result]:
    dev = _oracle_dev(crum_system(1, 1), (0.0, 2.0, 4.0, 6.0))
    return [("8 Crum l=1 M=1 oracle spectrum {0,2,4,6}", dev, ISO_TOL, dev <= ISO_TOL, "")]


def crit_strict() -> List[Result]:
    out = []
    for ell in (1, 2, 3):
        sysm = strict_iso_system(ell)
        dev = _oracle_dev(sysm, (0.0, 2.0, 4.0, 6.0))
        xs = np.linspace(-8.0, 8.0, 4001)
        xs = xs[xs != 0]
        vals = np.concatenate([sysm.potential(xs), [sysm.potential(0.0, LEFT), sysm.potential(0.0, RIGHT)]])
        finite = bool(np.all(np.isfinite(vals)))
        try:
            sysm.regularity_scan()
            regular = True
        except Exception:  # noqa: BLE001 - reported as a failed check
            regular = False
        out.append((f"9 strict isospectral l={ell} oracle spectrum {{0,2,4,6}}", dev, ISO_TOL, dev <= ISO_TOL, ""))
        out.append((f"9 strict isospectral l={ell} finite on [-8,8] incl. 0-/0+",
                    float(np.count_nonzero(~np.isfinite(vals))), 0.0, finite and regular,
                    f"max|V|={np.max(np.abs(vals[np.isfinite(vals)])):.4g}"
                    + ("" if regular else "; Wronskian regularity scan failed")))
    return out


def crit_krein_adler() -> List[Result]:
    dev = _oracle_dev(krein_adler_system(1, (1, 2)), (-3.0, 4.0, 6.0, 8.0))
    return [("10 Krein-Adler l=1 D={1,2} oracle spectrum {-3,4,6,8}", dev, ISO_TOL, dev <= ISO_TOL, "")]


def crit_shape() -> List[Result]:
    r1 = shape_invariance_probe(1, 0)
    r0 = shape_invariance_probe(PotentialSpec(1e-9), 0)
    return [("11 l=1 M=0->1 shape misfit above threshold", r1, SHAPE_LO, r1 > SHAPE_LO,
             "passes when residual exceeds tolerance"),
            ("11 oscillator control shape misfit", r0, SHAPE_HO, r0 <= SHAPE_HO, "")]


def crit_gaps() -> List[Result]:
    es = [e.E for e in find_spectrum_general(PotentialSpec(2.0), -5.0, 12.0)]
    gaps = np.diff(es)
    dev = float(max(np.max(GAP_BAND[0] - gaps), np.max(gaps - GAP_BAND[1]), 0.0))
    return [("12 a=2 gaps within [1.8, 2.5]", dev, 0.0, dev == 0.0,
             "gaps: " + " ".join(f"{g:.5f}" for g in gaps))]


QUICK: List[Callable[[], List[Result]]] = [crit_a2_levels, crit_ell6, crit_ladder, crit_symmetry, crit_ell1]
FULL: List[Callable[[], List[Result]]] = QUICK + [
    crit_continuity, crit_nodes, crit_oracle, crit_crum, crit_strict, crit_krein_adler, crit_shape, crit_gaps,
]
SUITES: Dict[str, List[Callable[[], List[Result]]]] = {"quick": QUICK, "full": FULL}


def run_suite(name: str, report: RunReport, echo: Callable[[str], None] = print) -> bool:
    """Run every check of the suite, recording and printing one line each."""
    t0 = time.perf_counter()
    for crit in SUITES[name]:
        try:
            results = crit()
        except Exception as exc:  # noqa: BLE001 - a crash is a failed criterion
            results = [(crit.__name__, float("inf"), 0.0, False, f"{type(exc).__name__}: {exc}")]
        for label, resid, tol, ok, detail in results:
            c = report.check(label, resid, tol, passed=ok, detail=detail)
            echo(_line(c))
    if name == "full":
        dt = time.perf_counter() - t0
        c = report.check("12 full suite runtime (s)", dt, FULL_RUNTIME, passed=dt < FULL_RUNTIME)
        echo(_line(c))
    return report.ok


def _line(c: Check) -> str:
    tag = "PASS" if c.passed else "FAIL"
    extra = f"  ({c.detail})" if c.detail else ""
    return f"{tag}  {c.name}: residual={c.residual:.3e} tol={c.tolerance:.3e}{extra}"
