import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disloc.darboux import strict_iso_potential
from disloc.errors import ConvergenceFailure, TruncationWarning
from disloc.model import PotentialSpec, potential_value
from disloc.oracle import (
    GridConfig,
    assemble,
    convergence_study,
    grid_spectrum,
    lowest_eigenvalues,
    staggered_grid,
    sturm_count,
)
from disloc.spectrum import GRID_ORACLE, levels

A2_LEVELS = (-1.30908, 1.09714, 2.93715, 5.04459, 6.96479, 9.02870, 10.9756)
ELL6_NEGATIVE = (-22.4357, -18.6885, -14.8995, -11.1005, -7.31152, -3.56427)


def ho(x):
    return x * x - 1.0


def stepped(a):
    spec = PotentialSpec(a)
    return lambda x: potential_value(spec, x)


def test_oscillator_spectrum():
    got = grid_spectrum(ho, GridConfig(L=8.0, N=4000, levels=4))
    assert np.allclose([e.E for e in got], [0.0, 2.0, 4.0, 6.0], atol=1e-3)
    assert all(e.provenance == GRID_ORACLE for e in got)
    assert [e.n for e in got] == [0, 1, 2, 3]


def test_table_one_by_grid():
    got = grid_spectrum(stepped(2.0), GridConfig(L=8.0, N=4000, levels=7))
    assert np.allclose([e.E for e in got], A2_LEVELS, atol=2e-3)


def test_deep_negative_levels_by_grid():
    got = grid_spectrum(stepped(24.0), GridConfig(L=9.0, N=6000, levels=6))
    assert np.allclose([e.E for e in got], ELL6_NEGATIVE, atol=5e-3)


@pytest.mark.parametrize("a", [0.5, 2.0, 4.0, 24.0])
def test_concordance_with_matching(a):
    cfg = GridConfig(L=9.0, N=6000, levels=6) if a > 20 else GridConfig(levels=6)
    grid = grid_spectrum(stepped(a), cfg)
    exact = levels(PotentialSpec(a), 5)
    for g, e in zip(grid, exact):
        assert abs(g.E - e.E) <= 5.0 * g.residual


def test_oscillator_convergence_order():
    tab = convergence_study(ho, 8.0, (1000, 2000, 4000), 4)
    assert tab.order_ok()
    assert np.all(np.abs(tab.orders - 2.0) < 0.01)
    assert tab.monotone_towards([0.0, 2.0, 4.0, 6.0])


def test_stepped_convergence_order():
    spec = PotentialSpec(2.0)
    tab = convergence_study(stepped(2.0), 8.0, (1000, 2000, 4000), 6)
    assert tab.order_ok()
    assert tab.monotone_towards([e.E for e in levels(spec, 5)])


def test_strict_iso_monotone_convergence():
    tab = convergence_study(lambda x: strict_iso_potential(1, x), 8.0, (1000, 2000, 4000), 4)
    assert tab.monotone_towards([0.0, 2.0, 4.0, 6.0])
    assert tab.order_ok()


def test_convergence_study_needs_increasing_sizes():
    with pytest.raises(ValueError):
        convergence_study(ho, 8.0, (2000, 1000, 4000), 2)


@given(L=st.floats(6.0, 12.0), half=st.integers(250, 2500))
def test_staggered_grid_avoids_origin(L, half):
    N = 2 * half
    x, h = staggered_grid(L, N)
    assert len(x) == N
    assert not np.any(x == 0.0)
    assert h == pytest.approx(2 * L / N)
    assert x[0] == pytest.approx(-L + h / 2)


@settings(max_examples=25)
@given(lam=st.floats(-5.0, 40.0))
def test_sturm_count_matches_dense_eigenvalues(lam):
    diag, off, _ = assemble(stepped(2.0), 6.0, 500)
    dense = np.linalg.eigvalsh(np.diag(diag) + np.diag(off, 1) + np.diag(off, -1))
    if np.min(np.abs(dense - lam)) < 1e-9:
        return
    assert sturm_count(diag, off, lam) == int(np.sum(dense < lam))


def test_lowest_eigenvalues_sorted_and_certified():
    diag, off, _ = assemble(ho, 8.0, 2000)
    vals = lowest_eigenvalues(diag, off, 8)
    assert np.all(np.diff(vals) > 0)


def test_sturm_check_catches_wrong_values(monkeypatch):
    import disloc.oracle as oracle

    diag, off, _ = assemble(ho, 8.0, 1000)
    monkeypatch.setattr(oracle, "eigh_tridiagonal", lambda *a, **k: np.array([0.5, 2.0]))
    with pytest.raises(ConvergenceFailure):
        oracle.lowest_eigenvalues(diag, off, 2)


def test_truncation_warning():
    with pytest.warns(TruncationWarning):
        grid_spectrum(lambda x: 0.01 * x * x, GridConfig(L=6.0, N=600, levels=2))


def test_no_warning_for_confined_levels():
    with warnings.catch_warnings():
        warnings.simplefilter("error", TruncationWarning)
        grid_spectrum(ho, GridConfig(levels=6))


def test_non_finite_potential_rejected():
    with pytest.raises(ValueError):
        grid_spectrum(lambda x: np.where(np.abs(x) < 1, np.inf, x * x), GridConfig(levels=2))


def test_odd_grid_rejected():
    with pytest.raises(ValueError):
        staggered_grid(8.0, 719)


def test_richardson_estimate_with_odd_half():
    got = grid_spectrum(ho, GridConfig(N=2002, levels=3))
    for e, want in zip(got, (0.0, 2.0, 4.0)):
        assert abs(e.E - want) <= 5.0 * e.residual


@pytest.mark.parametrize("kw", [{"L": 5.0}, {"N": 499}, {"N": 1001}, {"levels": 0}, {"levels": 21}])
def test_grid_config_validation(kw):
    with pytest.raises(ValueError):
        GridConfig(**kw)


def test_thread_cap_env(monkeypatch):
    from disloc.oracle import max_workers

    monkeypatch.setenv("DISLOC_THREADS", "2")
    assert max_workers() == 2
    monkeypatch.setenv("DISLOC_THREADS", "junk")
    assert max_workers() >= 1
