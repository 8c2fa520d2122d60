import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from disloc.errors import AtOriginAmbiguous, IndexBelowLadder, NotAnEigenvalue
from disloc.model import LEFT, RIGHT, PotentialSpec, potential_value
from disloc.oracle import GridConfig, grid_eigenpairs
from disloc.specfun import hermite, recip_gamma
from disloc.spectrum import level
from disloc.states import (
    HermiteForm,
    boundary_report,
    continuity_ratio,
    count_nodes,
    eigenstate,
    evaluate,
    evaluate_derivative,
    general_state,
    hermite_state,
    norm_l2,
    normalization_constant,
    sample_rows,
)


def _a2_ground():
    return general_state(PotentialSpec(2.0), level(PotentialSpec(2.0), 0).E, n=0)


# ----------------------------------------------------------- construction

def test_a2_ground_state():
    st_ = _a2_ground()
    assert count_nodes(st_) == 0
    r = boundary_report(st_)
    assert r.value_jump <= 1e-10 and r.slope_jump <= 1e-10 and r.tail_decay_ok


def test_ell1_ground_state_odd_even_ratio():
    # psi_0 at E = -3: odd/even coefficient ratio 2 Gamma(5/4)/Gamma(3/4) on both sides
    st_ = general_state(PotentialSpec.from_a(4), -3.0)
    ratio = 2 * math.gamma(1.25) / math.gamma(0.75)
    assert st_.right_form.c_odd / st_.right_form.c_even == pytest.approx(-ratio, rel=1e-12) or \
        st_.right_form.c_odd / st_.right_form.c_even == pytest.approx(ratio, rel=1e-12)
    # the sign is fixed by decay: psi'(0)/psi(0) = -2 Gamma(5/4)/Gamma(3/4) on the right for E=-3
    d = st_.derivatives(0.0, 1, RIGHT)[:, 0]
    assert d[1] / d[0] == pytest.approx(-2 * recip_gamma(0.75) / recip_gamma(1.25), rel=1e-12)


def test_oscillator_ground_state():
    st_ = general_state(PotentialSpec(1e-9), 0.0)
    assert abs(st_.right_form.c_odd) <= 1e-8
    xs = np.linspace(-4, 4, 41)
    xs = xs[xs != 0]
    assert np.allclose(evaluate(st_, xs), np.exp(-xs * xs / 2), rtol=1e-7, atol=1e-12)


def test_not_an_eigenvalue():
    with pytest.raises(NotAnEigenvalue):
        general_state(PotentialSpec(2.0), 0.5)


def test_hermite_state_examples():
    s11 = hermite_state(1, 1)
    assert s11.E == 0.0
    assert s11.left_form == HermiteForm(2, Fraction(-1, 2))
    assert s11.right_form == HermiteForm(0, Fraction(1))
    s66 = hermite_state(6, 6)
    assert s66.E == 0.0 and s66.right_form.degree == 0
    s12 = hermite_state(1, 2)
    assert s12.E == 2.0
    assert evaluate(s12, 0.0, LEFT) == 0.0 and evaluate(s12, 0.0, RIGHT) == 0.0
    with pytest.raises(IndexBelowLadder):
        hermite_state(3, 2)


def test_ell6_n6_normalization():
    # the even-branch constant for l=6, n=6 is 6!/12! and makes N H_12(0) = 1
    nc = normalization_constant(6, 6).value
    assert nc == Fraction(1, 665280)
    assert nc * 665280 == 1
    assert evaluate(hermite_state(6, 6), 0.0, LEFT) == pytest.approx(1.0, rel=1e-15)
    assert evaluate(hermite_state(6, 6), 0.0, RIGHT) == 1.0


def test_normalization_examples():
    for n in range(1, 20):
        want = Fraction(-1, 2 * n) if n % 2 else Fraction(-1, 2 * (n + 1))
        assert normalization_constant(1, n).value == want
    assert normalization_constant(6, 7).value == Fraction(1, 8648640)
    h1 = 2.0  # H_1'(0)
    h13 = 2 * 13 * hermite(12, 0.0)  # H_13'(0)
    assert float(normalization_constant(6, 7).value) == pytest.approx(h1 / h13, rel=1e-15)


@given(st.integers(1, 12), st.integers(0, 14))
def test_normalization_matches_continuity(ell, k):
    n = ell + k
    assert normalization_constant(ell, n).value == continuity_ratio(ell, n)


# -------------------------------------------------------------- evaluation

def test_evaluate_examples():
    s11 = hermite_state(1, 1)
    assert evaluate(s11, 0.0, LEFT) == 1.0 and evaluate(s11, 0.0, RIGHT) == 1.0
    s = general_state(PotentialSpec.from_a(4), -3.0)
    assert abs(evaluate(s, 0.0, LEFT) - evaluate(s, 0.0, RIGHT)) <= 1e-12
    with pytest.raises(AtOriginAmbiguous):
        evaluate(s, 0.0)


def test_derivative_examples():
    s11 = hermite_state(1, 1)
    xs = np.array([-1.3, 0.4, 2.0])
    assert np.array_equal(evaluate_derivative(s11, xs, 0), evaluate(s11, xs))
    assert evaluate_derivative(s11, 0.0, 1, LEFT) == evaluate_derivative(s11, 0.0, 1, RIGHT)
    jump = evaluate_derivative(s11, 0.0, 2, RIGHT) - evaluate_derivative(s11, 0.0, 2, LEFT)
    assert jump == pytest.approx(4.0, rel=1e-14)
    h = 1e-4
    # one-sided second differences centred at +-2h
    fd_r = (evaluate(s11, h) - 2 * evaluate(s11, 2 * h) + evaluate(s11, 3 * h)) / (h * h)
    fd_l = (evaluate(s11, -h) - 2 * evaluate(s11, -2 * h) + evaluate(s11, -3 * h)) / (h * h)
    assert fd_r - fd_l == pytest.approx(4.0, abs=1e-3)
    with pytest.raises(ValueError):
        evaluate_derivative(s11, 1.0, 17)


STATE_CASES = [(PotentialSpec(2.0), n) for n in (0, 3, 7)] + \
    [(PotentialSpec.from_ell(1), n) for n in (0, 1, 4)] + \
    [(PotentialSpec.from_ell(6), n) for n in (0, 5, 6, 9)] + [(PotentialSpec(0.5), 2)]


@pytest.mark.parametrize("spec,n", STATE_CASES)
def test_ode_residual(spec, n):
    st_ = eigenstate(spec, n)
    for side, xs in ((LEFT, np.linspace(-5, -0.05, 50)), (RIGHT, np.linspace(0.05, 5, 50))):
        d = st_.derivatives(xs, 2, side)
        v = potential_value(spec, xs)
        resid = np.abs(-d[2] + (v - st_.E) * d[0])
        scale = np.abs(d[2]) + np.abs(v * d[0]) + abs(st_.E) * np.abs(d[0])
        assert np.all(resid <= 1e-8 * np.maximum(scale, 1e-300))


@pytest.mark.parametrize("spec,n", STATE_CASES)
def test_derivative_recursion_vs_finite_differences(spec, n):
    st_ = eigenstate(spec, n)
    h = 1e-3
    for x in (-2.1, -0.7, 0.9, 2.6):
        for k in (1, 2, 3, 4):
            lo = evaluate_derivative(st_, x - h, k - 1)
            hi = evaluate_derivative(st_, x + h, k - 1)
            fd = (hi - lo) / (2 * h)
            exact = evaluate_derivative(st_, x, k)
            scale = max(abs(evaluate_derivative(st_, x, j)) for j in range(k + 1))
            assert abs(fd - exact) <= 1e-5 * scale


@pytest.mark.parametrize("a", [0.5, 2.0, 4, 24])
def test_continuity_all_low_states(a):
    spec = PotentialSpec.from_a(a)
    for n in range(13):
        st_ = eigenstate(spec, n)
        d_l = st_.derivatives(0.0, 1, LEFT)[:, 0]
        d_r = st_.derivatives(0.0, 1, RIGHT)[:, 0]
        xs = np.linspace(-7, 7, 1401)
        xs = xs[xs != 0]
        peak = np.max(np.abs(evaluate(st_, xs)))
        assert abs(d_r[0] - d_l[0]) <= 1e-10 * peak
        assert abs(d_r[1] - d_l[1]) <= 1e-10 * max(peak, np.max(np.abs(evaluate_derivative(st_, xs, 1))))
        assert boundary_report(st_).tail_decay_ok


@pytest.mark.parametrize("ell", range(1, 9))
def test_neumann_dirichlet_classification(ell):
    for n in range(ell, ell + 8):
        st_ = hermite_state(ell, n)
        d = st_.derivatives(0.0, 1, RIGHT)[:, 0]
        dl = st_.derivatives(0.0, 1, LEFT)[:, 0]
        if (n - ell) % 2 == 0:
            assert d[1] == 0.0 and dl[1] == 0.0 and d[0] != 0.0
        else:
            assert d[0] == 0.0 and dl[0] == 0.0 and d[1] != 0.0


@pytest.mark.parametrize("a", [2, 4, 8, 24])
def test_node_counts(a):
    spec = PotentialSpec.from_a(a)
    assert [count_nodes(eigenstate(spec, n)) for n in range(13)] == list(range(13))


def test_node_count_examples():
    assert count_nodes(hermite_state(1, 1)) == 1
    assert count_nodes(_a2_ground()) == 0
    assert count_nodes(hermite_state(6, 9)) == 9


@pytest.mark.parametrize("ell,n", [(1, 1), (1, 2), (2, 5), (3, 3), (4, 7)])
def test_hermite_and_hypergeometric_forms_agree(ell, n):
    spec = PotentialSpec.from_ell(ell)
    hs = hermite_state(ell, n)
    gs = general_state(spec, hs.E)
    xs = np.concatenate([np.linspace(-3.3, -0.1, 10), np.linspace(0.13, 3.1, 10)])
    a, b = evaluate(hs, xs), evaluate(gs, xs)
    keep = np.abs(a) > 1e-6 * np.max(np.abs(a))
    ratio = b[keep] / a[keep]
    assert np.max(np.abs(ratio / ratio[0] - 1)) <= 1e-8


def test_norm_examples():
    ho = PotentialSpec(1e-9)
    norm, err = norm_l2(general_state(ho, level(ho, 0).E))
    assert norm == pytest.approx(math.pi ** 0.25, rel=1e-8)
    assert err <= 1e-9
    n11, _ = norm_l2(hermite_state(1, 1))
    assert n11 > 0 and math.isfinite(n11)


def test_norm_vs_grid_eigenvector():
    # compare shapes: grid eigenvector is unit in the discrete l2 sense
    st_ = _a2_ground()
    norm, _ = norm_l2(st_)
    x, vals, vecs = grid_eigenpairs(lambda t: potential_value(PotentialSpec(2.0), t), GridConfig(levels=1))
    h = x[1] - x[0]
    grid = vecs[:, 0] / math.sqrt(h)
    exact = evaluate(st_, x) / norm
    grid *= np.sign(grid @ exact)
    assert np.max(np.abs(grid - exact)) <= 1e-3


def test_sample_rows_sentinels():
    rows = sample_rows(hermite_state(1, 2), np.linspace(-1, 1, 5), with_derivative=True)
    xs = [r[0] for r in rows]
    assert xs == [-1.0, -0.5, -0.0, 0.0, 0.5, 1.0]
    assert math.copysign(1, xs[2]) < 0 and math.copysign(1, xs[3]) > 0
    assert rows[2][1] == rows[3][1] == 0.0
    assert rows[2][2] == pytest.approx(rows[3][2], rel=1e-15)


@settings(max_examples=20)
@given(st.floats(0.1, 20.0), st.integers(0, 5))
def test_generic_states_continuous_and_decaying(a, n):
    spec = PotentialSpec(a)
    st_ = general_state(spec, level(spec, n).E, n=n)
    r = boundary_report(st_)
    assert r.value_jump <= 1e-10 and r.slope_jump <= 1e-10 * max(1.0, a)
    assert r.tail_decay_ok
    assert count_nodes(st_) == n
