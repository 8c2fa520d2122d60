import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial import hermite as nph

from disloc.errors import InvalidB, NonConvergence
from disloc.specfun import (
    DecayingBranch,
    SeriesControl,
    hermite,
    hermite_derivative,
    kummer_1f1,
    kummer_1f1_with_error,
    kummer_1f1_x_derivative,
    recip_gamma,
)


# ------------------------------------------------------------ recip_gamma

def test_recip_gamma_examples():
    assert recip_gamma(1.0) == pytest.approx(1.0, rel=1e-14)
    assert recip_gamma(-3.0) == 0.0
    assert recip_gamma(0.5) == pytest.approx(0.5641895835477563, rel=1e-15)


@pytest.mark.parametrize("k", range(0, 40))
def test_recip_gamma_exact_zeros(k):
    assert recip_gamma(-float(k)) == 0.0


def test_recip_gamma_matches_math_gamma():
    zs = np.linspace(-59.7, 60.0, 2391)
    zs = zs[np.abs(zs - np.round(zs)) > 1e-6]
    worst = 0.0
    for z in zs:
        ref = 1.0 / math.gamma(z)
        worst = max(worst, abs(recip_gamma(z) - ref) / abs(ref))
    assert worst <= 1e-12


@given(st.floats(-20.0, 20.0).filter(lambda z: abs(z - round(z)) > 1e-3))
def test_recip_gamma_recurrence(z):
    lhs = recip_gamma(z + 1.0)
    rhs = recip_gamma(z) / z
    assert abs(lhs - rhs) <= 1e-11 * abs(rhs)


# ----------------------------------------------------------------- kummer

@given(st.floats(-10, 10), st.sampled_from([0.5, 1.5, 2.25, 7.0]))
def test_kummer_at_zero(a, b):
    assert kummer_1f1(a, b, 0.0) == 1.0


@given(st.floats(0.3, 6.0), st.floats(0.0, 40.0))
def test_kummer_b_equals_a_is_exp(b, z):
    assert kummer_1f1(b, b, z) == pytest.approx(math.exp(z), rel=1e-13)


@given(st.floats(0.0, 50.0))
def test_kummer_terminating(z):
    assert kummer_1f1(-1.0, 0.5, z) == pytest.approx(1.0 - 2.0 * z, rel=1e-15, abs=1e-15)


@pytest.mark.parametrize("a", [-7.3, -2.5, -0.75, 0.4, 1.0, 3.6, 9.2])
@pytest.mark.parametrize("b", [0.5, 1.5])
@pytest.mark.parametrize("z", [0.01, 0.7, 2.25, 9.0, 25.0, 64.0])
def test_kummer_vs_mpmath(a, b, z):
    val, err = kummer_1f1_with_error(a, b, z)
    ref = float(mpmath.hyp1f1(a, b, z))
    assert abs(val - ref) <= max(10 * err, 1e-12 * abs(ref))


@given(st.floats(-8, 8), st.sampled_from([0.5, 1.5]), st.floats(0.0, 36.0))
def test_kummer_halving_tolerance_within_error(a, b, z):
    v1, e1 = kummer_1f1_with_error(a, b, z, SeriesControl(rel_tol=1e-12))
    v2, _ = kummer_1f1_with_error(a, b, z, SeriesControl(rel_tol=5e-13))
    assert abs(v1 - v2) <= e1 + 4 * np.finfo(float).eps * abs(v2)


def test_kummer_vectorized_matches_scalar():
    z = np.linspace(0, 30, 17)
    vec = kummer_1f1(-2.3, 0.5, z)
    assert np.allclose(vec, [kummer_1f1(-2.3, 0.5, float(t)) for t in z], rtol=1e-15, atol=0)


@pytest.mark.parametrize("b", [0.0, -1.0, -4.0])
def test_kummer_invalid_b(b):
    with pytest.raises(InvalidB):
        kummer_1f1(0.3, b, 1.0)


def test_kummer_nonconvergence():
    with pytest.raises(NonConvergence):
        kummer_1f1(0.3, 0.5, 60.0, SeriesControl(max_terms=10))
    with pytest.raises(NonConvergence):
        kummer_1f1(0.3, 0.5, 401.0)


def test_series_control_validation():
    with pytest.raises(ValueError):
        SeriesControl(rel_tol=0.0)
    with pytest.raises(ValueError):
        SeriesControl(max_terms=5)


def test_kummer_x_derivative_examples():
    assert kummer_1f1_x_derivative(2.7, 1.5, 0.0) == 0.0
    assert kummer_1f1_x_derivative(1.3, 1.3, 1.0) == pytest.approx(2 * math.e, rel=1e-14)
    assert kummer_1f1_x_derivative(-1.0, 0.5, 1.0) == pytest.approx(-4.0, rel=1e-15)


@given(st.floats(-5, 5), st.sampled_from([0.5, 1.5]), st.floats(0.2, 4.0))
def test_kummer_x_derivative_finite_difference(a, b, x):
    h = 1e-5
    fd = (kummer_1f1(a, b, (x + h) ** 2) - kummer_1f1(a, b, (x - h) ** 2)) / (2 * h)
    d = kummer_1f1_x_derivative(a, b, x)
    assert abs(d - fd) <= 1e-6 * max(1.0, abs(d), abs(kummer_1f1(a, b, x * x)))


# ---------------------------------------------------------------- hermite

def test_hermite_examples():
    assert hermite(0, 3.3) == 1.0
    assert hermite(1, 0.5) == 1.0
    assert hermite(2, 0.0) == -2.0
    assert hermite(12, 0.0) == 665280.0


def test_hermite_derivative_examples():
    assert hermite_derivative(0, 3.7) == 0.0
    assert hermite_derivative(1, -2.2) == 2.0
    assert hermite_derivative(3, 1.0) == 12.0


@pytest.mark.parametrize("n", range(21))
def test_hermite_vs_numpy(n):
    x = np.linspace(-8, 8, 161)
    x = x[np.abs(x) > 1e-9]
    ref = nph.hermval(x, [0] * n + [1])
    got = hermite(n, x)
    # relative to the local size of the polynomial's terms, so values near a root are fair
    size = np.polynomial.polynomial.polyval(np.abs(x), np.abs(nph.herm2poly([0] * n + [1])))
    assert np.all(np.abs(got - ref) <= 1e-12 * size)


@given(st.integers(0, 20), st.floats(-6, 6))
def test_hermite_parity_exact(n, x):
    assert hermite(n, -x) == (-1) ** n * hermite(n, x)


@given(st.integers(0, 16), st.floats(-6, 6))
def test_kummer_hermite_bridge(n, x):
    m = n // 2
    c = (-1) ** m * math.factorial(n) / math.factorial(m)
    if n % 2 == 0:
        other = c * kummer_1f1(-m, 0.5, x * x)
    else:
        other = c * 2 * x * kummer_1f1(-m, 1.5, x * x)
    h = hermite(n, x)
    assert abs(h - other) <= 1e-10 * max(abs(h), 1e-10 * abs(c) * max(1.0, abs(x)) ** n)


def test_hermite_degree_cap():
    with pytest.raises(ValueError):
        hermite(65, 1.0)


# ---------------------------------------------------------- decaying branch

@pytest.mark.parametrize("c", [-2.75, -1.6, -0.5, 0.3, 1.25, 4.4])
def test_decaying_branch_vs_hyperu(c):
    br = DecayingBranch(c)
    for x in (0.05, 0.4, 1.5, 3.0, 6.5, 12.0):
        w, dw = br(x)
        ref = float(mpmath.hyperu(c, 0.5, x * x))
        dref = float(-2 * x * c * mpmath.hyperu(c + 1, 1.5, x * x))
        assert w == pytest.approx(ref, rel=1e-12, abs=1e-300)
        assert dw == pytest.approx(dref, rel=1e-11, abs=1e-14 * abs(ref))


def test_decaying_branch_origin_values():
    c = 0.37
    w, dw = DecayingBranch(c)(0.0)
    assert w == pytest.approx(math.sqrt(math.pi) * recip_gamma(c + 0.5), rel=1e-13)
    assert dw == pytest.approx(-2 * math.sqrt(math.pi) * recip_gamma(c), rel=1e-13)
