import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.integrate import quad
from scipy.special import roots_legendre

from stratwave.errors import OrderTooLarge, QuadratureNotConverged
from stratwave.hermite import (
    HermiteEvaluator,
    cross_wigner_table,
    hermite,
    hermite_all,
    hermite_scaled,
    radial_derivative_bound,
    wigner_g,
    wigner_g_closed,
)


def l2_rule(n_max, nodes=None):
    L = np.sqrt(2.0 * n_max + 1.0) + 8.0
    x, w = roots_legendre(nodes or (2 * n_max + 160))
    return L * x, L * w


# ---------------------------------------------------------------------------
# Hermite functions
# ---------------------------------------------------------------------------


def test_ground_state_value():
    assert hermite(0, 0.0) == pytest.approx(np.pi ** -0.25, abs=1e-15)


def test_unit_l2_norm():
    for n in (0, 10, 60):
        xi, w = l2_rule(n)
        vals = hermite(n, xi)
        assert np.sum(w * vals * vals) == pytest.approx(1.0, abs=1e-12)


def test_orthonormality_up_to_60():
    xi, w = l2_rule(60, 300)
    tab = hermite_all(60, xi)
    gram = (tab * w) @ tab.T
    assert np.max(np.abs(gram - np.eye(61))) < 1e-10


def test_ode_residual_finite_differences():
    """h_n'' - xi^2 h_n = -(2n+1) h_n, second derivative by centered stencils."""
    h = 1e-3
    for n in (0, 7, 33, 60):
        xi = np.linspace(-11.5, 11.5, 231)
        f = lambda z: hermite(n, z)
        second = (-f(xi + 2 * h) + 16 * f(xi + h) - 30 * f(xi) + 16 * f(xi - h) - f(xi - 2 * h)) / (12 * h * h)
        assert np.max(np.abs(second - xi * xi * f(xi) + (2 * n + 1) * f(xi))) < 1e-6


def test_parity():
    xi = np.linspace(0.1, 9.0, 40)
    for n in (4, 9):
        assert_allclose(hermite(n, -xi), (-1.0) ** n * hermite(n, xi), atol=1e-15)


def test_order_too_large_and_tail_safety():
    with pytest.raises(OrderTooLarge):
        hermite(201, 0.0)
    with pytest.raises(OrderTooLarge):
        hermite(10, 45.0)
    # deep-tail evaluation underflows gracefully rather than overflowing
    assert hermite(200, 30.0) == pytest.approx(0.0, abs=1e-30)
    assert np.isfinite(hermite_all(200, np.linspace(-30, 30, 101))).all()


def test_scaled_variant():
    assert hermite_scaled(0, 1.0, 0.4) == pytest.approx(hermite(0, 0.4))
    assert hermite_scaled(0, 4.0, 0.0) == pytest.approx(4.0 ** 0.25 * np.pi ** -0.25)
    for beta in (0.1, 4.0):
        for n in (0, 6):
            L = (np.sqrt(2.0 * n + 1.0) + 8.0) / np.sqrt(beta)
            x, w = roots_legendre(300)
            vals = hermite_scaled(n, beta, L * x)
            assert np.sum(L * w * vals * vals) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        hermite_scaled(1, -1.0, 0.0)


# ---------------------------------------------------------------------------
# Wigner overlaps: quadrature first, closed form second
# ---------------------------------------------------------------------------


def test_wigner_unit_at_origin():
    for n in range(0, 41, 4):
        assert wigner_g(n, 0.0, 0.0) == pytest.approx(1.0, abs=1e-10)


def test_wigner_ground_state_against_gaussian_oracle():
    """g_0(2, 0) by adaptive quadrature of the defining integral."""
    val = quad(lambda xi: hermite(0, 2.0 + xi) * hermite(0, xi), -12, 12, limit=200)[0]
    assert val == pytest.approx(np.e ** -1, abs=1e-12)
    assert wigner_g(0, 2.0, 0.0) == pytest.approx(np.e ** -1, abs=1e-12)


def test_wigner_oscillatory_against_scipy_oracle():
    """Defining integral with the Fourier factor, via scipy adaptive quadrature."""
    n, xi1, xi2 = 3, 1.3, -2.1
    re = quad(lambda xi: np.cos(xi2 * xi) * hermite(n, xi1 + xi) * hermite(n, xi), -14, 14, limit=400)[0]
    im = -quad(lambda xi: np.sin(xi2 * xi) * hermite(n, xi1 + xi) * hermite(n, xi), -14, 14, limit=400)[0]
    oracle = np.exp(-0.5j * xi1 * xi2) * (re + 1j * im)
    assert wigner_g(n, xi1, xi2) == pytest.approx(oracle, abs=1e-10)


def test_laguerre_closed_form_validated_then_used():
    # step 1: validate the closed form against the defining quadrature, n <= 5
    xs = np.linspace(-6, 6, 7)
    X1, X2 = [a.ravel() for a in np.meshgrid(xs, xs)]
    for n in range(6):
        assert np.max(np.abs(wigner_g(n, X1, X2) - wigner_g_closed(n, X1, X2))) < 1e-10
    # step 2: the validated identity holds at higher orders on the same grid
    for n in (10, 20, 40):
        assert np.max(np.abs(wigner_g(n, X1, X2) - wigner_g_closed(n, X1, X2))) < 1e-8


@settings(max_examples=25, deadline=None)
@given(
    st.integers(min_value=0, max_value=30),
    st.floats(min_value=-8, max_value=8),
    st.floats(min_value=-8, max_value=8),
)
def test_wigner_bounded_by_one(n, xi1, xi2):
    assert abs(wigner_g(n, xi1, xi2)) <= 1.0 + 1e-10


def test_wigner_conjugation_symmetry():
    xs = np.linspace(-5, 5, 6)
    X1, X2 = [a.ravel() for a in np.meshgrid(xs, xs)]
    for n in (2, 7):
        assert np.max(np.abs(wigner_g(n, X1, X2) - np.conj(wigner_g(n, X1, -X2)))) < 1e-10


def test_wigner_doubling_certificate():
    from stratwave.hermite import wigner_g_full

    for n, xi1, xi2 in ((0, 0.5, 1.0), (12, 2.0, -3.0), (40, 4.0, 5.0)):
        res = wigner_g_full(n, xi1, xi2)
        assert res.certificate < 1e-8
        assert res.value == pytest.approx(wigner_g(n, xi1, xi2), abs=1e-12)
        assert abs(res.value) <= 1 + 1e-10


def test_wigner_nonconvergence_raises():
    ev = HermiteEvaluator()
    with pytest.raises(QuadratureNotConverged):
        # an unmeetable certificate demand at an O(1)-magnitude point
        wigner_g(60, 2.0, 1.0, evaluator=ev, cert_tol=1e-30)


# ---------------------------------------------------------------------------
# radial derivative scaling
# ---------------------------------------------------------------------------


def radial_grid(n):
    rmax = np.sqrt(4.0 * n + 2.0) + 3.0
    return [(r * np.cos(a), r * np.sin(a)) for r in np.linspace(0.05, rmax, 80) for a in (0.4, 1.1)]


def test_radial_derivative_zero_at_origin():
    assert radial_derivative_bound(1, 1, [(1e-9, 1e-9)]) < 1e-6


def test_radial_derivative_matches_direct_finite_differences():
    """Cross-check the dilation-generator stencil against plain partials."""
    n, xi1, xi2, h = 4, 1.7, -0.9, 1e-5
    dg1 = (wigner_g_closed(n, xi1 + h, xi2) - wigner_g_closed(n, xi1 - h, xi2)) / (2 * h)
    dg2 = (wigner_g_closed(n, xi1, xi2 + h) - wigner_g_closed(n, xi1, xi2 - h)) / (2 * h)
    direct = abs(xi1 * dg1 + xi2 * dg2) / n
    assert radial_derivative_bound(n, 1, [(xi1, xi2)]) == pytest.approx(direct, rel=1e-5)


def test_radial_scaling_trend():
    c1 = radial_derivative_bound(1, 1, radial_grid(1))
    assert c1 > 0
    for n in (5, 10, 20, 40):
        assert radial_derivative_bound(n, 1, radial_grid(n)) <= 3.0 * c1
    c1_2 = radial_derivative_bound(1, 2, radial_grid(1))
    for n in (5, 10, 20):
        assert radial_derivative_bound(n, 2, radial_grid(n)) <= 3.0 * c1_2


# ---------------------------------------------------------------------------
# cross tables
# ---------------------------------------------------------------------------


def test_cross_wigner_diagonal_matches_wigner():
    us, vs = [0.3, -1.2], [0.8, 2.0]
    table = cross_wigner_table(6, us, vs)
    for i, u in enumerate(us):
        for j, v in enumerate(vs):
            for n in (0, 4, 6):
                assert table[i, j, n, n] == pytest.approx(wigner_g(n, u, v), abs=1e-9)


def test_cross_wigner_unitarity_columns():
    # matrix elements of a unitary operator: each column has unit norm once
    # the truncation exceeds the populated orders
    u, v = 0.6, -0.4
    table = cross_wigner_table(30, [u], [v])[0, 0]
    norms = np.sum(np.abs(table) ** 2, axis=0)
    assert_allclose(norms[:8], 1.0, atol=1e-8)
