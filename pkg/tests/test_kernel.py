import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import fresnel_quad
from stratwave.errors import FrameUnavailable, ZeroTime
from stratwave.groups import catalog
from stratwave.kernel import (
    KernelRequest,
    amplitude_G,
    fresnel_factor,
    kernel,
    ktilde,
    series_tail_bound,
    series_uniform_bound,
)
from stratwave.quadrature import monte_carlo_check
from stratwave.spectrum import WindowSpec, window


W = WindowSpec(1.0, 2.0)


# ---------------------------------------------------------------------------
# closed-form dispersive factor
# ---------------------------------------------------------------------------


def test_fresnel_empty_product():
    assert fresnel_factor(3.0, [], k=0) == 1.0 + 0.0j


def test_fresnel_k1_closed_form():
    assert fresnel_factor(1.0, [0.0], k=1) == pytest.approx(np.sqrt(np.pi) * np.exp(1j * np.pi / 4))


def test_fresnel_k2_closed_form():
    expected = (1j * np.pi / 4.0) * np.exp(-1j / 4.0)
    assert fresnel_factor(4.0, [2.0, 0.0], k=2) == pytest.approx(expected, abs=1e-14)


def test_fresnel_negative_time_conjugates():
    v = fresnel_factor(4.0, [2.0, 0.0], k=2)
    assert fresnel_factor(-4.0, [2.0, 0.0], k=2) == pytest.approx(np.conj(v), abs=1e-14)


def test_fresnel_zero_time():
    with pytest.raises(ZeroTime):
        fresnel_factor(0.0, [1.0])


@pytest.mark.parametrize("t", [1.0, 10.0])
@pytest.mark.parametrize("R", [[0.0], [2.5], [-4.0], [1.0, 2.0], [3.0, -2.5]])
def test_fresnel_against_damped_quadrature_oracle(t, R):
    """Independent nu-quadrature (Gaussian damping, extrapolated) vs closed form."""
    assert fresnel_factor(t, R) == pytest.approx(fresnel_quad(t, R), abs=1e-6)


# ---------------------------------------------------------------------------
# series amplitude
# ---------------------------------------------------------------------------


def test_amplitude_center_is_window_product(heis1):
    eta_vals = np.array([[1.5]])
    assert amplitude_G(heis1, W, [0], 0.0, 0.0, eta_vals) == pytest.approx(1.0)
    eta_edge = np.array([[2.5]])
    assert amplitude_G(heis1, W, [0], 0.0, 0.0, eta_edge) == 0.0


def test_amplitude_ground_state_exponential(heis1):
    eta0 = 1.5
    val = amplitude_G(heis1, W, [0], [2.0 / np.sqrt(eta0)], [0.0], np.array([[eta0]]))
    assert val == pytest.approx(np.exp(-1.0))


def test_amplitude_vanishes_off_window(htype42):
    # one factor off the ring kills the product: (2*3+1)*eta = 7 eta > b for eta on plateau
    eta_vals = np.array([[1.5], [1.5]])
    assert amplitude_G(htype42, W, [0, 3], 0.0, 0.0, eta_vals) == 0.0


def test_amplitude_bounded_by_one(tensor11):
    rng = np.random.default_rng(0)
    for _ in range(50):
        eta_vals = rng.uniform(0.2, 3.0, size=(2, 1))
        P = rng.normal(size=2)
        Q = rng.normal(size=2)
        alpha = rng.integers(0, 5, size=2)
        assert abs(amplitude_G(tensor11, W, alpha, P, Q, eta_vals)) <= 1.0 + 1e-12


# ---------------------------------------------------------------------------
# the reduced kernel series
# ---------------------------------------------------------------------------


def test_ktilde_zero_phase_term_is_time_independent(heis1):
    """At Z = 4 the ground term's phase vanishes identically on lam > 0, so
    the large-t limit equals the plain ring integral of the amplitude."""
    vals = {}
    for t in (50.0, 500.0):
        req = KernelRequest(spec=heis1, window=W, t=t, x=heis1.element(Z=[4.0]), m_max=5)
        vals[t] = ktilde(req).value
    from scipy.integrate import quad

    stationary = quad(lambda lam: float(window(W, 4 * lam)) * 4 * lam, 0.25, 0.5, limit=200)[0]
    assert vals[500.0] == pytest.approx(stationary, abs=2e-3)
    assert abs(vals[50.0] - vals[500.0]) < 2e-2


def test_ktilde_truncation_consistency(heis1, diamond11):
    """Raising m_max by 5 moves the value by less than the reported tail."""
    for spec, Z in ((heis1, [3.5]), (diamond11, [4.2])):
        r1 = ktilde(KernelRequest(spec=spec, window=W, t=9.0, x=spec.element(Z=Z), m_max=4))
        r2 = ktilde(KernelRequest(spec=spec, window=W, t=9.0, x=spec.element(Z=Z), m_max=9))
        assert abs(r1.value - r2.value) <= r1.series_tail_bound


def test_ktilde_uniform_bound(heis1):
    bound = series_uniform_bound(heis1, W, 6)
    for t in (1.0, 20.0, 400.0):
        for Z in (0.0, 2.0, 4.0, 8.0):
            kv = ktilde(KernelRequest(spec=heis1, window=W, t=t, x=heis1.element(Z=[Z]), m_max=6))
            assert abs(kv.value) <= bound


def test_tail_bound_decreases_with_m_max(htype42):
    tails = [series_tail_bound(htype42, W, m) for m in (2, 6, 12, 20)]
    assert all(b > 0 for b in tails)
    assert all(b < a for a, b in zip(tails, tails[1:]))


def test_kernel_modulus_factorization(diamond11):
    req = KernelRequest(spec=diamond11, window=W, t=10.0, x=diamond11.element(Z=[4.0], R=[3.0]), m_max=5)
    full = kernel(req)
    reduced = ktilde(req)
    assert abs(full.value) == pytest.approx((np.pi / 10.0) ** 0.5 * abs(reduced.value), rel=1e-12)
    assert full.fresnel_modulus == pytest.approx((np.pi / 10.0) ** 0.5)


def test_kernel_modulus_independent_of_R(diamond11):
    mods = []
    for R in (0.0, 1.7, -3.2):
        req = KernelRequest(spec=diamond11, window=W, t=10.0, x=diamond11.element(Z=[4.0], R=[R]), m_max=5)
        mods.append(abs(kernel(req).value))
    assert mods[0] == pytest.approx(mods[1], rel=1e-12)
    assert mods[0] == pytest.approx(mods[2], rel=1e-12)


def test_diamond_kernel_pure_dispersive_decay(diamond11):
    """At the stationary Z the reduced kernel is t-independent, so the full
    kernel modulus scales exactly like the radical factor t^{-1/2}."""
    scaled = []
    for t in (10.0, 40.0, 160.0):
        req = KernelRequest(spec=diamond11, window=W, t=t, x=diamond11.element(Z=[4.0]), m_max=6)
        scaled.append(abs(kernel(req).value) * np.sqrt(t))
    assert max(scaled) / min(scaled) < 1.01


def test_center_only_rejects_off_center(diamond11):
    with pytest.raises(FrameUnavailable):
        KernelRequest(spec=diamond11, window=W, t=1.0, x=diamond11.element(P=[0.5], Z=[1.0]))


def test_zero_time_rejected(heis1):
    with pytest.raises(ZeroTime):
        KernelRequest(spec=heis1, window=W, t=0.0, x=heis1.element())


def test_offcenter_kernel_heisenberg(heis1):
    """P, Q != 0 evaluation on an explicit-frame group: bounded and
    continuous in (P, Q), reducing to the center value at P = Q = 0."""
    base = ktilde(KernelRequest(spec=heis1, window=W, t=4.0, x=heis1.element(Z=[4.0]), m_max=4))
    small = ktilde(
        KernelRequest(spec=heis1, window=W, t=4.0, x=heis1.element(P=[1e-5], Q=[-1e-5], Z=[4.0]), m_max=4)
    )
    far = ktilde(KernelRequest(spec=heis1, window=W, t=4.0, x=heis1.element(P=[6.0], Q=[0.0], Z=[4.0]), m_max=4))
    assert small.value == pytest.approx(base.value, abs=1e-6)
    assert abs(far.value) < abs(base.value)


@pytest.mark.parametrize(
    "kind,params,Z,t,tol",
    [
        # generic rings are sampled-and-inflated, which puts window edges in
        # the domain interior and slows Gauss convergence; the terms still
        # certify comfortably at 1e-7 without escalation
        ("heisenberg", (1,), [3.6], 7.0, 1e-7),
        ("htype", (4, 2), [1.7, 0.9], 5.0, 1e-7),
        ("htype", (4, 3), [1.2, 0.4, -0.8], 2.0, 1e-6),
    ],
)
def test_generic_spec_matches_catalog_kernel(kind, params, Z, t, tol):
    """A spec rebuilt from its serialized structure tensor (numeric spectra,
    sampled ring bounds) reproduces the catalog kernel at the center."""
    from stratwave.groups import spec_from_json, spec_to_json
    from stratwave.spectrum import alpha_support

    cat = catalog(kind, *params)
    gen = spec_from_json(spec_to_json(cat))
    assert gen.blocks is None
    for m in (0, 2):
        sc, sg = alpha_support(cat, W, m), alpha_support(gen, W, m)
        assert [term.alpha for term in sg.terms] == [term.alpha for term in sc.terms]
        for tc, tg in zip(sc.terms, sg.terms):
            lo_c = min(r[0] for r in tc.block_rings)
            hi_c = max(r[1] for r in tc.block_rings)
            lo_g, hi_g = tg.block_rings[0]
            assert lo_g <= lo_c + 1e-12 and hi_g >= hi_c - 1e-12
    kv_cat = ktilde(KernelRequest(spec=cat, window=W, t=t, x=cat.element(Z=Z), m_max=3, tol=tol))
    kv_gen = ktilde(KernelRequest(spec=gen, window=W, t=t, x=gen.element(Z=Z), m_max=3, tol=tol))
    assert abs(kv_cat.value - kv_gen.value) < 100 * tol


def test_generic_decomposable_rejected(tensor11):
    """Generic specs whose eta degenerates on the sphere cannot carry the
    per-pair ring bounds and are rejected with a clear error."""
    from stratwave.errors import DegenerateLambda
    from stratwave.groups import spec_from_json, spec_to_json
    from stratwave.spectrum import alpha_support

    gen = spec_from_json(spec_to_json(tensor11))
    with pytest.raises(DegenerateLambda):
        alpha_support(gen, W, 0)


def test_montecarlo_agreement_on_kernel_integrand(heis1):
    """m = 0 kernel integrand at t = 1: quadrature vs Monte Carlo."""
    from stratwave.kernel import _term_integral
    from stratwave.quadrature import integrate
    from stratwave.spectrum import alpha_support

    term = alpha_support(heis1, W, 0).terms[0]
    I = _term_integral(heis1, W, term, 0, heis1.element(Z=[3.0]), np.array([3.0]), 1.0)
    res = integrate(I)
    mc = monte_carlo_check(I, samples=400000, seed=5)
    assert abs(mc.value - res.value) <= 3 * mc.stderr
