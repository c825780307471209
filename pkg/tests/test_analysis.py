import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from stratwave.errors import NotLinear
from stratwave.analysis import (
    assumption_check,
    decay_scan,
    fit_loglog_slope,
    hessian_rank,
    nondispersion_witness,
    optimality_witness,
    stationary_z_grid,
    theoretical_decay_slope,
)
from stratwave.groups import catalog
from stratwave.spectrum import WindowSpec, window, zeta_gradient


W = WindowSpec(1.0, 2.0)


# ---------------------------------------------------------------------------
# Hessian ranks
# ---------------------------------------------------------------------------


def test_hessian_rank_heisenberg_vacuous(heis1):
    entry = hessian_rank(heis1, [0], [0.8])
    assert entry.rank_ok
    assert entry.euler_residual < 1e-6


def test_hessian_rank_htype_pattern(htype43):
    """Hessian of 2|lam| has singular values (2/|lam|, 2/|lam|, 0)."""
    lam = np.array([0.3, -0.4, 1.2])
    entry = hessian_rank(htype43, [0, 0], lam)
    expected = 2.0 / np.linalg.norm(lam)
    assert entry.singular_values[0] == pytest.approx(expected, rel=1e-5)
    assert entry.singular_values[1] == pytest.approx(expected, rel=1e-5)
    assert entry.singular_values[2] / entry.singular_values[0] < 1e-6
    assert entry.rank_ok
    assert entry.euler_residual < 1e-6


def test_hessian_rank_tensor_fails(tensor11):
    entry = hessian_rank(tensor11, [0, 0], [0.5, 0.8])
    assert not entry.rank_ok  # identically vanishing Hessian: rank 0 != p - 1


def test_rank_verdict_scale_invariant(htype43):
    lam = np.array([0.5, 0.5, -0.7])
    for s in (0.2, 1.0, 30.0):
        entry = hessian_rank(htype43, [2, 1], s * lam)
        assert entry.rank_ok
        assert entry.euler_residual < 1e-6


@pytest.mark.parametrize(
    "kind,params,expected",
    [
        ("heisenberg", (1,), True),
        ("heisenberg", (2,), True),
        ("heisenberg", (3,), True),
        ("htype", (4, 2), True),
        ("htype", (4, 3), True),
        ("tensor_heisenberg", (1, 1), False),
        ("diamond", (1, 1), True),
    ],
)
def test_assumption_check_verdicts(kind, params, expected):
    report = assumption_check(catalog(kind, *params), sample_count=8, seed=3)
    assert report.verdict is expected
    assert report.max_euler_residual < 1e-6
    assert len(report.entries) > 0


def test_assumption_check_deterministic(htype42):
    a = assumption_check(htype42, sample_count=5, seed=11)
    b = assumption_check(htype42, sample_count=5, seed=11)
    assert a.entries == b.entries


# ---------------------------------------------------------------------------
# slope fitting and grids
# ---------------------------------------------------------------------------


def test_fit_loglog_slope_recovers_power_law():
    ts = np.geomspace(10, 1000, 9)
    slope, ci = fit_loglog_slope(ts, 3.7 * ts ** -0.5)
    assert slope == pytest.approx(-0.5, abs=1e-12)
    assert ci < 1e-10


def test_theoretical_slopes():
    assert theoretical_decay_slope(catalog("htype", 4, 2)) == -0.5
    assert theoretical_decay_slope(catalog("htype", 4, 3)) == -1.0
    assert theoretical_decay_slope(catalog("diamond", 1, 1)) == -0.5
    assert theoretical_decay_slope(catalog("tensor_heisenberg", 1, 1)) == 0.0
    assert theoretical_decay_slope(catalog("heisenberg", 3)) == 0.0


def test_stationary_z_grid_contains_gradient(htype42):
    zs = stationary_z_grid(htype42, W)
    grad = zeta_gradient(htype42, [0, 0], np.array([1.0, 0.0]))
    assert any(np.allclose(z, grad) for z in zs)


# ---------------------------------------------------------------------------
# witnesses
# ---------------------------------------------------------------------------


def test_nondispersion_heisenberg_matches_oracle(heis1):
    """Value equals int g(lam) (4 lam)^d dlam on lam > 0, via adaptive
    quadrature, and is exactly t-independent."""
    res = nondispersion_witness(heis1, W, [1.0, 10.0, 100.0])
    oracle = quad(lambda lam: float(window(W, 4 * lam)) * 4 * lam, 0.25, 0.5, limit=200)[0]
    assert res.values[0] == pytest.approx(oracle, abs=1e-10)
    assert_allclose(res.moduli, res.moduli[0], rtol=1e-9)
    assert res.classification == "constant"
    assert np.allclose(res.meta["z0"], [4.0])


def test_nondispersion_tensor_product(tensor11):
    res = nondispersion_witness(tensor11, W, [1.0, 10.0, 100.0])
    assert np.allclose(res.meta["z0"], [4.0, 4.0])
    spread = max(abs(m - res.moduli[0]) / res.moduli[0] for m in res.moduli)
    assert spread < 1e-9
    assert res.moduli[0] > 0
    # separable zero-phase integral: product of two 1-D bump integrals
    one_d = quad(lambda lam: float(window(W, 4 * lam)) * 4 * lam, 0.25, 0.5, limit=200)[0]
    assert res.values[0] == pytest.approx(one_d**2, rel=1e-9)


def test_nondispersion_rejects_nonlinear(htype42):
    with pytest.raises(NotLinear):
        nondispersion_witness(htype42, W, [1.0])


def test_optimality_constant_on_heisenberg(heis1):
    """Phase lam Z* - zeta_0(lam) vanishes identically: flat witness."""
    res = optimality_witness(heis1, [5.0, 50.0, 500.0])
    assert res.classification == "constant"
    assert np.allclose(res.meta["z_star"], [4.0])
    assert res.moduli[0] == pytest.approx(res.moduli[-1], rel=1e-9)


def test_optimality_empty_bump_is_zero(htype42):
    """g identically zero (radius collapses the support) gives 0."""
    from stratwave.analysis import _smooth_ball_bump

    g = _smooth_ball_bump(np.array([1.0, 0.0]), 0.3)
    pts = np.array([[2.0, 1.4], [0.0, 0.0]])
    assert_allclose(g(pts), [0.0, 0.0])


def test_optimality_slope_htype42_short(htype42):
    """Stationary-phase rate -(p-1)/2 = -1/2 on a reduced time grid."""
    ts = np.geomspace(40, 400, 6)
    res = optimality_witness(htype42, ts)
    assert res.exponent == pytest.approx(-0.5, abs=0.08)


# ---------------------------------------------------------------------------
# decay scan plumbing (full-rate scans live in the acceptance suite)
# ---------------------------------------------------------------------------


def test_decay_scan_diamond_quick(diamond11):
    ts = np.geomspace(10, 80, 6)
    rep = decay_scan(diamond11, W, ts, m_max=3)
    assert rep.verdict
    assert rep.slope == pytest.approx(-0.5, abs=0.05)
    assert len(rep.rows) == 6 * len(stationary_z_grid(diamond11, W))
    assert rep.dropped == ()


def test_decay_scan_parallel_matches_serial(diamond11):
    ts = np.geomspace(10, 40, 6)
    a = decay_scan(diamond11, W, ts, m_max=2, jobs=1)
    b = decay_scan(diamond11, W, ts, m_max=2, jobs=4)
    assert a.slope == b.slope
    assert a.sup_modulus == b.sup_modulus


def test_decay_scan_needs_enough_points(diamond11):
    from stratwave.errors import DegenerateLambda

    with pytest.raises(DegenerateLambda):
        decay_scan(diamond11, W, np.geomspace(10, 30, 3), m_max=2)


def test_upper_envelope_bounded(diamond11):
    """sup |kernel| stays under one fitted constant times the predicted
    envelope 1 / (t^{k/2} (1 + t^{(p-1)/2})) across the sampled times."""
    ts = np.geomspace(8, 120, 7)
    rep = decay_scan(diamond11, W, ts, m_max=4, slope_margin=0.2)
    envelope = np.asarray(rep.t_kept) ** (0.5 * diamond11.k) * (
        1.0 + np.asarray(rep.t_kept) ** (0.5 * (diamond11.p - 1))
    )
    scaled = np.asarray(rep.sup_modulus) * envelope
    # bounded above and below: a single constant C works with margin
    assert scaled.max() / scaled.min() < 3.0
