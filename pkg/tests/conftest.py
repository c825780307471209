"""Shared fixtures and independent numerical oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.special import roots_legendre

from stratwave.groups import catalog
from stratwave.spectrum import WindowSpec


@pytest.fixture(scope="session")
def heis1():
    return catalog("heisenberg", 1)


@pytest.fixture(scope="session")
def heis2():
    return catalog("heisenberg", 2)


@pytest.fixture(scope="session")
def htype42():
    return catalog("htype", 4, 2)


@pytest.fixture(scope="session")
def htype43():
    return catalog("htype", 4, 3)


@pytest.fixture(scope="session")
def tensor11():
    return catalog("tensor_heisenberg", 1, 1)


@pytest.fixture(scope="session")
def diamond11():
    return catalog("diamond", 1, 1)


@pytest.fixture(scope="session")
def ring12():
    return WindowSpec(1.0, 2.0)


def fresnel_quad_1d(t: float, R: float, eps_values=(2e-3, 1e-3, 5e-4)) -> complex:
    """Independent oracle for int exp(i t nu^2 - i nu R) dnu.

    The raw integral is only conditionally convergent, so it is computed with
    Gaussian damping exp(-eps nu^2) on composite Gauss-Legendre panels and
    extrapolated to eps -> 0 through the three sampled values (the damped
    integral is analytic in eps).
    """
    x32, w32 = roots_legendre(32)
    vals = []
    for eps in eps_values:
        L = np.sqrt(36.0 / eps)
        total_phase = abs(t) * L * L + abs(R) * L
        panels = max(16, int(total_phase / 40.0))
        edges = np.linspace(-L, L, panels + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        halfs = 0.5 * (edges[1:] - edges[:-1])
        nu = (mids[:, None] + halfs[:, None] * x32[None, :]).ravel()
        wts = (halfs[:, None] * w32[None, :]).ravel()
        vals.append(complex(np.sum(wts * np.exp((1j * t - eps) * nu * nu - 1j * nu * R))))
    e = np.asarray(eps_values)
    coef = np.linalg.solve(np.vander(e, 3, increasing=True), np.asarray(vals))
    return complex(coef[0])


def fresnel_quad(t: float, R) -> complex:
    """k-dimensional damped-quadrature oracle (the integral factorizes)."""
    out = 1.0 + 0.0j
    for r in np.atleast_1d(np.asarray(R, dtype=float)):
        out *= fresnel_quad_1d(t, float(r))
    return out
