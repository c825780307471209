"""Invariant suite behind `stratwave special --selftest`.

Each row is one verifiable property of the special-function layer with its
measured value and threshold; the CLI prints the rows as CSV.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from . import hermite as hm

__all__ = ["SelfTestRow", "run_suite"]


@dataclass(frozen=True)
class SelfTestRow:
    check: str
    detail: str
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.value < self.threshold


def _orthonormality(n_max: int = 60) -> float:
    L = np.sqrt(2.0 * n_max + 1.0) + 8.0
    x, w = roots_legendre(2 * n_max + 180)
    tab = hm.hermite_all(n_max, L * x)
    gram = (tab * (L * w)) @ tab.T
    return float(np.max(np.abs(gram - np.eye(n_max + 1))))


def _ode_residual(n: int, h: float = 1e-3) -> float:
    xi = np.linspace(-np.sqrt(2.0 * n + 1.0) - 2.0, np.sqrt(2.0 * n + 1.0) + 2.0, 201)

    def f(z):
        return hm.hermite(n, z)

    second = (-f(xi + 2 * h) + 16 * f(xi + h) - 30 * f(xi) + 16 * f(xi - h) - f(xi - 2 * h)) / (12 * h * h)
    return float(np.max(np.abs(second - xi * xi * f(xi) + (2 * n + 1) * f(xi))))


def _scaled_norm_error(n: int, beta: float) -> float:
    L = (np.sqrt(2.0 * n + 1.0) + 8.0) / np.sqrt(beta)
    x, w = roots_legendre(4 * n + 160)
    vals = hm.hermite_scaled(n, beta, L * x)
    return float(abs(np.sum(L * w * vals * vals) - 1.0))


def _wigner_unit_error(orders) -> float:
    return max(abs(hm.wigner_g(n, 0.0, 0.0) - 1.0) for n in orders)


def _laguerre_agreement(orders, extent: float = 6.0) -> float:
    xs = np.linspace(-extent, extent, 9)
    X1, X2 = [a.ravel() for a in np.meshgrid(xs, xs)]
    worst = 0.0
    for n in orders:
        q = hm.wigner_g(n, X1, X2)
        c = hm.wigner_g_closed(n, X1, X2)
        worst = max(worst, float(np.max(np.abs(q - c))))
    return worst


def _wigner_bound_excess(orders, extent: float = 8.0) -> float:
    xs = np.linspace(-extent, extent, 11)
    X1, X2 = [a.ravel() for a in np.meshgrid(xs, xs)]
    worst = 0.0
    for n in orders:
        worst = max(worst, float(np.max(np.abs(hm.wigner_g(n, X1, X2)))) - 1.0)
    return worst


def _conjugation_error(n: int = 7, extent: float = 5.0) -> float:
    xs = np.linspace(-extent, extent, 7)
    X1, X2 = [a.ravel() for a in np.meshgrid(xs, xs)]
    return float(np.max(np.abs(hm.wigner_g(n, X1, X2) - np.conj(hm.wigner_g(n, X1, -X2)))))


def _doubling_drift(n: int, xi1: float, xi2: float) -> float:
    return hm.wigner_g_full(n, xi1, xi2).certificate


def _radial_grid(n: int):
    rmax = np.sqrt(4.0 * n + 2.0) + 3.0
    radii = np.linspace(0.05, rmax, 120)
    return [(r * np.cos(0.4), r * np.sin(0.4)) for r in radii]


def run_suite() -> list[SelfTestRow]:
    rows = [
        SelfTestRow("ground_state", "h_0(0) vs pi^-1/4", abs(hm.hermite(0, 0.0) - np.pi**-0.25), 1e-14),
        SelfTestRow("orthonormality", "max |<h_m,h_n> - delta| for m,n <= 60", _orthonormality(), 1e-10),
        SelfTestRow("ode_residual", "n = 10", _ode_residual(10), 1e-6),
        SelfTestRow("ode_residual", "n = 60", _ode_residual(60), 1e-6),
        SelfTestRow("scaled_norm", "n = 0 beta = 0.1", _scaled_norm_error(0, 0.1), 1e-8),
        SelfTestRow("scaled_norm", "n = 7 beta = 4", _scaled_norm_error(7, 4.0), 1e-8),
        SelfTestRow("overlap_unit", "g_n(0,0) = 1 for n <= 40", _wigner_unit_error(range(0, 41, 5)), 1e-10),
        SelfTestRow("laguerre_identity", "quadrature vs closed form, n <= 40", _laguerre_agreement([0, 1, 2, 3, 5, 10, 20, 40]), 1e-8),
        SelfTestRow("overlap_bound", "max |g_n| - 1", _wigner_bound_excess([0, 3, 9, 25]), 1e-10),
        SelfTestRow("conjugation", "g_n(x,y) = conj g_n(x,-y)", _conjugation_error(), 1e-10),
        SelfTestRow("doubling_certificate", "n = 40 at (3, 4)", _doubling_drift(40, 3.0, 4.0), 1e-8),
    ]
    c1 = hm.radial_derivative_bound(1, 1, _radial_grid(1))
    for n in (5, 10, 20, 40):
        ratio = hm.radial_derivative_bound(n, 1, _radial_grid(n)) / c1
        rows.append(SelfTestRow("radial_scaling", f"n = {n} vs n = 1 constant", ratio, 3.0))
    return rows
