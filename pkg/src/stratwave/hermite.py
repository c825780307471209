"""Hermite functions, their scaled variants, and Wigner-type overlap integrals.

The Hermite functions used here are the L2(R)-normalized eigenfunctions of
the quantum harmonic oscillator,

    h_n'' - xi^2 h_n = -(2n + 1) h_n,   ||h_n||_2 = 1,

evaluated by the normalized three-term recurrence

    h_{n+1} = sqrt(2/(n+1)) xi h_n - sqrt(n/(n+1)) h_{n-1}

run directly on function values (Gaussian prefactor folded in), which is
stable in the oscillatory region and underflows gracefully in the tail.

The overlap integral

    g_n(a, b) = exp(-i a b / 2) * int exp(-i b xi) h_n(a + xi) h_n(xi) dxi

is evaluated by Gauss-Legendre quadrature on [-L, L] with L beyond the
classical turning point, with an always-on node-doubling certificate.  A
Laguerre closed form is provided as an accelerator; tests validate it
against the quadrature before anything else relies on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import eval_laguerre, roots_legendre

from .errors import OrderTooLarge, QuadratureNotConverged

__all__ = [
    "HermiteEvaluator",
    "WignerValue",
    "hermite",
    "hermite_all",
    "hermite_scaled",
    "wigner_g",
    "wigner_g_full",
    "wigner_g_closed",
    "cross_wigner_table",
    "radial_derivative_bound",
]

DEFAULT_N_MAX = 200
_XI_SAFE = 40.0  # |xi| beyond this the recurrence input is identically zero anyway
WIGNER_CERT_TOL = 1e-8


def hermite_all(n_max: int, xi) -> np.ndarray:
    """Table of h_0 .. h_{n_max} at the points xi, shape (n_max+1, len(xi))."""
    if n_max < 0 or n_max > DEFAULT_N_MAX:
        raise OrderTooLarge(f"order {n_max} outside [0, {DEFAULT_N_MAX}]")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(np.abs(xi) > _XI_SAFE):
        raise OrderTooLarge(f"|xi| beyond the overflow-safe bound {_XI_SAFE}")
    out = np.empty((n_max + 1, xi.size))
    out[0] = np.pi ** (-0.25) * np.exp(-0.5 * xi * xi)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * xi * out[0]
    for n in range(1, n_max):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * xi * out[n] - np.sqrt(n / (n + 1.0)) * out[n - 1]
    return out


def hermite(n: int, xi):
    """Normalized Hermite function h_n(xi); xi may be a scalar or array."""
    scalar = np.isscalar(xi)
    values = hermite_all(n, xi)[n]
    return float(values[0]) if scalar else values


def hermite_scaled(n: int, beta: float, xi):
    """h_{n,beta}(xi) = beta^{1/4} h_n(beta^{1/2} xi); unit L2 norm for any beta > 0."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return beta**0.25 * hermite(n, np.sqrt(beta) * np.asarray(xi, dtype=float))


class HermiteEvaluator:
    """Cached-rule evaluator for repeated Hermite/Wigner work up to n_max."""

    def __init__(self, n_max: int = DEFAULT_N_MAX):
        if n_max < 0 or n_max > DEFAULT_N_MAX:
            raise OrderTooLarge(f"n_max {n_max} outside [0, {DEFAULT_N_MAX}]")
        self.n_max = n_max
        self._rules: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def rule(self, nodes: int) -> tuple[np.ndarray, np.ndarray]:
        if nodes not in self._rules:
            self._rules[nodes] = roots_legendre(nodes)
        return self._rules[nodes]

    def hermite(self, n, xi):
        if n > self.n_max:
            raise OrderTooLarge(f"order {n} above evaluator n_max {self.n_max}")
        return hermite(n, xi)

    def wigner(self, n, xi1, xi2):
        return wigner_g(n, xi1, xi2, evaluator=self)


_DEFAULT_EVALUATOR = HermiteEvaluator()


def _wigner_nodes(n: int, xi1: float, xi2: float) -> tuple[float, int]:
    # half-interval length and node count resolving both the Hermite
    # oscillation (product wavenumber up to 2 sqrt(2n+1)) and the Fourier factor
    L = np.sqrt(2.0 * n + 1.0) + 8.0
    phase = L * (2.0 * np.sqrt(2.0 * n + 1.0) + abs(xi2)) + abs(xi1)
    return L, int(np.ceil(0.62 * phase)) + 48


def _wigner_quad(n: int, xi1, xi2, nodes: int, L: float, evaluator: HermiteEvaluator):
    x, w = evaluator.rule(nodes)
    xi = L * x
    hn = hermite_all(n, xi)[n]
    xi1 = np.atleast_1d(np.asarray(xi1, dtype=float))
    xi2 = np.atleast_1d(np.asarray(xi2, dtype=float))
    # shifted factor per evaluation point: (npts, nodes)
    hn_shift = hermite_all(n, (xi1[:, None] + xi[None, :]).ravel())[n].reshape(xi1.size, xi.size)
    kernel = np.exp(-1j * xi2[:, None] * xi[None, :])
    integral = (L * w[None, :] * hn[None, :] * hn_shift * kernel).sum(axis=1)
    return np.exp(-0.5j * xi1 * xi2) * integral


@dataclass(frozen=True)
class WignerValue:
    """One overlap sample with its node-doubling certificate; |value| <= 1."""

    n: int
    xi1: float
    xi2: float
    value: complex
    certificate: float


def wigner_g(n: int, xi1, xi2, evaluator: HermiteEvaluator | None = None, cert_tol: float = WIGNER_CERT_TOL):
    """Oscillatory Hermite overlap g_n(xi1, xi2), |g_n| <= 1.

    Gauss-Legendre on [-L, L], node count scaled to n and |xi2|; the value is
    accepted only if doubling the node count moves it by less than cert_tol.
    """
    ev = evaluator or _DEFAULT_EVALUATOR
    if n > ev.n_max:
        raise OrderTooLarge(f"order {n} above evaluator n_max {ev.n_max}")
    scalar = np.isscalar(xi1) and np.isscalar(xi2)
    xi1 = np.atleast_1d(np.asarray(xi1, dtype=float))
    xi2 = np.atleast_1d(np.asarray(xi2, dtype=float))
    if xi1.shape != xi2.shape:
        xi1, xi2 = np.broadcast_arrays(xi1, xi2)
        xi1, xi2 = xi1.ravel(), xi2.ravel()
    L, nodes = _wigner_nodes(n, float(np.max(np.abs(xi1))), float(np.max(np.abs(xi2))))
    coarse = _wigner_quad(n, xi1, xi2, nodes, L, ev)
    fine = _wigner_quad(n, xi1, xi2, 2 * nodes, L, ev)
    drift = float(np.max(np.abs(fine - coarse)))
    if drift > cert_tol:
        raise QuadratureNotConverged(f"wigner_g(n={n}): node doubling moved the value by {drift:.3e}")
    return complex(fine[0]) if scalar else fine


def wigner_g_full(n: int, xi1: float, xi2: float, evaluator: HermiteEvaluator | None = None) -> WignerValue:
    """Like wigner_g for one point, returning the certificate with the value."""
    ev = evaluator or _DEFAULT_EVALUATOR
    if n > ev.n_max:
        raise OrderTooLarge(f"order {n} above evaluator n_max {ev.n_max}")
    L, nodes = _wigner_nodes(n, xi1, xi2)
    coarse = _wigner_quad(n, xi1, xi2, nodes, L, ev)[0]
    fine = _wigner_quad(n, xi1, xi2, 2 * nodes, L, ev)[0]
    return WignerValue(n=n, xi1=float(xi1), xi2=float(xi2), value=complex(fine), certificate=float(abs(fine - coarse)))


def wigner_g_closed(n: int, xi1, xi2):
    """Laguerre closed form L_n(r^2/2) exp(-r^2/4), r^2 = xi1^2 + xi2^2.

    Validated against wigner_g by the test suite; used as a fast path where
    many evaluations are needed.
    """
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    r2 = xi1 * xi1 + xi2 * xi2
    return eval_laguerre(n, 0.5 * r2) * np.exp(-0.25 * r2)


def cross_wigner_table(n_max: int, u, v, evaluator: HermiteEvaluator | None = None) -> np.ndarray:
    """Overlap tables T[i, j, a, b] = exp(-i u_i v_j / 2) int exp(-i v_j xi) h_b(u_i + xi) h_a(xi) dxi.

    The diagonal a = b = n reproduces wigner_g(n, u_i, v_j).  Used by the
    representation-theoretic layer, where all orders up to a truncation are
    needed on a (u, v) product grid.
    """
    ev = evaluator or _DEFAULT_EVALUATOR
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    L = np.sqrt(2.0 * n_max + 1.0) + 8.0
    phase = L * (2.0 * np.sqrt(2.0 * n_max + 1.0) + float(np.max(np.abs(v), initial=0.0)))
    nodes = int(np.ceil(0.62 * phase)) + 48
    x, w = ev.rule(nodes)
    xi = L * x
    base = hermite_all(n_max, xi)  # (N, nodes)
    shifted = hermite_all(n_max, (u[:, None] + xi[None, :]).ravel()).reshape(n_max + 1, u.size, xi.size)
    kernel = np.exp(-1j * v[:, None] * xi[None, :]) * (L * w)[None, :]  # (nv, nodes)
    # T[i, j, a, b] = sum_q base[a, q] kernel[j, q] shifted[b, i, q]
    table = np.einsum("aq,jq,biq->ijab", base, kernel, shifted, optimize=True)
    table *= np.exp(-0.5j * u[:, None] * v[None, :])[:, :, None, None]
    return table


def radial_derivative_bound(n: int, k: int, grid, step: float = 1e-4) -> float:
    """sup over the grid of |(xi1 d1 + xi2 d2)^k g_n| / n^k.

    The radial operator is the dilation generator, so the k-th power is the
    k-th derivative of s -> g_n(e^s xi1, e^s xi2) at s = 0, taken by centered
    differences.  The Laguerre fast path keeps the difference quotients at
    machine-noise level (the defining quadrature carries a 1e-8 certificate,
    too coarse to divide by step^2).
    """
    if k not in (1, 2):
        raise ValueError("only first and second radial derivatives are supported")
    pts = np.atleast_2d(np.asarray(grid, dtype=float))
    xi1, xi2 = pts[:, 0], pts[:, 1]

    def at_scale(s):
        return wigner_g_closed(n, np.exp(s) * xi1, np.exp(s) * xi2)

    if k == 1:
        deriv = (at_scale(step) - at_scale(-step)) / (2.0 * step)
    else:
        deriv = (at_scale(step) - 2.0 * at_scale(0.0) + at_scale(-step)) / (step * step)
    return float(np.max(np.abs(deriv))) / float(max(n, 1)) ** k
