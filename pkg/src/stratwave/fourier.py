"""Desk-scale group Fourier transform on the 3-dimensional Heisenberg group.

This is the end-to-end oracle for the representation-theoretic layer: the
operator-valued transform, the Plancherel identity, and the inversion
formula, all realized concretely on the smallest group where every formula
is nontrivial (n = 3, one eta-pair, no radical).

Coordinates are (P, Q, Z) with left-invariant fields
V_P = d/dP - 2 Q d/dZ and V_Q = d/dQ + 2 P d/dZ, so [V_P, V_Q] = 4 d/dZ and
eta(lam) = 4 |lam|.  The irreducible representation at frequency lam acts on
L2(R) by

    (u ^lam_X phi)(xi) = exp(-i lam Z - i eta (xi + P/2) Q) phi(P + xi),

where (P, Q) are the canonical pair coordinates at lam (the fixed pair,
swapped on the negative component).  Matrix elements in the scaled Hermite
basis reduce to cross Wigner overlaps, which is how they are computed.

The Plancherel/inversion constant is calibrated, not assumed: the testable
content is that one constant works for every test function and that the
Plancherel and inversion calibrations agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .errors import QuadratureNotConverged
from .groups import GroupElement, catalog
from .hermite import cross_wigner_table

__all__ = [
    "FourierGrid",
    "FourierData",
    "rep_matrix_element",
    "forward",
    "inverse_at",
    "plancherel_kappa",
    "heisenberg_sublaplacian",
    "diagonalization_residual",
]

H1 = catalog("heisenberg", 1)


@dataclass(frozen=True)
class FourierGrid:
    """Discretization: lam ring (both signs), Hermite truncation, spatial box.

    The box is anisotropic: test functions are taken elongated in the central
    direction so that their frequency content sits inside the lam ring, which
    needs a wider Z range than the pair directions.
    """

    lam_min: float = 0.01
    lam_max: float = 2.5
    lam_nodes: int = 40
    n_hermite: int = 16
    box: float = 6.5
    spatial_nodes: int = 72
    box_z: float = 11.0
    spatial_nodes_z: int = 64

    def lam_rule(self) -> tuple[np.ndarray, np.ndarray]:
        x, w = roots_legendre(self.lam_nodes)
        half = 0.5 * (self.lam_max - self.lam_min)
        pos = self.lam_min + half * (x + 1.0)
        wts = half * w
        lams = np.concatenate([-pos[::-1], pos])
        weights = np.concatenate([wts[::-1], wts])
        return lams, weights

    def spatial_rule(self) -> tuple[np.ndarray, np.ndarray]:
        x, w = roots_legendre(self.spatial_nodes)
        return self.box * x, self.box * w

    def z_rule(self) -> tuple[np.ndarray, np.ndarray]:
        x, w = roots_legendre(self.spatial_nodes_z)
        return self.box_z * x, self.box_z * w


@dataclass(frozen=True)
class FourierData:
    """Transform samples: M[l] is the n x n matrix of F(f)(lam_l)."""

    grid: FourierGrid
    lams: np.ndarray
    lam_weights: np.ndarray
    matrices: np.ndarray  # (n_lam, N, N) complex

    def hs_norms_sq(self) -> np.ndarray:
        return np.sum(np.abs(self.matrices) ** 2, axis=(1, 2))


def _frame_uv(lam: float, P: float, Q: float) -> tuple[float, float]:
    """Canonical pair coordinates scaled by sqrt(eta); swap on lam < 0."""
    eta = 4.0 * abs(lam)
    s = np.sqrt(eta)
    return (s * P, s * Q) if lam > 0 else (s * Q, s * P)


def rep_matrix_element(lam: float, x: GroupElement, alpha: int, beta: int, n_max: int | None = None) -> complex:
    """(u^lam_X h_{beta,eta} | h_{alpha,eta}) via the scaled overlap integral."""
    if lam == 0.0:
        raise QuadratureNotConverged("matrix elements live on the generic set lam != 0")
    n = max(alpha, beta) if n_max is None else n_max
    u, v = _frame_uv(lam, float(x.P[0]), float(x.Q[0]))
    table = cross_wigner_table(n, [u], [v])
    return complex(np.exp(-1j * lam * float(x.Z[0])) * table[0, 0, alpha, beta])


def forward(f, grid: FourierGrid | None = None) -> FourierData:
    """F(f)(lam) = int f(x) u^lam_X dmu(x), tensor quadrature over (P, Q, Z).

    f is a vectorized callable f(P, Q, Z).  The Z integral is performed
    first; the (P, Q) integral contracts against cross Wigner tables, one per
    lam node.
    """
    grid = grid or FourierGrid()
    lams, lam_w = grid.lam_rule()
    s_nodes, s_w = grid.spatial_rule()
    z_nodes, z_w = grid.z_rule()
    N = grid.n_hermite

    Pm, Qm, Zm = np.meshgrid(s_nodes, s_nodes, z_nodes, indexing="ij")
    values = np.asarray(f(Pm, Qm, Zm))
    # f_hat[iP, iQ, l] = sum_z w_z f(P, Q, Z_z) exp(-i lam_l Z_z)
    zkernel = np.exp(-1j * np.outer(z_nodes, lams)) * z_w[:, None]
    f_hat = np.tensordot(values, zkernel, axes=([2], [0]))

    matrices = np.empty((lams.size, N, N), dtype=complex)
    for l, lam in enumerate(lams):
        eta = 4.0 * abs(lam)
        su = np.sqrt(eta) * s_nodes
        table = cross_wigner_table(N - 1, su, su)  # (nP, nQ, N, N)
        fh = f_hat[:, :, l] if lam > 0 else f_hat[:, :, l].T
        weighted = fh * np.outer(s_w, s_w)
        matrices[l] = np.einsum("ij,ijab->ab", weighted, table, optimize=True)
    return FourierData(grid=grid, lams=lams, lam_weights=lam_w, matrices=matrices)


def inverse_at(x: GroupElement, data: FourierData, kappa: float) -> complex:
    """f(x) ~ kappa * int tr((u^lam_X)* F(f)(lam)) |Pf(lam)| dlam on the ring."""
    N = data.grid.n_hermite
    total = 0.0 + 0.0j
    for lam, w, M in zip(data.lams, data.lam_weights, data.matrices):
        u, v = _frame_uv(float(lam), float(x.P[0]), float(x.Q[0]))
        E = np.exp(-1j * lam * float(x.Z[0])) * cross_wigner_table(N - 1, [u], [v])[0, 0]
        total += w * 4.0 * abs(lam) * np.vdot(E, M)
    return kappa * complex(total)


def spatial_l2_sq(f, grid: FourierGrid) -> float:
    s_nodes, s_w = grid.spatial_rule()
    z_nodes, z_w = grid.z_rule()
    Pm, Qm, Zm = np.meshgrid(s_nodes, s_nodes, z_nodes, indexing="ij")
    values = np.abs(np.asarray(f(Pm, Qm, Zm))) ** 2
    return float(np.einsum("ijk,i,j,k->", values, s_w, s_w, z_w))


def plancherel_kappa(f, grid: FourierGrid | None = None, data: FourierData | None = None) -> float:
    """Empirical constant: ||f||_2^2 divided by the Fourier-side HS integral."""
    grid = grid or (data.grid if data is not None else FourierGrid())
    if data is None:
        data = forward(f, grid)
    fourier_side = float(np.sum(data.lam_weights * 4.0 * np.abs(data.lams) * data.hs_norms_sq()))
    return spatial_l2_sq(f, grid) / fourier_side


def heisenberg_sublaplacian(f, h: float = 1e-3):
    """-Delta f as a vectorized callable, by second differences along the
    left-invariant fields (their coefficients are constant along their own
    flow, so plain directional stencils apply)."""

    def neg_lap(P, Q, Z):
        vp = f(P + h, Q, Z - 2.0 * h * Q) - 2.0 * f(P, Q, Z) + f(P - h, Q, Z + 2.0 * h * Q)
        vq = f(P, Q + h, Z + 2.0 * h * P) - 2.0 * f(P, Q, Z) + f(P, Q - h, Z - 2.0 * h * P)
        return -(vp + vq) / (h * h)

    return neg_lap


def diagonalization_residual(f, grid: FourierGrid | None = None) -> float:
    """Relative residual of F(-Delta f)(lam) = F(f)(lam) H(lam).

    H(lam) is diagonal with entries (2 beta + 1) eta(lam) in the scaled
    Hermite basis; the comparison is in Frobenius norm over the lam grid.
    """
    grid = grid or FourierGrid()
    data_f = forward(f, grid)
    data_g = forward(heisenberg_sublaplacian(f), grid)
    num = 0.0
    den = 0.0
    for lam, Mf, Mg in zip(data_f.lams, data_f.matrices, data_g.matrices):
        zeta_beta = (2.0 * np.arange(grid.n_hermite) + 1.0) * 4.0 * abs(lam)
        pred = Mf * zeta_beta[None, :]
        num += float(np.sum(np.abs(Mg - pred) ** 2))
        den += float(np.sum(np.abs(pred) ** 2))
    return float(np.sqrt(num / den))
