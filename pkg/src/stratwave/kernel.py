"""The Schrodinger propagator kernel on a windowed frequency ring.

At fixed time t the kernel evaluated at the point (P, Q, tZ, R) factors into
an exact closed-form dispersive factor in the radical directions,

    (i pi / t)^{k/2} exp(-i |R|^2 / (4 t)),

times a reduced kernel: a series over multi-indices alpha of oscillatory
ring integrals with phase zeta(alpha, lam) - lam(Z), amplitude given by
window factors times Hermite overlaps at the pair coordinates, and Pfaffian
weight.  Terms with |alpha| = m >= 1 are integrated in the rescaled variable
gamma = m lam, which confines every term to rings of comparable size and
produces the m^{-p-d} weights; the truncation tail is majorized explicitly
from the same ring data.

Normalization: the overall constant and the radical-identification Jacobian
are set to 1 (catalog radicals are coordinate-aligned); every downstream
verdict is a log-log slope, which is blind to positive constant factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import eval_laguerre

from .errors import FrameUnavailable, ZeroTime
from .groups import FrameMode, GroupElement, GroupSpec, _as_vector, frame_coordinates
from .quadrature import OscIntegral, QuadratureBudget, QuadratureResult, RingBlock, integrate
from .spectrum import (
    AlphaTerm,
    WindowSpec,
    alpha_support,
    eta_many,
    window,
)

__all__ = [
    "KernelRequest",
    "KernelValue",
    "fresnel_factor",
    "amplitude_G",
    "ktilde",
    "kernel",
    "series_tail_bound",
    "series_uniform_bound",
]


@dataclass(frozen=True)
class KernelRequest:
    spec: GroupSpec
    window: WindowSpec
    t: float
    x: GroupElement
    m_max: int = 10
    tol: float = 1e-8
    budget: QuadratureBudget | None = None

    def __post_init__(self):
        if self.t == 0.0:
            raise ZeroTime("kernel requests need t != 0")
        if self.spec.frame_mode == FrameMode.CENTER_ONLY and (
            np.any(self.x.P != 0.0) or np.any(self.x.Q != 0.0)
        ):
            raise FrameUnavailable(
                f"{self.spec.name} has no explicit frame; evaluation is restricted to P = Q = 0"
            )

    def term_budget(self) -> QuadratureBudget:
        return self.budget or QuadratureBudget(tol=self.tol)


@dataclass(frozen=True)
class KernelValue:
    value: complex
    fresnel_modulus: float
    series_tail_bound: float
    quadrature_error: float
    nodes_used: int = 0

    @property
    def total_error(self) -> float:
        return self.series_tail_bound + self.quadrature_error


def fresnel_factor(t: float, R, k: int | None = None) -> complex:
    """Closed form of the radical integral: (i pi / t)^{k/2} exp(-i |R|^2 / 4t).

    Principal branch: modulus (pi/|t|)^{k/2}, phase sign(t) * k pi / 4; the
    t < 0 value is the conjugate of the t > 0 value at the same R.
    """
    if t == 0.0:
        raise ZeroTime("fresnel factor undefined at t = 0")
    R = np.atleast_1d(np.asarray(R, dtype=float))
    if k is None:
        k = R.size
    r2 = float(R @ R) if R.size else 0.0
    modulus = (np.pi / abs(t)) ** (0.5 * k)
    return modulus * np.exp(1j * np.sign(t) * k * np.pi / 4.0) * np.exp(-1j * r2 / (4.0 * t))


# ----------------------------------------------------------------------------
# series amplitude
# ----------------------------------------------------------------------------


def _pair_radii_sq(spec: GroupSpec, lam_pts: np.ndarray, x: GroupElement) -> np.ndarray:
    """Squared pair radii P_j(lam)^2 + Q_j(lam)^2 of x's first layer, shape (d, K).

    On one-dimensional-center blocks the canonical pairs are the fixed
    coordinate pairs up to a component-dependent swap, which leaves the radii
    unchanged.  H-type blocks get their frame from the complex structure at
    each lam.
    """
    K = lam_pts.shape[1]
    radii = np.empty((spec.d, K))
    j0 = 0
    for block in spec.blocks:
        if len(block.center_idx) == 1:
            for jj in range(block.pair_count):
                radii[j0 + jj, :] = x.P[j0 + jj] ** 2 + x.Q[j0 + jj] ** 2
        else:
            for col in range(K):
                P, Q = frame_coordinates(spec, lam_pts[:, col], x)
                radii[j0 : j0 + block.pair_count, col] = (
                    P[j0 : j0 + block.pair_count] ** 2 + Q[j0 : j0 + block.pair_count] ** 2
                )
        j0 += block.pair_count
    return radii


def amplitude_G(spec: GroupSpec, w: WindowSpec, alpha, P, Q, eta_vals) -> np.ndarray:
    """G_alpha = prod_j theta((2 alpha_j + 1) eta_j) g_{alpha_j}(sqrt(eta_j) P_j, sqrt(eta_j) Q_j).

    eta_vals has shape (d,) or (d, K); P, Q are the pair coordinates of the
    evaluation point.  The overlap factors are radial, so only the pair radii
    enter; |G_alpha| <= 1 always.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=int))
    eta_vals = np.atleast_2d(np.asarray(eta_vals, dtype=float))
    P = _as_vector(P, spec.d)
    Q = _as_vector(Q, spec.d)
    wins = np.prod(window(w, (2.0 * alpha + 1.0)[:, None] * eta_vals), axis=0)
    radii_sq = (P * P + Q * Q)[:, None]
    out = wins * _overlap_product(alpha, eta_vals * radii_sq)
    return out if out.size > 1 else float(out[0])


def _overlap_product(alpha: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """prod_j g_{alpha_j} at pair radius^2 r2[j], via the validated Laguerre form."""
    out = np.ones(r2.shape[1])
    for aj, row in zip(alpha, r2):
        out = out * eval_laguerre(int(aj), 0.5 * row) * np.exp(-0.25 * row)
    return out


def _term_blocks(spec: GroupSpec, term: AlphaTerm) -> tuple[RingBlock, ...]:
    if spec.blocks is None:
        (lo, hi) = term.block_rings[0]
        return (RingBlock(dim=spec.p, center_idx=tuple(range(spec.p)), r_min=lo, r_max=hi),)
    return tuple(
        RingBlock(dim=len(block.center_idx), center_idx=block.center_idx, r_min=lo, r_max=hi)
        for block, (lo, hi) in zip(spec.blocks, term.block_rings)
    )


def _term_integral(spec, w, term: AlphaTerm, m: int, x: GroupElement, Z: np.ndarray, t: float) -> OscIntegral:
    scale = float(max(m, 1))
    alpha = np.asarray(term.alpha, dtype=int)
    weights = 2.0 * alpha + 1.0
    off_center = bool(np.any(x.P != 0.0) or np.any(x.Q != 0.0))

    def phase(gamma):
        comps = eta_many(spec, gamma)
        return ((weights[:, None] * comps).sum(axis=0) - Z @ gamma) / scale

    def amplitude(gamma):
        eta_g = eta_many(spec, gamma)
        eta_l = eta_g / scale
        vals = np.prod(window(w, weights[:, None] * eta_l), axis=0) * np.prod(eta_g, axis=0)
        if off_center:
            radii_sq = _pair_radii_sq(spec, gamma, x)
            vals = vals * _overlap_product(alpha, eta_l * radii_sq)
        return vals

    return OscIntegral(p=spec.p, phase=phase, amplitude=amplitude, blocks=_term_blocks(spec, term), t=t)


# ----------------------------------------------------------------------------
# series assembly
# ----------------------------------------------------------------------------


def ktilde(req: KernelRequest) -> KernelValue:
    """Reduced kernel: the m = 0 ring integral plus the gamma-rescaled series.

    Terms are evaluated and summed in fixed order (m ascending, alpha
    lexicographic); the reported error splits into the summed quadrature
    certificates and the analytic tail majorant beyond m_max.
    """
    spec, w = req.spec, req.window
    Z = req.x.Z
    budget = req.term_budget()
    total = 0.0 + 0.0j
    quad_err = 0.0
    nodes = 0
    for m in range(req.m_max + 1):
        support = alpha_support(spec, w, m)
        weight = 1.0 if m == 0 else float(m) ** (-(spec.p + spec.d))
        for term in support.terms:
            res: QuadratureResult = integrate(_term_integral(spec, w, term, m, req.x, Z, req.t), budget)
            total += weight * res.value
            quad_err += weight * res.error_estimate
            nodes += res.nodes_used
    tail = series_tail_bound(spec, w, req.m_max)
    return KernelValue(
        value=total,
        fresnel_modulus=1.0,
        series_tail_bound=tail,
        quadrature_error=quad_err,
        nodes_used=nodes,
    )


def kernel(req: KernelRequest) -> KernelValue:
    """Full kernel at (P, Q, tZ, R): dispersive radical factor times the series.

    |kernel| = (pi/|t|)^{k/2} |ktilde| exactly; R enters only through the
    unimodular phase.
    """
    reduced = ktilde(req)
    factor = fresnel_factor(req.t, req.x.R, req.spec.k)
    return KernelValue(
        value=factor * reduced.value,
        fresnel_modulus=abs(factor),
        series_tail_bound=abs(factor) * reduced.series_tail_bound,
        quadrature_error=abs(factor) * reduced.quadrature_error,
        nodes_used=reduced.nodes_used,
    )


# ----------------------------------------------------------------------------
# majorants
# ----------------------------------------------------------------------------


def _ring_measure(dim: int, lo: float, hi: float, components: int = 2) -> float:
    if dim == 1:
        return components * (hi - lo)
    if dim == 2:
        return np.pi * (hi * hi - lo * lo)
    return 4.0 * np.pi / 3.0 * (hi**3 - lo**3)


def _term_majorant(spec: GroupSpec, term: AlphaTerm, m: int) -> float:
    """Rigorous bound of one series term: |G_alpha| <= 1, so the term is at
    most m^{-p-d} times the ring measure weighted by sup |Pf|."""
    weight = 1.0 if m == 0 else float(m) ** (-(spec.p + spec.d))
    if spec.blocks is None:
        from .spectrum import _sphere_eta_stats

        _, c_max, _ = _sphere_eta_stats(spec)
        lo, hi = term.block_rings[0]
        return weight * _ring_measure(spec.p, lo, hi) * float(np.prod(c_max * hi))
    bound = weight
    for block, (lo, hi) in zip(spec.blocks, term.block_rings):
        dim = len(block.center_idx)
        bound *= _ring_measure(dim, lo, hi) * (block.coeff * hi) ** block.pair_count
    return bound


def series_tail_bound(spec: GroupSpec, w: WindowSpec, m_max: int, horizon: int = 48) -> float:
    """Upper bound for the discarded terms m > m_max.

    The first `horizon` values of m are majorized exactly term by term; the
    remainder is extrapolated from the fitted power decay of those sums
    (floored at 1/m^2) with a factor-2 safety margin.
    """
    sums = []
    for m in range(m_max + 1, m_max + 1 + horizon):
        support = alpha_support(spec, w, m)
        sums.append(sum(_term_majorant(spec, term, m) for term in support.terms))
    total = float(np.sum(sums))
    positive = [(m_max + 1 + i, s) for i, s in enumerate(sums) if s > 0]
    if len(positive) >= 8:
        ms = np.array([mm for mm, _ in positive[-horizon // 2 :]], dtype=float)
        ss = np.array([s for _, s in positive[-horizon // 2 :]])
        q = -np.polyfit(np.log(ms), np.log(ss), 1)[0]
        q = max(q, 1.05)
        last_m, last_s = positive[-1]
        total += 2.0 * last_s * last_m / (q - 1.0)
    return total


def series_uniform_bound(spec: GroupSpec, w: WindowSpec, m_max: int) -> float:
    """t-uniform majorant of |ktilde|: retained-term measures plus the tail."""
    total = series_tail_bound(spec, w, m_max)
    for m in range(m_max + 1):
        support = alpha_support(spec, w, m)
        total += sum(_term_majorant(spec, term, m) for term in support.terms)
    return total
