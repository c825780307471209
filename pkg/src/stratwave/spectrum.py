"""Frequencies zeta_j = (2 alpha_j + 1) eta_j, bump windows, and series support.

A window realizes strict spectral localization in a ring [a, b]: the kernel
series keeps only multi-indices alpha whose window product
prod_j theta(zeta_j(alpha, lam)) is somewhere nonzero, and for each such
alpha the rescaled frequency gamma = max(m, 1) * lam is confined to explicit
per-block rings.  Those rings are what the oscillatory integrals run over.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLambda
from .groups import EtaBlock, GroupSpec, _as_vector, eta

__all__ = [
    "WindowSpec",
    "SpectralPoint",
    "window",
    "window_product",
    "zeta",
    "zeta_components",
    "zeta_gradient",
    "eta_many",
    "AlphaTerm",
    "AlphaSupport",
    "alpha_support",
    "spectral_point",
]


@dataclass(frozen=True)
class WindowSpec:
    """Smooth bump supported exactly on [a, b], identically 1 on the middle half.

    Built from the standard exp(-1/x) partition ramp; any smooth compactly
    supported bump is admissible, and the construction is echoed in run
    metadata so outputs are self-describing.
    """

    a: float
    b: float

    def __post_init__(self):
        if not (0 < self.a < self.b):
            raise ValueError("window needs 0 < a < b")

    @property
    def ramp_width(self) -> float:
        return 0.25 * (self.b - self.a)

    @property
    def plateau(self) -> tuple[float, float]:
        return (self.a + self.ramp_width, self.b - self.ramp_width)

    def metadata(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "bump": "exp(-1/x) partition ramp, plateau on middle half of [a, b]",
        }


def _ramp(x: np.ndarray) -> np.ndarray:
    """C-infinity increasing step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        lo = np.where(x > 0.0, np.exp(-1.0 / np.where(x > 0.0, x, 1.0)), 0.0)
        hi = np.where(x < 1.0, np.exp(-1.0 / np.where(x < 1.0, 1.0 - x, 1.0)), 0.0)
    return lo / (lo + hi)


def window(w: WindowSpec, s) -> np.ndarray:
    """theta(s) in [0, 1]: 0 off [a, b], 1 on the plateau, smooth ramps between."""
    s = np.asarray(s, dtype=float)
    width = w.ramp_width
    return _ramp((s - w.a) / width) * _ramp((w.b - s) / width)


@dataclass(frozen=True)
class SpectralPoint:
    """One (alpha, lam, nu) sample with its cached frequencies."""

    alpha: tuple[int, ...]
    lam: np.ndarray
    nu: np.ndarray
    zeta_j: np.ndarray
    zeta: float


def spectral_point(spec: GroupSpec, alpha, lam, nu=0.0) -> SpectralPoint:
    comps = zeta_components(spec, alpha, lam)
    return SpectralPoint(
        alpha=tuple(int(v) for v in alpha),
        lam=_as_vector(lam, spec.p),
        nu=_as_vector(nu, spec.k),
        zeta_j=comps,
        zeta=float(comps.sum()),
    )


# ----------------------------------------------------------------------------
# frequencies
# ----------------------------------------------------------------------------


def _alpha_array(spec: GroupSpec, alpha) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(alpha, dtype=int))
    if arr.size != spec.d or np.any(arr < 0):
        raise ValueError(f"alpha must be a length-{spec.d} multi-index of non-negative integers")
    return arr


def eta_many(spec: GroupSpec, lam_pts: np.ndarray) -> np.ndarray:
    """eta at many frequencies: lam_pts shape (p, K) -> (d, K).

    Closed-form specs return block order; generic specs the ascending
    spectrum of B(lam), via one stacked eigen-decomposition.
    """
    lam_pts = np.atleast_2d(np.asarray(lam_pts, dtype=float))
    if spec.blocks is not None:
        rows = []
        for block in spec.blocks:
            nrm = np.linalg.norm(lam_pts[list(block.center_idx), :], axis=0)
            rows.append(np.repeat((block.coeff * nrm)[None, :], block.pair_count, axis=0))
        return np.concatenate(rows, axis=0)
    B = np.einsum("ijl,lk->kij", spec.structure_tensor, lam_pts)
    # -B^2 is symmetric PSD with spectrum {eta_j^2 twice each, 0^k}; a real
    # eigen-decomposition is markedly cheaper than the Hermitian iB route
    ev = np.linalg.eigvalsh(-B @ B)  # (K, dim_v) ascending
    if spec.d == 0:
        return np.zeros((0, lam_pts.shape[1]))
    scale = ev[:, -1]
    pairs = ev[:, spec.k :]
    bad = (scale <= 0.0) | (pairs[:, 0] <= (1e-10) ** 2 * scale)
    if spec.k:
        bad = bad | (ev[:, spec.k - 1] > 1e-10 * scale)
    if np.any(bad):
        raise DegenerateLambda(f"{spec.name}: {int(bad.sum())} frequencies fall outside the generic set")
    return np.sqrt(pairs[:, ::2]).T


def zeta_components(spec: GroupSpec, alpha, lam) -> np.ndarray:
    """Componentwise frequencies (2 alpha_j + 1) eta_j(lam)."""
    a = _alpha_array(spec, alpha)
    return (2.0 * a + 1.0) * eta(spec, lam)


def zeta(spec: GroupSpec, alpha, lam) -> float:
    """Total frequency zeta(alpha, lam) = sum_j (2 alpha_j + 1) eta_j(lam)."""
    return float(zeta_components(spec, alpha, lam).sum())


def zeta_many(spec: GroupSpec, alpha, lam_pts: np.ndarray) -> np.ndarray:
    a = _alpha_array(spec, alpha)
    return ((2.0 * a + 1.0)[:, None] * eta_many(spec, lam_pts)).sum(axis=0)


def zeta_gradient(spec: GroupSpec, alpha, lam) -> np.ndarray:
    """Gradient of lam -> zeta(alpha, lam); closed form blockwise on the catalog."""
    a = _alpha_array(spec, alpha)
    lam = _as_vector(lam, spec.p)
    if spec.blocks is not None:
        grad = np.zeros(spec.p)
        j0 = 0
        for block in spec.blocks:
            idx = list(block.center_idx)
            nrm = np.linalg.norm(lam[idx])
            if nrm == 0.0:
                raise DegenerateLambda(f"{spec.name}: lam vanishes on block {block.center_idx}")
            weight = block.coeff * np.sum(2.0 * a[j0 : j0 + block.pair_count] + 1.0)
            grad[idx] = weight * lam[idx] / nrm
            j0 += block.pair_count
        return grad
    h = 1e-6 * max(np.linalg.norm(lam), 1.0)
    grad = np.zeros(spec.p)
    for i in range(spec.p):
        step = np.zeros(spec.p)
        step[i] = h
        grad[i] = (zeta(spec, a, lam + step) - zeta(spec, a, lam - step)) / (2.0 * h)
    return grad


def window_product(spec: GroupSpec, w: WindowSpec, alpha, lam) -> float:
    """prod_j theta((2 alpha_j + 1) eta_j(lam))."""
    return float(np.prod(window(w, zeta_components(spec, alpha, lam))))


def window_product_many(spec: GroupSpec, w: WindowSpec, alpha, lam_pts: np.ndarray) -> np.ndarray:
    a = _alpha_array(spec, alpha)
    comps = (2.0 * a + 1.0)[:, None] * eta_many(spec, lam_pts)
    return np.prod(window(w, comps), axis=0)


# ----------------------------------------------------------------------------
# support of the rescaled series
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class AlphaTerm:
    """One admissible series term: the multi-index and its per-block gamma-rings.

    For m = |alpha| >= 1 the rings confine gamma = m lam; the m = 0 term rings
    confine lam itself.
    """

    alpha: tuple[int, ...]
    block_rings: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class AlphaSupport:
    m: int
    terms: tuple[AlphaTerm, ...]
    enclosing: tuple[tuple[float, float], ...] | None

    @property
    def alphas(self) -> list[tuple[int, ...]]:
        return [t.alpha for t in self.terms]


def _compositions(total: int, parts: int):
    """All tuples of non-negative integers of given length summing to total."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def _block_ring(block: EtaBlock, w: WindowSpec, alpha_local: np.ndarray, scale: float):
    """Ring |gamma_block| in [lo, hi] outside which this block's factors vanish.

    Factor j is nonzero only for coeff * (2 alpha_j + 1) * |gamma_b| / scale
    in (a, b); the block ring is the intersection over its factors.
    """
    weights = 2.0 * alpha_local + 1.0
    lo = float(np.max(scale * w.a / (block.coeff * weights)))
    hi = float(np.min(scale * w.b / (block.coeff * weights)))
    return lo, hi


# sampled unit-sphere eta bounds for generic specs, keyed by spec identity
_SPHERE_STATS: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _sphere_eta_stats(spec: GroupSpec, samples: int = 512):
    """Per-pair sphere bounds (inflated max, deflated min) plus the sample
    table, for generic specs without closed-form blocks."""
    key = id(spec)
    if key not in _SPHERE_STATS:
        rng = np.random.default_rng(1234)
        dirs = rng.normal(size=(spec.p, samples))
        dirs = np.concatenate([dirs, np.eye(spec.p), -np.eye(spec.p)], axis=1)
        dirs /= np.linalg.norm(dirs, axis=0)
        try:
            table = eta_many(spec, dirs)
        except DegenerateLambda as exc:
            raise DegenerateLambda(
                f"{spec.name}: sphere sampling hit the degenerate set; series support unavailable"
            ) from exc
        # ~500 directions leave sub-percent sphere-extremum error for smooth
        # degree-one eta; a slim margin keeps the ring edges close to the
        # window support, which Gauss-Legendre resolves far more cheaply
        c_min = (1.0 - 0.015) * table.min(axis=1)
        c_max = (1.0 + 0.015) * table.max(axis=1)
        if np.any(c_min <= 1e-8 * np.max(c_max)):
            raise DegenerateLambda(
                f"{spec.name}: some eta_j degenerates on the unit sphere; per-pair ring bounds need "
                "eta_j bounded below (decomposable-type generic groups are not supported)"
            )
        _SPHERE_STATS[key] = (c_min, c_max, table)
    return _SPHERE_STATS[key]


def _generic_support(spec: GroupSpec, w: WindowSpec, m: int) -> AlphaSupport:
    c_min, c_max, table = _sphere_eta_stats(spec)
    scale = float(max(m, 1))
    terms = []
    for alpha in _compositions(m, spec.d):
        weights = 2.0 * np.asarray(alpha) + 1.0
        lo = float(np.max(scale * w.a / (weights * c_max)))
        hi = float(np.min(scale * w.b / (weights * c_min)))
        if not lo < hi:
            continue
        # sup of the window product is positive only if some direction keeps
        # every factor inside (a, b) at a common radius
        feasible = np.any(
            np.max(w.a / (weights[:, None] * table), axis=0) < np.min(w.b / (weights[:, None] * table), axis=0)
        )
        if feasible:
            terms.append(AlphaTerm(alpha=alpha, block_rings=((lo, hi),)))
    enclosing = None
    if terms:
        enclosing = ((min(t.block_rings[0][0] for t in terms), max(t.block_rings[0][1] for t in terms)),)
    return AlphaSupport(m=m, terms=tuple(terms), enclosing=enclosing)


def alpha_support(spec: GroupSpec, w: WindowSpec, m: int) -> AlphaSupport:
    """Admissible multi-indices with |alpha| = m and their gamma-rings.

    alpha is admissible when sup over lam of the window product is positive,
    i.e. when on every block the per-factor constraints
    (2 alpha_j + 1) eta_j in (a, b) intersect.  Rings follow by inverting the
    constraints on each block sphere; catalog blocks have eta_j exactly
    coeff * |gamma_block| there, generic specs use sampled sphere bounds with
    a safety margin (rings only need to cover the support - the window
    factors vanish outside it).
    """
    if spec.blocks is None:
        return _generic_support(spec, w, m)
    scale = float(max(m, 1))
    terms = []
    for alpha in _compositions(m, spec.d):
        rings = []
        j0 = 0
        ok = True
        for block in spec.blocks:
            local = np.asarray(alpha[j0 : j0 + block.pair_count])
            lo, hi = _block_ring(block, w, local, scale)
            if not lo < hi:
                ok = False
                break
            rings.append((lo, hi))
            j0 += block.pair_count
        if ok:
            terms.append(AlphaTerm(alpha=alpha, block_rings=tuple(rings)))
    enclosing = None
    if terms:
        nblocks = len(spec.blocks)
        enclosing = tuple(
            (min(t.block_rings[b][0] for t in terms), max(t.block_rings[b][1] for t in terms))
            for b in range(nblocks)
        )
    return AlphaSupport(m=m, terms=tuple(terms), enclosing=enclosing)
