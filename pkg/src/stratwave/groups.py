"""Step-2 stratified Lie groups: coordinates, brackets, dilations and spectral data.

A group is described by the dimensions (p, d, k), a structure tensor
``c[i][j][l]`` with ``[V_i, V_j] = sum_l c[i][j][l] Z_l``, and the skew form
``B(lam)[i][j] = sum_l lam_l c[i][j][l]`` on the first layer.  The positive
eigenvalue pairs ``eta_j(lam)`` of ``B(lam)`` and their product (the Pfaffian)
drive everything downstream.

The built-in catalog covers five families.  Structure tensors are normalized
so that the stated eta formulas hold verbatim:

* ``heisenberg(d)``       -- p=1, eta_j = 4|lam|.  The pair coordinates
  ``(P_j, Q_j)`` correspond to ``(y_j, x_j)`` of the usual Heisenberg chart
  ``(x, y, s)`` with product ``s + s' - 2(x|y') + 2(y|x')``.
* ``htype(m, p)``         -- H-type with first layer of even dimension m,
  eta_j = |lam|; built from anticommuting orthogonal skew matrices
  (quaternionic blocks), so only (m even, p=1) and (m = 0 mod 4, p in {2,3})
  are in the table.
* ``diamond(k, d)``       -- p=1, d eta-pairs with eta_j = 4|lam| and a
  k-dimensional radical.  Only its spectral data is represented: the
  structure tensor records the central bracket components, which is all the
  kernel formulas use (evaluation is restricted to P = Q = 0).
* ``tensor_heisenberg(d1, d2)`` and ``tensor_htype(m1, p1, m2, p2)`` --
  direct products, block-diagonal in both the first layer and the center.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DegenerateLambda, InadmissibleParameters, UnknownGroupKind

__all__ = [
    "EtaMode",
    "FrameMode",
    "EtaBlock",
    "GroupSpec",
    "GroupElement",
    "catalog",
    "product_spec",
    "from_structure_tensor",
    "b_form",
    "eta",
    "pfaffian",
    "dilate",
    "homogeneous_dimension",
    "group_product",
    "spec_to_json",
    "spec_from_json",
]

# Relative singular-value threshold separating the k exact zeros of B(lam)
# from its O(1) eigenvalues on catalog groups.
DEGENERACY_RTOL = 1e-10


class EtaMode(str, Enum):
    CLOSED_FORM = "CLOSED_FORM"
    NUMERIC = "NUMERIC"


class FrameMode(str, Enum):
    EXPLICIT = "EXPLICIT"
    CENTER_ONLY = "CENTER_ONLY"


@dataclass(frozen=True)
class EtaBlock:
    """One irreducible factor: eta_j(lam) = coeff * |lam restricted to block|.

    ``center_idx`` lists the lam coordinates the block sees, ``pair_idx`` the
    flat first-layer index pairs carrying its eta-pairs.
    """

    center_idx: tuple[int, ...]
    pair_idx: tuple[tuple[int, int], ...]
    coeff: float

    @property
    def pair_count(self) -> int:
        return len(self.pair_idx)


@dataclass(frozen=True)
class GroupSpec:
    """Immutable spectral/structural description of a step-2 group."""

    name: str
    p: int
    d: int
    k: int
    structure_tensor: np.ndarray  # shape (dim_v, dim_v, p), antisymmetric in (i, j)
    eta_mode: EtaMode
    frame_mode: FrameMode
    blocks: tuple[EtaBlock, ...] | None = None
    radical_idx: tuple[int, ...] = field(default=())

    def __post_init__(self):
        self.structure_tensor.setflags(write=False)
        if self.structure_tensor.shape != (self.dim_v, self.dim_v, self.p):
            raise ValueError("structure tensor shape does not match (dim_v, dim_v, p)")
        if not np.array_equal(self.structure_tensor, -self.structure_tensor.transpose(1, 0, 2)):
            raise ValueError("structure tensor must be exactly antisymmetric in (i, j)")
        if self.blocks is not None:
            if sum(b.pair_count for b in self.blocks) != self.d:
                raise ValueError("blocks do not account for all eta-pairs")

    @property
    def dim_v(self) -> int:
        return 2 * self.d + self.k

    @property
    def dim(self) -> int:
        return self.dim_v + self.p

    @property
    def pair_idx(self) -> tuple[tuple[int, int], ...]:
        if self.blocks is None:
            # generic specs use the plain (P..., Q..., R...) coordinate layout
            return tuple((j, self.d + j) for j in range(self.d))
        return tuple(pr for b in self.blocks for pr in b.pair_idx)

    def element(self, P=0.0, Q=0.0, R=0.0, Z=0.0) -> "GroupElement":
        """Build a GroupElement, broadcasting scalars to the right lengths."""
        return GroupElement(
            P=_as_vector(P, self.d),
            Q=_as_vector(Q, self.d),
            R=_as_vector(R, self.k),
            Z=_as_vector(Z, self.p),
        )

    def flat_first_layer(self, x: "GroupElement") -> np.ndarray:
        """Coordinates of the first-layer part of x in the fixed basis."""
        v = np.zeros(self.dim_v)
        for j, (ip, iq) in enumerate(self.pair_idx):
            v[ip] = x.P[j]
            v[iq] = x.Q[j]
        for r, idx in enumerate(self.radical_idx):
            v[idx] = x.R[r]
        return v

    def element_from_flat(self, v: np.ndarray, Z) -> "GroupElement":
        P = np.array([v[ip] for ip, _ in self.pair_idx], dtype=float)
        Q = np.array([v[iq] for _, iq in self.pair_idx], dtype=float)
        R = np.array([v[i] for i in self.radical_idx], dtype=float)
        return GroupElement(P=P, Q=Q, R=R, Z=_as_vector(Z, self.p))


@dataclass(frozen=True)
class GroupElement:
    """Exponential coordinates X = (P, Q, R, Z)."""

    P: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    Z: np.ndarray

    def __post_init__(self):
        for part in (self.P, self.Q, self.R, self.Z):
            if not np.all(np.isfinite(part)):
                raise ValueError("group element coordinates must be finite")

    def __eq__(self, other):
        return (
            isinstance(other, GroupElement)
            and np.array_equal(self.P, other.P)
            and np.array_equal(self.Q, other.Q)
            and np.array_equal(self.R, other.R)
            and np.array_equal(self.Z, other.Z)
        )

    def neg(self) -> "GroupElement":
        return GroupElement(-self.P, -self.Q, -self.R, -self.Z)


def _as_vector(value, length: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float)).ravel()
    if arr.size == 1 and length != 1:
        arr = np.full(length, arr[0]) if length > 0 else np.zeros(0)
    if arr.size == 0 and length == 0:
        return np.zeros(0)
    if arr.size != length:
        raise ValueError(f"expected vector of length {length}, got {arr.size}")
    return arr.astype(float)


# ----------------------------------------------------------------------------
# catalog construction
# ----------------------------------------------------------------------------

# Left multiplication by i, j, k on the quaternions (1, i, j, k): orthogonal,
# skew-symmetric, pairwise anticommuting 4x4 matrices.
_QUAT_I = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float)
_QUAT_J = np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
_QUAT_K = np.array([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=float)


def _htype_generators(m: int, p: int) -> list[np.ndarray]:
    """Anticommuting orthogonal skew m x m matrices, one per center direction.

    Table-driven: p = 1 needs m even; p in {2, 3} needs m divisible by 4.
    """
    if p == 1:
        if m % 2:
            raise InadmissibleParameters(f"htype(m={m}, p=1) needs even m")
        J2 = np.array([[0.0, -1.0], [1.0, 0.0]])
        return [np.kron(np.eye(m // 2), J2)]
    if p in (2, 3):
        if m % 4:
            raise InadmissibleParameters(f"htype(m={m}, p={p}) needs m divisible by 4")
        quats = [_QUAT_I, _QUAT_J, _QUAT_K][:p]
        return [np.kron(np.eye(m // 4), U) for U in quats]
    raise InadmissibleParameters(f"htype with p={p} is outside the catalog table (p <= 3)")


def _heisenberg_tensor(d: int) -> np.ndarray:
    c = np.zeros((2 * d, 2 * d, 1))
    for j in range(d):
        c[j, d + j, 0] = 4.0
        c[d + j, j, 0] = -4.0
    return c


def catalog(kind: str, *params: int) -> GroupSpec:
    """Return one of the five built-in families.

    kind in {heisenberg, htype, diamond, tensor_heisenberg, tensor_htype},
    with integer parameters (d), (m, p), (k, d), (d1, d2), (m1, p1, m2, p2).
    """
    params = tuple(int(v) for v in params)
    if any(v <= 0 for v in params) and kind != "diamond":
        raise InadmissibleParameters(f"{kind}{params}: parameters must be positive")

    if kind == "heisenberg":
        (d,) = params
        blocks = (EtaBlock(center_idx=(0,), pair_idx=tuple((j, d + j) for j in range(d)), coeff=4.0),)
        return GroupSpec(
            name=f"heisenberg({d})",
            p=1,
            d=d,
            k=0,
            structure_tensor=_heisenberg_tensor(d),
            eta_mode=EtaMode.CLOSED_FORM,
            frame_mode=FrameMode.EXPLICIT,
            blocks=blocks,
        )

    if kind == "htype":
        m, p = params
        gens = _htype_generators(m, p)
        c = np.stack(gens, axis=-1)
        d = m // 2
        blocks = (
            EtaBlock(center_idx=tuple(range(p)), pair_idx=tuple((2 * j, 2 * j + 1) for j in range(d)), coeff=1.0),
        )
        return GroupSpec(
            name=f"htype({m},{p})",
            p=p,
            d=d,
            k=0,
            structure_tensor=c,
            eta_mode=EtaMode.CLOSED_FORM,
            frame_mode=FrameMode.EXPLICIT,
            blocks=blocks,
        )

    if kind == "diamond":
        k, d = params
        if d <= 0 or k < 0 or k > d:
            raise InadmissibleParameters(f"diamond(k={k}, d={d}) needs 0 <= k <= d, d >= 1")
        dim_v = 2 * d + k
        c = np.zeros((dim_v, dim_v, 1))
        for j in range(d):
            c[j, d + j, 0] = 4.0
            c[d + j, j, 0] = -4.0
        blocks = (EtaBlock(center_idx=(0,), pair_idx=tuple((j, d + j) for j in range(d)), coeff=4.0),)
        return GroupSpec(
            name=f"diamond({k},{d})",
            p=1,
            d=d,
            k=k,
            structure_tensor=c,
            eta_mode=EtaMode.CLOSED_FORM,
            frame_mode=FrameMode.CENTER_ONLY,
            blocks=blocks,
            radical_idx=tuple(range(2 * d, 2 * d + k)),
        )

    if kind == "tensor_heisenberg":
        d1, d2 = params
        return product_spec(catalog("heisenberg", d1), catalog("heisenberg", d2), name=f"tensor_heisenberg({d1},{d2})")

    if kind == "tensor_htype":
        m1, p1, m2, p2 = params
        return product_spec(
            catalog("htype", m1, p1), catalog("htype", m2, p2), name=f"tensor_htype({m1},{p1},{m2},{p2})"
        )

    raise UnknownGroupKind(f"unknown catalog kind {kind!r}")


def product_spec(s1: GroupSpec, s2: GroupSpec, name: str | None = None) -> GroupSpec:
    """Direct product: block-diagonal structure tensor, concatenated centers."""
    dv1, dv2 = s1.dim_v, s2.dim_v
    p = s1.p + s2.p
    c = np.zeros((dv1 + dv2, dv1 + dv2, p))
    c[:dv1, :dv1, : s1.p] = s1.structure_tensor
    c[dv1:, dv1:, s1.p :] = s2.structure_tensor
    blocks = None
    if s1.blocks is not None and s2.blocks is not None:
        shifted = [
            EtaBlock(
                center_idx=tuple(i + s1.p for i in b.center_idx),
                pair_idx=tuple((ip + dv1, iq + dv1) for ip, iq in b.pair_idx),
                coeff=b.coeff,
            )
            for b in s2.blocks
        ]
        blocks = tuple(s1.blocks) + tuple(shifted)
    mode = FrameMode.EXPLICIT if (s1.frame_mode == s2.frame_mode == FrameMode.EXPLICIT) else FrameMode.CENTER_ONLY
    return GroupSpec(
        name=name or f"product[{s1.name},{s2.name}]",
        p=p,
        d=s1.d + s2.d,
        k=s1.k + s2.k,
        structure_tensor=c,
        eta_mode=EtaMode.CLOSED_FORM if blocks is not None else EtaMode.NUMERIC,
        frame_mode=mode,
        blocks=blocks,
        radical_idx=tuple(s1.radical_idx) + tuple(i + dv1 for i in s2.radical_idx),
    )


def from_structure_tensor(name: str, p: int, d: int, k: int, tensor: np.ndarray) -> GroupSpec:
    """Generic group with eta from eigen-decomposition, kernel at P = Q = 0 only."""
    return GroupSpec(
        name=name,
        p=p,
        d=d,
        k=k,
        structure_tensor=np.asarray(tensor, dtype=float).copy(),
        eta_mode=EtaMode.NUMERIC,
        frame_mode=FrameMode.CENTER_ONLY,
        blocks=None,
        radical_idx=tuple(range(2 * d, 2 * d + k)),
    )


# ----------------------------------------------------------------------------
# spectral data
# ----------------------------------------------------------------------------


def b_form(spec: GroupSpec, lam) -> np.ndarray:
    """Skew form B(lam)[i][j] = sum_l lam_l c[i][j][l] on the first layer."""
    lam = _as_vector(lam, spec.p)
    return spec.structure_tensor @ lam


def _block_norms(spec: GroupSpec, lam: np.ndarray) -> np.ndarray:
    return np.array([np.linalg.norm(lam[list(b.center_idx)]) for b in spec.blocks])


def eta(spec: GroupSpec, lam) -> np.ndarray:
    """Positive eigenvalue pairs of B(lam).

    CLOSED_FORM specs return the catalog formula in block order (the order
    matching the fixed pair coordinates); single-block groups are constant
    across pairs so the vector is trivially ascending.  NUMERIC specs return
    the positive spectrum sorted ascending.  Raises DegenerateLambda when
    B(lam) has a kernel larger than the radical.
    """
    lam = _as_vector(lam, spec.p)
    if spec.eta_mode == EtaMode.CLOSED_FORM and spec.blocks is not None:
        norms = _block_norms(spec, lam)
        if np.any(norms == 0.0):
            raise DegenerateLambda(f"{spec.name}: lam={lam} lies outside the generic set")
        return np.concatenate([np.full(b.pair_count, b.coeff * nrm) for b, nrm in zip(spec.blocks, norms)])
    return _eta_numeric(spec, lam)


def _eta_numeric(spec: GroupSpec, lam: np.ndarray) -> np.ndarray:
    B = b_form(spec, lam)
    # iB is Hermitian with spectrum {+-eta_j} plus k zeros.
    ev = np.linalg.eigvalsh(1j * B)
    scale = np.max(np.abs(ev))
    if scale == 0.0:
        raise DegenerateLambda(f"{spec.name}: B(lam) = 0 at lam={lam}")
    tol = DEGENERACY_RTOL * scale
    positive = np.sort(ev[ev > tol])
    zeros = np.count_nonzero(np.abs(ev) <= tol)
    if zeros > spec.k or positive.size != spec.d:
        raise DegenerateLambda(
            f"{spec.name}: B(lam) at lam={lam} has {zeros} near-zero eigenvalues (radical dimension {spec.k})"
        )
    return positive


def pfaffian(spec: GroupSpec, lam) -> float:
    """|Pf(lam)| = product of the eta_j(lam)."""
    return float(np.prod(eta(spec, lam)))


def homogeneous_dimension(spec: GroupSpec) -> int:
    """Jacobian exponent of the dilations: dim_v + 2p for step 2."""
    return spec.dim_v + 2 * spec.p


def dilate(spec: GroupSpec, t: float, x: GroupElement) -> GroupElement:
    """Anisotropic dilation: first layer scales by t, the center by t^2."""
    if t <= 0:
        raise ValueError("dilation parameter must be positive")
    return GroupElement(P=t * x.P, Q=t * x.Q, R=t * x.R, Z=t * t * x.Z)


def group_product(spec: GroupSpec, x: GroupElement, y: GroupElement) -> GroupElement:
    """Campbell-Hausdorff product truncated at step 2.

    First-layer coordinates add; the center picks up half the bracket of the
    first-layer parts through the structure tensor.
    """
    vx = spec.flat_first_layer(x)
    vy = spec.flat_first_layer(y)
    bracket = np.einsum("ijl,i,j->l", spec.structure_tensor, vx, vy)
    z = x.Z + y.Z + 0.5 * bracket
    return spec.element_from_flat(vx + vy, z)


# ----------------------------------------------------------------------------
# lam-dependent frames (explicit-frame groups only)
# ----------------------------------------------------------------------------


def frame_coordinates(spec: GroupSpec, lam, x: GroupElement) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates (P(lam), Q(lam)) of x's first-layer part in the canonical frame.

    Heisenberg-type blocks (one center coordinate) keep the fixed pairs, with
    the roles of P and Q swapped on the negative component.  H-type blocks
    build the frame from the complex structure B(lam)/|lam| at each lam.
    """
    if spec.frame_mode != FrameMode.EXPLICIT or spec.blocks is None:
        raise ValueError(f"{spec.name} carries no explicit frame")
    lam = _as_vector(lam, spec.p)
    v = spec.flat_first_layer(x)
    P = np.zeros(spec.d)
    Q = np.zeros(spec.d)
    j0 = 0
    for block in spec.blocks:
        nloc = block.pair_count
        if len(block.center_idx) == 1:
            sign = np.sign(lam[block.center_idx[0]])
            if sign == 0:
                raise DegenerateLambda(f"{spec.name}: lam vanishes on block {block.center_idx}")
            for jj, (ip, iq) in enumerate(block.pair_idx):
                if sign > 0:
                    P[j0 + jj], Q[j0 + jj] = v[ip], v[iq]
                else:
                    P[j0 + jj], Q[j0 + jj] = v[iq], v[ip]
        else:
            Pdirs, Qdirs = _complex_structure_frame(spec, lam, block)
            idx = [i for pr in block.pair_idx for i in pr]
            vloc = v[idx]
            for jj in range(nloc):
                P[j0 + jj] = Pdirs[jj] @ vloc
                Q[j0 + jj] = Qdirs[jj] @ vloc
        j0 += nloc
    return P, Q


def _complex_structure_frame(spec: GroupSpec, lam: np.ndarray, block: EtaBlock):
    """Orthonormal (P_j, Q_j) with B(P_i, Q_j) = eta delta_ij on an H-type block."""
    idx = [i for pr in block.pair_idx for i in pr]
    lam_block = lam[list(block.center_idx)]
    nrm = np.linalg.norm(lam_block)
    if nrm == 0:
        raise DegenerateLambda(f"{spec.name}: lam vanishes on block {block.center_idx}")
    B = b_form(spec, lam)[np.ix_(idx, idx)]
    J = B / (block.coeff * nrm)  # J^2 = -I
    dim = len(idx)
    Pdirs, Qdirs = [], []
    basis: list[np.ndarray] = []
    for seed in np.eye(dim):
        w = seed.copy()
        for u in basis:
            w -= (u @ w) * u
        if np.linalg.norm(w) < 1e-8:
            continue
        w /= np.linalg.norm(w)
        q = -J @ w
        Pdirs.append(w)
        Qdirs.append(q)
        basis.extend([w, q])
        if len(Pdirs) == dim // 2:
            break
    return np.array(Pdirs), np.array(Qdirs)


# ----------------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------------


def spec_to_json(spec: GroupSpec) -> str:
    triplets = []
    c = spec.structure_tensor
    ii, jj, ll = np.nonzero(c)
    for i, j, l in zip(ii, jj, ll):
        if i < j:
            triplets.append([int(i), int(j), int(l), float(c[i, j, l])])
    doc = {
        "name": spec.name,
        "p": spec.p,
        "d": spec.d,
        "k": spec.k,
        "dim_v": spec.dim_v,
        "eta_mode": spec.eta_mode.value,
        "frame_mode": spec.frame_mode.value,
        "structure_tensor": triplets,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def spec_from_json(text: str) -> GroupSpec:
    doc = json.loads(text)
    dim_v = 2 * doc["d"] + doc["k"]
    c = np.zeros((dim_v, dim_v, doc["p"]))
    for i, j, l, value in doc["structure_tensor"]:
        c[i, j, l] = value
        c[j, i, l] = -value
    return from_structure_tensor(doc["name"], doc["p"], doc["d"], doc["k"], c)
