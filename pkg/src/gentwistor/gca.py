"""Generalized almost complex structures on the double tangent space.

The generalized tangent space of a 4-manifold at a point is V + V*, an
8-dimensional space carrying the split-signature pairing

    <X + xi, Y + eta> = ( xi(Y) + eta(X) ) / 2.

Two coordinate systems make different things block-diagonal, and both are
used heavily:

* TT basis ("tangent / cotangent"): coordinates (X, xi) stacked.  The
  pairing matrix is Q_TT = [[0, I], [I, 0]] / 2.  A generalized structure
  compatible with a metric g written in an orthonormal frame takes the
  form [[P, Q], [Q, P]] with P, Q antisymmetric.

* PM basis ("plus / minus"): spanned by theta_i + theta_i* and
  theta_i - theta_i*, i.e. the two null-complementary definite subspaces
  C+ and C-.  The pairing matrix is Q_PM = [[I, 0], [0, -I]].  The same
  compatible structure becomes block-diagonal, diag(u1, u2) with
  u1 = P + Q and u2 = P - Q.

The change of basis is S = [[I, I], [I, -I]] with S @ S = 2 Id, mapping
PM coordinates to TT coordinates.

A generalized almost complex structure is an endomorphism m with
m @ m = -Id that preserves the pairing, m^T Q m = Q.  Its type at a point
is the complex codimension of the tangent projection of its +i
eigenspace: 0 for symplectic-like, 2 for complex-like, intermediate and
odd values occur on the twistor fibers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .bivector import sd_asd_coords
from .errors import ConsistencyError, InvalidInputError, UsageError

_ID4 = np.eye(4)
_ID8 = np.eye(8)

#: PM -> TT change of basis; its inverse is S / 2.
S_MATRIX: np.ndarray = np.block([[_ID4, _ID4], [_ID4, -_ID4]])

_ALGEBRA_TOL = 1e-10
_COMPAT_TOL = 1e-9
_RANK_RTOL = 1e-8


class BasisTag(enum.Enum):
    """Which coordinate system an 8-component object is expressed in."""

    TT = "tt"
    PM = "pm"


class ComponentTag(enum.Enum):
    """Connected component of the fiber product of the two unit spheres.

    The first sign says whether u1 lives in the self-dual (+) or
    anti-self-dual (-) bivectors, the second does the same for u2.
    """

    PP = "++"
    MM = "--"
    PM = "+-"
    MP = "-+"

    @property
    def signs(self) -> tuple[int, int]:
        s = {"+": +1, "-": -1}
        return s[self.value[0]], s[self.value[1]]

    @property
    def mixed(self) -> bool:
        return self.value[0] != self.value[1]


def pseudo_metric_matrix(basis: BasisTag) -> np.ndarray:
    if basis is BasisTag.TT:
        return 0.5 * np.block([[np.zeros((4, 4)), _ID4], [_ID4, np.zeros((4, 4))]])
    return np.block([[_ID4, np.zeros((4, 4))], [np.zeros((4, 4)), -_ID4]])


@dataclass(frozen=True)
class GenVector:
    """Element of V + V*, stored as 8 components in a tagged basis."""

    v: np.ndarray
    basis: BasisTag

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        if v.shape != (8,):
            raise UsageError(f"generalized vector needs 8 components, got shape {v.shape}")
        object.__setattr__(self, "v", v)

    @staticmethod
    def from_parts(x: np.ndarray, xi: np.ndarray) -> "GenVector":
        return GenVector(np.concatenate([np.asarray(x, float), np.asarray(xi, float)]), BasisTag.TT)

    @property
    def tangent(self) -> np.ndarray:
        """Tangent part; only meaningful in the TT basis."""
        if self.basis is not BasisTag.TT:
            raise UsageError("tangent projection is defined on TT coordinates")
        return self.v[:4]

    @property
    def cotangent(self) -> np.ndarray:
        if self.basis is not BasisTag.TT:
            raise UsageError("cotangent projection is defined on TT coordinates")
        return self.v[4:]


def change_basis_vector(y: GenVector, to: BasisTag) -> GenVector:
    if y.basis is to:
        return y
    if to is BasisTag.TT:  # v_TT = S v_PM
        return GenVector(S_MATRIX @ y.v, BasisTag.TT)
    return GenVector(0.5 * (S_MATRIX @ y.v), BasisTag.PM)


def pseudo_inner(y: GenVector, z: GenVector) -> float:
    """Split-signature pairing; accepts mixed bases by converting."""
    if y.basis is not z.basis:
        z = change_basis_vector(z, y.basis)
    q = pseudo_metric_matrix(y.basis)
    return float(y.v @ q @ z.v)


@dataclass(frozen=True)
class GenStructure:
    """Generalized almost complex structure as an 8x8 matrix in a tagged basis.

    Construction validates the two defining identities, m @ m = -Id and
    m^T Q m = Q, to 1e-10.  Pass validate=False only for intentionally
    broken inputs in tests.
    """

    m: np.ndarray
    basis: BasisTag
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (8, 8):
            raise UsageError(f"generalized structure needs an 8x8 matrix, got {m.shape}")
        object.__setattr__(self, "m", m)
        if self.validate:
            if not np.allclose(m @ m, -_ID8, atol=_ALGEBRA_TOL):
                raise InvalidInputError("matrix does not square to -Id")
            q = pseudo_metric_matrix(self.basis)
            if not np.allclose(m.T @ q @ m, q, atol=_ALGEBRA_TOL):
                raise InvalidInputError("matrix does not preserve the split pairing")


def change_basis(u: GenStructure, to: BasisTag) -> GenStructure:
    """Rewrite the structure in the other tagged basis (exact, involutive)."""
    if u.basis is to:
        return u
    if to is BasisTag.TT:
        m = S_MATRIX @ u.m @ (0.5 * S_MATRIX)
    else:
        m = (0.5 * S_MATRIX) @ u.m @ S_MATRIX
    return GenStructure(m, to)


def from_complex(j: np.ndarray) -> GenStructure:
    """Structure induced by an almost complex structure J: diag(J, -J^T)."""
    j = np.asarray(j, dtype=float)
    if not np.allclose(j @ j, -_ID4, atol=_ALGEBRA_TOL):
        raise InvalidInputError("J does not square to -Id")
    z = np.zeros((4, 4))
    return GenStructure(np.block([[j, z], [z, -j.T]]), BasisTag.TT)


def from_symplectic(w: np.ndarray) -> GenStructure:
    """Structure induced by a non-degenerate 2-form: [[0, -w^{-1}], [w, 0]]."""
    w = np.asarray(w, dtype=float)
    if not np.allclose(w, -w.T, atol=_ALGEBRA_TOL):
        raise InvalidInputError("symplectic matrix must be antisymmetric")
    try:
        winv = np.linalg.inv(w)
    except np.linalg.LinAlgError as e:
        raise InvalidInputError("symplectic matrix must be invertible") from e
    z = np.zeros((4, 4))
    return GenStructure(np.block([[z, -winv], [w, z]]), BasisTag.TT)


def b_transform(u: GenStructure, b: np.ndarray) -> GenStructure:
    """Conjugate by the shear exp(B) = [[Id, 0], [B, Id]], B antisymmetric.

    Works in TT coordinates: e^{-B} u e^{B}.  The transform preserves the
    pairing and the square, and leaves the upper-right block (hence the
    type) exactly unchanged.
    """
    b = np.asarray(b, dtype=float)
    if not np.allclose(b, -b.T, atol=_ALGEBRA_TOL):
        raise InvalidInputError("B-field must be antisymmetric")
    u_tt = change_basis(u, BasisTag.TT)
    z = np.zeros((4, 4))
    eb = np.block([[_ID4, z], [b, _ID4]])
    ebinv = np.block([[_ID4, z], [-b, _ID4]])
    out = GenStructure(ebinv @ u_tt.m @ eb, BasisTag.TT)
    return out if u.basis is BasisTag.TT else change_basis(out, u.basis)


def _rank(mat: np.ndarray) -> int:
    # Blocks cut out of a structure matrix with J^2 = -Id live at unit
    # scale, so a roundoff-only block must read as rank zero even though
    # its largest singular value is nonzero.  Hence the max(s[0], 1).
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0:
        return 0
    return int(np.sum(s > _RANK_RTOL * max(s[0], 1.0)))


def _type_from_block(u_tt: np.ndarray) -> int:
    # Upper-right TT block is the bivector part beta; type = 2 - rank(beta)/2.
    beta = u_tt[:4, 4:]
    r = _rank(beta)
    if r % 2 != 0:
        raise ConsistencyError(f"bivector block has odd rank {r}")
    return 2 - r // 2


def _type_from_eigenspace(u_tt: np.ndarray) -> int:
    # type = 4 - dim_C of the tangent projection of the +i eigenspace.
    vals, vecs = np.linalg.eig(u_tt)
    cols = vecs[:, vals.imag > 0.0]
    if cols.shape[1] != 4:
        raise ConsistencyError(f"+i eigenspace has dimension {cols.shape[1]}, expected 4")
    basis, _ = np.linalg.qr(cols)  # well-conditioned basis of the eigenspace
    return 4 - _rank(basis[:4, :])


def type_of(u: GenStructure) -> int:
    """Pointwise type, computed two independent ways.

    The fast path reads the rank of the bivector block; the oracle path
    projects the +i eigenspace to the tangent space.  A mismatch raises
    rather than guessing.
    """
    u_tt = change_basis(u, BasisTag.TT).m
    t_block = _type_from_block(u_tt)
    t_eig = _type_from_eigenspace(u_tt)
    if t_block != t_eig:
        raise ConsistencyError(
            f"type mismatch: bivector-block path gives {t_block}, eigenspace path gives {t_eig}"
        )
    return t_block


def metric_compatible_blocks(u: GenStructure, tol: float = _COMPAT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """(u1, u2) diagonal blocks in the PM basis, for metric-compatible u.

    Compatibility with the (orthonormal-frame) metric means exactly that
    the PM matrix is block-diagonal; equivalently the TT matrix is
    antisymmetric.  Off-diagonal PM mass above tol raises.
    """
    u_pm = change_basis(u, BasisTag.PM).m
    off = max(np.abs(u_pm[:4, 4:]).max(), np.abs(u_pm[4:, :4]).max())
    if off > tol:
        raise InvalidInputError(
            f"structure is not metric-compatible: PM off-diagonal mass {off:.3e}"
        )
    return u_pm[:4, :4].copy(), u_pm[4:, 4:].copy()


def classify_component(u: GenStructure, tol: float = 1e-6) -> ComponentTag:
    """Which of the four connected components a compatible structure lies on.

    Each PM diagonal block is an orthogonal complex structure, i.e. a unit
    combination of one generator triple; the component records whether
    each block is self-dual or anti-self-dual.  A block with mass on both
    triples (or on neither) is rejected.
    """
    u1, u2 = metric_compatible_blocks(u)
    signs = []
    for k, blk in enumerate((u1, u2)):
        cp, cm = sd_asd_coords(blk)
        np_, nm = float(np.linalg.norm(cp)), float(np.linalg.norm(cm))
        if abs(np_ - 1.0) <= tol and nm <= tol:
            signs.append("+")
        elif abs(nm - 1.0) <= tol and np_ <= tol:
            signs.append("-")
        else:
            raise InvalidInputError(
                f"block u{k + 1} is not a unit bivector combination on a single "
                f"duality side (|c+|={np_:.3e}, |c-|={nm:.3e})"
            )
    return ComponentTag("".join(signs))


@dataclass(frozen=True)
class KahlerPair:
    """A commuting pair (j1, j2) of compatible structures with j1 j2 = -G.

    G is the generalized metric endomorphism, [[0, I], [I, 0]] in TT
    coordinates over an orthonormal frame.
    """

    j1: GenStructure
    j2: GenStructure

    @property
    def product(self) -> np.ndarray:
        a = change_basis(self.j1, BasisTag.TT).m
        b = change_basis(self.j2, BasisTag.TT).m
        return a @ b


def kahler_partner(j1: GenStructure) -> KahlerPair:
    """Second structure of the commuting pair generated by a compatible j1.

    In TT coordinates a compatible structure is [[P, Q], [Q, P]]; its
    partner swaps the blocks, [[Q, P], [P, Q]].  The pair multiplies to
    minus the generalized metric, which is verified before returning.
    """
    u_tt = change_basis(j1, BasisTag.TT)
    m = u_tt.m
    p, q = m[:4, :4], m[:4, 4:]
    if not (np.allclose(m[4:, 4:], p, atol=_COMPAT_TOL) and np.allclose(m[4:, :4], q, atol=_COMPAT_TOL)):
        raise InvalidInputError("structure is not metric-compatible ([[P,Q],[Q,P]] form)")
    j2 = GenStructure(np.block([[q, p], [p, q]]), BasisTag.TT)
    g = np.block([[np.zeros((4, 4)), _ID4], [_ID4, np.zeros((4, 4))]])
    pair = KahlerPair(u_tt, j2)
    prod = pair.product
    if not (np.allclose(prod, -g, atol=_ALGEBRA_TOL) and np.allclose(j2.m @ m, -g, atol=_ALGEBRA_TOL)):
        raise ConsistencyError("partner construction failed: j1 j2 != -G")
    return pair


def _is_quaternion_triple(triple: tuple[np.ndarray, np.ndarray, np.ndarray], tol: float) -> bool:
    """Accepts either handedness: I J = sigma K with sigma = +-1, cyclically."""
    i, j, k = (np.asarray(t, float) for t in triple)
    n = i.shape[0]
    idn = np.eye(n)
    for t in (i, j, k):
        if not np.allclose(t @ t, -idn, atol=tol):
            return False
    for sigma in (+1.0, -1.0):
        if (
            np.allclose(i @ j, sigma * k, atol=tol)
            and np.allclose(j @ k, sigma * i, atol=tol)
            and np.allclose(k @ i, sigma * j, atol=tol)
        ):
            return True
    return False


def distributions_commute(
    t1: tuple[np.ndarray, np.ndarray, np.ndarray],
    t2: tuple[np.ndarray, np.ndarray, np.ndarray],
    tol: float = _ALGEBRA_TOL,
) -> bool:
    """Whether two quaternionic triples commute elementwise.

    Both arguments must span quaternionic structures (squares -Id, and
    I J = K up to an overall handedness sign).  Returns True when all
    nine cross commutators vanish below tol.
    """
    for name, t in (("first", t1), ("second", t2)):
        if not _is_quaternion_triple(t, tol):
            raise InvalidInputError(f"{name} triple is not quaternionic")
    for a in t1:
        for b in t2:
            if np.abs(a @ b - b @ a).max() > tol:
                return False
    return True


def structure_from_blocks(u1: np.ndarray, u2: np.ndarray, basis: BasisTag = BasisTag.PM) -> GenStructure:
    """diag(u1, u2) in PM coordinates, optionally converted afterwards."""
    z = np.zeros((4, 4))
    u = GenStructure(np.block([[u1, z], [z, u2]]), BasisTag.PM)
    return u if basis is BasisTag.PM else change_basis(u, basis)
