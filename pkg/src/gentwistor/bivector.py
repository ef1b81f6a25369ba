"""Bivectors on an oriented Euclidean 4-space, as skew endomorphisms.

Conventions (fixed once, used everywhere):

* A wedge of vectors acts on vectors through the inner product,

      (x ^ y) z = <x, z> y - <y, z> x,

  so as a matrix  x ^ y = y x^T - x y^T.  On basis vectors this sends
  e_i to e_j, i.e. theta_i ^ theta_j corresponds to E_ji - E_ij.

* The inner product on bivectors is <A, B> = tr(A^T B) / 2, under which
  the six basis wedges theta_i ^ theta_j (i < j) are orthonormal... up to
  the standard factor: each has norm^2 = 1 under this pairing, while the
  self-dual generators below have norm^2 = 2.

* Self-dual / anti-self-dual generators:

      I+ = t1^t2 + t3^t4       I- = t1^t2 - t3^t4
      J+ = t1^t3 + t4^t2       J- = t1^t3 - t4^t2
      K+ = t1^t4 + t2^t3       K- = t1^t4 - t2^t3

  The plus triple is right-handed: I+ J+ = K+.  With the wedge
  convention above the minus triple comes out left-handed, I- J- = -K-.
  Both triples square to -Id and the two families commute entrywise,
  [Lambda+, Lambda-] = 0.

* Unit-length combinations u = a1 I + a2 J + a3 K (|a| = 1) satisfy
  u^2 = -Id and are exactly the orthogonal complex structures compatible
  with the chosen (anti-)orientation.
"""

from __future__ import annotations

import numpy as np

# Index pairs (i < j) fixing the column order of 6-dimensional bivector
# coordinates throughout the package.
WEDGE_PAIRS: tuple[tuple[int, int], ...] = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def wedge(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Matrix of x ^ y acting on vectors, (x^y)z = <x,z>y - <y,z>x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.outer(y, x) - np.outer(x, y)


def basis_wedge(i: int, j: int, n: int = 4) -> np.ndarray:
    """e_i ^ e_j as an n x n matrix (sends e_i to e_j)."""
    m = np.zeros((n, n))
    m[j, i] = 1.0
    m[i, j] = -1.0
    return m


def _build_triples() -> tuple[np.ndarray, ...]:
    t = [basis_wedge(i, j) for (i, j) in ((0, 1), (2, 3), (0, 2), (3, 1), (0, 3), (1, 2))]
    w12, w34, w13, w42, w14, w23 = t
    ip, im = w12 + w34, w12 - w34
    jp, jm = w13 + w42, w13 - w42
    kp, km = w14 + w23, w14 - w23
    return ip, jp, kp, im, jm, km


IP, JP, KP, IM, JM, KM = _build_triples()

#: Generator triples keyed by the sign of the Lambda^{+-} factor.
TRIPLES: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {
    +1: (IP, JP, KP),
    -1: (IM, JM, KM),
}

#: Handedness of each triple: E_i E_j = -delta_ij Id + sigma eps_ijk E_k.
HANDEDNESS: dict[int, int] = {+1: +1, -1: -1}

# Column order of the 6-dimensional curvature-operator basis:
# (I+, J+, K+, I-, J-, K-) / sqrt(2).
SIX_BASIS: tuple[np.ndarray, ...] = (IP, JP, KP, IM, JM, KM)


def biv_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Half-trace pairing <A, B> = tr(A^T B) / 2 on 4x4 matrices."""
    return 0.5 * float(np.tensordot(a, b, axes=2))


def pair_coords(a: np.ndarray) -> np.ndarray:
    """Coefficients of an antisymmetric matrix over the basis wedges.

    a = sum_{i<j} c_{ij} theta_i ^ theta_j  with  c_{ij} = a[j, i].
    """
    return np.array([a[j, i] for (i, j) in WEDGE_PAIRS])


def from_pair_coords(c: np.ndarray) -> np.ndarray:
    m = np.zeros((4, 4))
    for k, (i, j) in enumerate(WEDGE_PAIRS):
        m[j, i] += c[k]
        m[i, j] -= c[k]
    return m


def six_coords(a: np.ndarray) -> np.ndarray:
    """Coordinates over the orthonormal basis (I+,J+,K+,I-,J-,K-)/sqrt(2)."""
    return np.array([biv_inner(a, e) for e in SIX_BASIS]) / np.sqrt(2.0)


def from_six(c: np.ndarray) -> np.ndarray:
    """Inverse of six_coords."""
    m = np.zeros((4, 4))
    for k in range(6):
        m = m + (c[k] / np.sqrt(2.0)) * SIX_BASIS[k]
    return m


def sd_asd_coords(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(c+, c-) with a = c+ . (I+,J+,K+) + c- . (I-,J-,K-).

    Uses the unnormalized generators, whose norm^2 is 2 under the
    half-trace pairing, hence the /2.
    """
    cp = np.array([biv_inner(a, e) for e in TRIPLES[+1]]) / 2.0
    cm = np.array([biv_inner(a, e) for e in TRIPLES[-1]]) / 2.0
    return cp, cm


def from_sd_asd(cp: np.ndarray, cm: np.ndarray) -> np.ndarray:
    m = np.zeros((4, 4))
    for k in range(3):
        m = m + cp[k] * TRIPLES[+1][k] + cm[k] * TRIPLES[-1][k]
    return m


def hodge_star(a: np.ndarray) -> np.ndarray:
    """Hodge star on bivectors: +1 on the plus triple, -1 on the minus."""
    cp, cm = sd_asd_coords(a)
    return from_sd_asd(cp, -cm)


def unit_combination(c: np.ndarray, sign: int) -> np.ndarray:
    """u = c1 I + c2 J + c3 K for the triple of the given sign."""
    i, j, k = TRIPLES[sign]
    return c[0] * i + c[1] * j + c[2] * k


def _pair_to_six_matrix() -> np.ndarray:
    """Orthogonal 6x6 change of basis, wedge-pair coords -> six_coords."""
    u = np.zeros((6, 6))
    for col, (i, j) in enumerate(WEDGE_PAIRS):
        u[:, col] = six_coords(basis_wedge(i, j))
    return u


#: U6 @ pair_coords(A) == six_coords(A); U6 is orthogonal.
U6: np.ndarray = _pair_to_six_matrix()
