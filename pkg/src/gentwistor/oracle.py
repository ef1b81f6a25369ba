"""Finite difference Nijenhuis referee on a twistor total-space chart.

Independent cross-check for the curvature commutator residuals of
``twistor``: realize the candidate structure as a pointwise matrix field
over an eight dimensional chart of the twistor space (four base
coordinates plus two stereographic coordinates per fiber sphere) and
evaluate the generalized Nijenhuis tensor on explicit test fields with
centered finite differences.  Nothing here reuses the constraint
reduction, so agreement between the two paths is meaningful evidence.

Chart conventions:

* fiber sphere coordinates: w = (a1, a2) / (1 + pole * a3) with
  pole in {+1, -1}; the chart is singular at a3 = -pole, and embedding
  raises when 1 + pole * a3 falls under a safety margin, at which point
  the caller should re-chart with the opposite pole.
* adapted frame on the chart: horizontal lifts of the orthonormal base
  frame move the fiber with velocity [u, Upsilon_i] (the frame
  connection), vertical directions are fiber rotations; stacking the
  lift matrix over the coordinate frame gives a block triangular 8x8
  frame whose inverse transpose carries the dual covectors.
* the structure matrix is assembled in the adapted frame, where its
  horizontal part is the tangent/cotangent matrix of the generalized
  structure (or u1 twice for the almost complex kind) and its vertical
  part is the fiber rotation j(x) = sigma (a x x) on each sphere, then
  conjugated into chart components.

Test fields come in four families, named by selector tuples:

    ("h+", i), ("h-", i)   horizontal lift of theta_i plus/minus its
                           dual covector lift, i in 0..3
    ("v", k)               fiber rotation generated by the constant
                           bivector basis element k in 0..5
    ("v*", k)              the covector field with the same fiber
                           components and zero tangent part

The result carries a two-step Richardson noise estimate: the tensor is
evaluated at the requested step and at half the step, the difference
bounds the discretization error, and the half-step value is reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bivector import SIX_BASIS, sd_asd_coords
from .calculus import GenField, nijenhuis_field
from .errors import DomainError, UsageError
from .gca import BasisTag, change_basis
from .metrics import MetricSpec
from .riemann import christoffel, generalized_curvature, orthonormal_frame
from .twistor import (
    FiberPoint,
    StructureKind,
    TwistorPoint,
    _constraint_block,
    fiber_to_structures,
    structure_from_fiber,
)

#: Minimum allowed value of 1 + pole * a3 before embedding refuses and
#: asks for the opposite pole.
POLE_MARGIN = 0.1

#: Default outer finite difference step on the chart.
DEFAULT_ORACLE_STEP = 1e-2

# Orientation of the fiber rotation in the vertical block, j(x) = s (a x x)
# with s = _VERTICAL_ORIENTATION * handedness.  Pinned by the flat-metric
# runs: the opposite choice reproduces the companion structure that is not
# integrable for any metric, and fails them by a wide margin.
_VERTICAL_ORIENTATION = 1.0

_HORIZONTAL_KINDS = ("h+", "h-")
_VERTICAL_KINDS = ("v", "v*")


def _sign0(x: float) -> int:
    return 1 if x >= 0.0 else -1


def stereo_to_sphere(w: np.ndarray, pole: int) -> np.ndarray:
    """Inverse chart map, exact unit vector for any w."""
    w = np.asarray(w, dtype=float)
    d = 1.0 + float(w @ w)
    return np.array([2.0 * w[0] / d, 2.0 * w[1] / d, pole * (2.0 - d) / d])


def stereo_from_sphere(a: np.ndarray, pole: int, margin: float = POLE_MARGIN) -> np.ndarray:
    den = 1.0 + pole * a[2]
    if den < margin:
        raise DomainError(
            f"fiber point with a3 = {a[2]:.4f} is too close to the pole {-pole}; "
            "re-chart with the opposite pole"
        )
    return np.array([a[0] / den, a[1] / den])


def stereo_jac_to_sphere(w: np.ndarray, pole: int) -> np.ndarray:
    """3x2 Jacobian of stereo_to_sphere at w."""
    w = np.asarray(w, dtype=float)
    d = 1.0 + float(w @ w)
    jac = np.empty((3, 2))
    for k in range(2):
        col = -4.0 * w[k] * np.array([w[0], w[1], pole]) / (d * d)
        col[k] += 2.0 / d
        jac[:, k] = col
    return jac


def stereo_jac_from_sphere(a: np.ndarray, pole: int) -> np.ndarray:
    """2x3 Jacobian of stereo_from_sphere at a (restricted to the sphere)."""
    den = 1.0 + pole * a[2]
    jac = np.zeros((2, 3))
    jac[0, 0] = 1.0 / den
    jac[1, 1] = 1.0 / den
    jac[0, 2] = -pole * a[0] / (den * den)
    jac[1, 2] = -pole * a[1] / (den * den)
    return jac


def _cross_matrix(v: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def _half_coords(m: np.ndarray, sign: int) -> np.ndarray:
    cp, cm = sd_asd_coords(m)
    return cp if sign > 0 else cm


def _validate_selector(sel) -> tuple[str, int]:
    if not (isinstance(sel, tuple) and len(sel) == 2):
        raise UsageError(f"selector must be a (family, index) tuple, got {sel!r}")
    family, idx = sel
    if family in _HORIZONTAL_KINDS:
        if not 0 <= idx < 4:
            raise UsageError(f"horizontal selector index out of range: {sel!r}")
    elif family in _VERTICAL_KINDS:
        if not 0 <= idx < 6:
            raise UsageError(f"vertical selector index out of range: {sel!r}")
    else:
        raise UsageError(f"unknown selector family {family!r}")
    return family, int(idx)


@dataclass(frozen=True)
class OracleResult:
    """One Nijenhuis evaluation: chart components and error estimate.

    value is the stacked (tangent(8), cotangent(8)) result at the half
    step; noise is the sup-norm difference between the full-step and
    half-step evaluations."""

    value: np.ndarray
    noise: float
    step: float
    poles: tuple[int, int]

    @property
    def norm(self) -> float:
        return float(np.abs(self.value).max())

    @property
    def vertical_tangent(self) -> np.ndarray:
        return self.value[4:8]

    @property
    def horizontal_tangent(self) -> np.ndarray:
        return self.value[0:4]


class TwistorChart:
    """Chart data for one metric, component tag and pole choice.

    Caches the orthonormal frame and frame connection per base point, and
    the assembled frame and structure matrices per chart point; a chart
    instance is meant to live for one oracle evaluation."""

    def __init__(self, metric: MetricSpec, tag, poles: tuple[int, int]):
        self.metric = metric
        self.tag = tag
        self.poles = (int(poles[0]), int(poles[1]))
        if self.poles[0] not in (-1, 1) or self.poles[1] not in (-1, 1):
            raise UsageError(f"poles must be +-1, got {poles!r}")
        self._base_cache: dict[bytes, tuple] = {}
        self._frame_cache: dict[bytes, tuple[np.ndarray, np.ndarray]] = {}
        self._structure_cache: dict[tuple, np.ndarray] = {}

    @classmethod
    def for_point(cls, metric: MetricSpec, tp: TwistorPoint) -> "TwistorChart":
        """Chart with poles chosen away from the fiber point."""
        return cls(metric, tp.f.tag, (_sign0(tp.f.a[2]), _sign0(tp.f.b[2])))

    # -- chart maps ----------------------------------------------------

    def embed(self, tp: TwistorPoint) -> np.ndarray:
        if tp.f.tag is not self.tag:
            raise UsageError(f"chart is for component {self.tag}, fiber is {tp.f.tag}")
        wa = stereo_from_sphere(tp.f.a, self.poles[0])
        wb = stereo_from_sphere(tp.f.b, self.poles[1])
        return np.concatenate([tp.p, wa, wb])

    def point(self, z: np.ndarray) -> TwistorPoint:
        z = np.asarray(z, dtype=float)
        a = stereo_to_sphere(z[4:6], self.poles[0])
        b = stereo_to_sphere(z[6:8], self.poles[1])
        return TwistorPoint(z[:4], FiberPoint(a, b, self.tag))

    # -- cached per-point data -----------------------------------------

    def _base_data(self, p: np.ndarray):
        key = p.tobytes()
        hit = self._base_cache.get(key)
        if hit is None:
            frame = orthonormal_frame(self.metric, p)
            conn = christoffel(self.metric, p)
            hit = (frame, conn)
            self._base_cache[key] = hit
        return hit

    def frame8(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Adapted frame over the chart and its inverse.

        Columns 0..3 are horizontal lifts (base frame over the fiber
        velocity of parallel transport), columns 4..7 the coordinate
        fiber directions."""
        z = np.asarray(z, dtype=float)
        key = z.tobytes()
        hit = self._frame_cache.get(key)
        if hit is not None:
            return hit
        frame, conn = self._base_data(z[:4])
        a = stereo_to_sphere(z[4:6], self.poles[0])
        b = stereo_to_sphere(z[6:8], self.poles[1])
        s1, s2 = self.tag.signs
        dwa = stereo_jac_from_sphere(a, self.poles[0])
        dwb = stereo_jac_from_sphere(b, self.poles[1])
        lift = np.empty((4, 4))
        for i in range(4):
            ups = conn.upsilon[i]
            lift[0:2, i] = dwa @ (2.0 * s1 * np.cross(a, _half_coords(ups, s1)))
            lift[2:4, i] = dwb @ (2.0 * s2 * np.cross(b, _half_coords(ups, s2)))
        e8 = np.zeros((8, 8))
        e8[:4, :4] = frame.e
        e8[4:, :4] = lift
        e8[4:, 4:] = np.eye(4)
        e8inv = np.zeros((8, 8))
        e8inv[:4, :4] = frame.einv
        e8inv[4:, :4] = -lift @ frame.einv
        e8inv[4:, 4:] = np.eye(4)
        hit = (e8, e8inv)
        self._frame_cache[key] = hit
        return hit

    def _vertical_block(self, z: np.ndarray) -> np.ndarray:
        """4x4 chart matrix of the fiber rotation on both spheres."""
        a = stereo_to_sphere(z[4:6], self.poles[0])
        b = stereo_to_sphere(z[6:8], self.poles[1])
        s1, s2 = self.tag.signs
        ja = _VERTICAL_ORIENTATION * s1 * (
            stereo_jac_from_sphere(a, self.poles[0])
            @ _cross_matrix(a)
            @ stereo_jac_to_sphere(z[4:6], self.poles[0])
        )
        jb = _VERTICAL_ORIENTATION * s2 * (
            stereo_jac_from_sphere(b, self.poles[1])
            @ _cross_matrix(b)
            @ stereo_jac_to_sphere(z[6:8], self.poles[1])
        )
        out = np.zeros((4, 4))
        out[:2, :2] = ja
        out[2:, 2:] = jb
        return out

    def structure_field(self, kind: StructureKind):
        """Chart matrix field of the requested structure, z -> 16x16."""
        if kind is StructureKind.SEMI:
            raise UsageError("semi-integrability has no pointwise structure matrix")

        def jf(z: np.ndarray) -> np.ndarray:
            z = np.asarray(z, dtype=float)
            key = (kind, z.tobytes())
            hit = self._structure_cache.get(key)
            if hit is not None:
                return hit
            f = self.point(z).f
            if kind is StructureKind.GENJ:
                horiz = change_basis(structure_from_fiber(f), BasisTag.TT).m
            else:
                u1, _ = fiber_to_structures(f)
                horiz = np.zeros((8, 8))
                horiz[:4, :4] = u1
                horiz[4:, 4:] = -u1.T
            jv = self._vertical_block(z)
            adapted = np.zeros((16, 16))
            adapted[0:4, 0:4] = horiz[:4, :4]
            adapted[0:4, 8:12] = horiz[:4, 4:]
            adapted[8:12, 0:4] = horiz[4:, :4]
            adapted[8:12, 8:12] = horiz[4:, 4:]
            adapted[4:8, 4:8] = jv
            adapted[12:16, 12:16] = -jv.T
            e8, e8inv = self.frame8(z)
            e16 = np.zeros((16, 16))
            e16[:8, :8] = e8
            e16[8:, 8:] = e8inv.T
            e16inv = np.zeros((16, 16))
            e16inv[:8, :8] = e8inv
            e16inv[8:, 8:] = e8.T
            hit = e16 @ adapted @ e16inv
            self._structure_cache[key] = hit
            return hit

        return jf

    # -- test fields ---------------------------------------------------

    def basic_field(self, selector) -> GenField:
        family, idx = _validate_selector(selector)
        if family in _HORIZONTAL_KINDS:
            sign = 1.0 if family == "h+" else -1.0

            def vec(z):
                e8, _ = self.frame8(np.asarray(z, dtype=float))
                return e8[:, idx]

            def form(z):
                _, e8inv = self.frame8(np.asarray(z, dtype=float))
                return sign * e8inv[idx, :]

            return GenField(vec, form)

        gen = SIX_BASIS[idx]
        s1, s2 = self.tag.signs
        ca = _half_coords(gen, s1)
        cb = _half_coords(gen, s2)

        def fiber_motion(z):
            z = np.asarray(z, dtype=float)
            a = stereo_to_sphere(z[4:6], self.poles[0])
            b = stereo_to_sphere(z[6:8], self.poles[1])
            out = np.zeros(8)
            out[4:6] = stereo_jac_from_sphere(a, self.poles[0]) @ (2.0 * s1 * np.cross(a, ca))
            out[6:8] = stereo_jac_from_sphere(b, self.poles[1]) @ (2.0 * s2 * np.cross(b, cb))
            return out

        zero = lambda z: np.zeros(8)
        if family == "v":
            return GenField(fiber_motion, zero)
        return GenField(zero, fiber_motion)


def nijenhuis_numeric(
    metric: MetricSpec,
    tp: TwistorPoint,
    selectors,
    kind: StructureKind,
    step: float = DEFAULT_ORACLE_STEP,
    poles: tuple[int, int] | str = "auto",
) -> OracleResult:
    """Generalized Nijenhuis tensor on two selector fields at a point.

    Evaluates at the given step and at half of it; the reported value is
    the half-step one, the noise their sup-norm difference."""
    if len(selectors) != 2:
        raise UsageError("selectors must be a pair of (family, index) tuples")
    if step <= 0.0:
        raise UsageError(f"step must be positive, got {step}")
    if poles == "auto":
        chart = TwistorChart.for_point(metric, tp)
    else:
        chart = TwistorChart(metric, tp.f.tag, poles)
    metric.require_interior(tp.p, 4.0 * step + 2.0 * metric.fd_step)
    z0 = chart.embed(tp)
    jf = chart.structure_field(kind)
    y = chart.basic_field(selectors[0])
    zf = chart.basic_field(selectors[1])
    full = nijenhuis_field(jf, y, zf, z0, h=step)
    half = nijenhuis_field(jf, y, zf, z0, h=0.5 * step)
    noise = float(np.abs(full - half).max())
    return OracleResult(value=half, noise=noise, step=step, poles=chart.poles)


def predicted_horizontal_value(
    metric: MetricSpec,
    tp: TwistorPoint,
    sel_y,
    sel_z,
    kind: StructureKind,
    poles: tuple[int, int] | str = "auto",
) -> np.ndarray:
    """Closed-form Nijenhuis value for a pair of horizontal test fields.

    The tensor on two horizontal lifts is purely vertical: each sphere
    block is the curvature commutator [u_c, R(w1) + u_c R(w2)] with the
    wedge arguments drawn from the structures the two fields select.
    Returned in chart components for direct comparison with the finite
    difference value."""
    fam_y, i = _validate_selector(sel_y)
    fam_z, j = _validate_selector(sel_z)
    if fam_y not in _HORIZONTAL_KINDS or fam_z not in _HORIZONTAL_KINDS:
        raise UsageError("closed form applies to horizontal selector pairs only")
    if kind is StructureKind.SEMI:
        raise UsageError("semi-integrability has no pointwise structure matrix")
    if poles == "auto":
        chart = TwistorChart.for_point(metric, tp)
    else:
        chart = TwistorChart(metric, tp.f.tag, poles)
    u1, u2 = fiber_to_structures(tp.f)
    if kind is StructureKind.ALMOST_J1:
        ua, ub = u1, u1
    else:
        ua = u1 if fam_y == "h+" else u2
        ub = u1 if fam_z == "h+" else u2
    gc = generalized_curvature(metric, tp.p)
    s1, s2 = tp.f.tag.signs
    block_a = _constraint_block(gc, ua, ub, u1, i, j)
    block_b = _constraint_block(gc, ua, ub, u2, i, j)
    out = np.zeros(16)
    out[4:6] = stereo_jac_from_sphere(tp.f.a, chart.poles[0]) @ _half_coords(block_a, s1)
    out[6:8] = stereo_jac_from_sphere(tp.f.b, chart.poles[1]) @ _half_coords(block_b, s2)
    return out
