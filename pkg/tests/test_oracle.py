import numpy as np
import pytest

from gentwistor.errors import DomainError, UsageError
from gentwistor.gca import ComponentTag
from gentwistor.metrics import metric_by_name
from gentwistor.oracle import (
    TwistorChart,
    nijenhuis_numeric,
    predicted_horizontal_value,
    stereo_from_sphere,
    stereo_jac_from_sphere,
    stereo_jac_to_sphere,
    stereo_to_sphere,
)
from gentwistor.twistor import FiberPoint, StructureKind, TwistorPoint, random_fiber

RNG = np.random.default_rng(20240818)

# interior probe points, well away from box boundaries
P_UNIT = np.array([0.12, -0.07, 0.2, 0.05])
P_EH = np.array([2.3, 2.2, 2.5, 2.4])

# one selector pair per qualitatively distinct family combination
ALL_PAIR_TYPES = [
    (("h+", 0), ("h+", 1)),
    (("h-", 2), ("h-", 3)),
    (("h+", 0), ("h-", 2)),
    (("h+", 1), ("v", 0)),
    (("h-", 3), ("v", 4)),
    (("v", 1), ("v", 5)),
    (("h+", 2), ("v*", 1)),
    (("v", 0), ("v*", 3)),
    (("v*", 2), ("v*", 4)),
]


def _tp(p, tag, rng=None):
    f = random_fiber(tag, rng or RNG)
    return TwistorPoint(np.asarray(p, float), f)


# ---------------------------------------------------------------------------
# chart maps


def test_stereo_roundtrip_and_jacobian_chain():
    for pole in (1, -1):
        for _ in range(5):
            w = RNG.normal(size=2)
            a = stereo_to_sphere(w, pole)
            assert abs(np.linalg.norm(a) - 1.0) < 1e-14
            np.testing.assert_allclose(stereo_from_sphere(a, pole), w, atol=1e-12)
            chain = stereo_jac_from_sphere(a, pole) @ stereo_jac_to_sphere(w, pole)
            np.testing.assert_allclose(chain, np.eye(2), atol=1e-12)


def test_chart_embed_roundtrip():
    tp = _tp(P_UNIT, ComponentTag.PM)
    chart = TwistorChart.for_point(metric_by_name("s4"), tp)
    back = chart.point(chart.embed(tp))
    np.testing.assert_allclose(back.p, tp.p, atol=1e-15)
    np.testing.assert_allclose(back.f.a, tp.f.a, atol=1e-14)
    np.testing.assert_allclose(back.f.b, tp.f.b, atol=1e-14)


def test_pole_guard_and_rechart():
    # fiber sitting almost at the south pole of the a sphere
    f = FiberPoint.normalized([0.03, 0.0, -1.0], [0.0, 1.0, 0.0], ComponentTag.PP)
    tp = TwistorPoint(P_UNIT, f)
    m = metric_by_name("s4")
    bad = TwistorChart(m, ComponentTag.PP, (1, 1))
    with pytest.raises(DomainError):
        bad.embed(tp)
    # automatic pole selection flips the chart and succeeds
    good = TwistorChart.for_point(m, tp)
    assert good.poles[0] == -1
    good.embed(tp)


def test_selector_and_argument_validation():
    m = metric_by_name("s4")
    tp = _tp(P_UNIT, ComponentTag.PP)
    with pytest.raises(UsageError):
        nijenhuis_numeric(m, tp, (("h+", 0),), StructureKind.GENJ)
    with pytest.raises(UsageError):
        nijenhuis_numeric(m, tp, (("h+", 5), ("h+", 1)), StructureKind.GENJ)
    with pytest.raises(UsageError):
        nijenhuis_numeric(m, tp, (("x", 0), ("h+", 1)), StructureKind.GENJ)
    with pytest.raises(UsageError):
        nijenhuis_numeric(m, tp, (("v", 6), ("h+", 1)), StructureKind.GENJ)
    with pytest.raises(UsageError):
        nijenhuis_numeric(m, tp, (("h+", 0), ("h+", 1)), StructureKind.SEMI)
    with pytest.raises(UsageError):
        nijenhuis_numeric(m, tp, (("h+", 0), ("h+", 1)), StructureKind.GENJ, step=0.0)
    edge = TwistorPoint(np.array([0.99, 0.0, 0.0, 0.0]), tp.f)
    with pytest.raises(DomainError):
        nijenhuis_numeric(m, edge, (("h+", 0), ("h+", 1)), StructureKind.GENJ)
    with pytest.raises(UsageError):
        predicted_horizontal_value(m, tp, ("v", 0), ("h+", 1), StructureKind.GENJ)


def test_structure_field_is_an_almost_structure():
    # pointwise algebra of the assembled matrix field, including off the
    # embedding point and for a curved frame
    q16 = np.zeros((16, 16))
    q16[:8, 8:] = np.eye(8)
    q16[8:, :8] = np.eye(8)
    for name, p in (("s4", P_UNIT), ("eguchi-hanson", P_EH)):
        m = metric_by_name(name)
        tp = _tp(p, ComponentTag.PM)
        chart = TwistorChart.for_point(m, tp)
        z0 = chart.embed(tp)
        for kind in (StructureKind.GENJ, StructureKind.ALMOST_J1):
            jf = chart.structure_field(kind)
            for _ in range(3):
                j = jf(z0 + 0.02 * RNG.normal(size=8))
                np.testing.assert_allclose(j @ j, -np.eye(16), atol=1e-9)
                np.testing.assert_allclose(j.T @ q16 @ j, q16, atol=1e-9)


# ---------------------------------------------------------------------------
# flat space: everything vanishes, for every pair type and both kinds


def test_flat_all_pair_types_vanish():
    m = metric_by_name("flat")
    for tag in (ComponentTag.PP, ComponentTag.PM):
        tp = _tp(np.array([0.1, -0.15, 0.2, 0.05]), tag)
        for kind in (StructureKind.GENJ, StructureKind.ALMOST_J1):
            for sel in ALL_PAIR_TYPES:
                r = nijenhuis_numeric(m, tp, sel, kind)
                assert r.norm < 1e-5, (tag, kind, sel, r.norm)


def test_flat_perturbed_vanishes_with_nontrivial_lift():
    # curved-looking chart of the flat metric: the frame connection and
    # the horizontal lift are nonzero, the tensor still vanishes
    m = metric_by_name("flat-perturbed")
    tp = _tp(np.array([0.1, -0.15, 0.2, 0.05]), ComponentTag.PM)
    chart = TwistorChart.for_point(m, tp)
    e8, _ = chart.frame8(chart.embed(tp))
    assert np.abs(e8[4:, :4]).max() > 1e-4
    for sel in [(("h+", 0), ("h+", 1)), (("h+", 2), ("h-", 3)), (("h-", 1), ("v", 3))]:
        r = nijenhuis_numeric(m, tp, sel, StructureKind.GENJ)
        assert r.norm < 1e-4, (sel, r.norm)


# ---------------------------------------------------------------------------
# round sphere: closed form agreement and component verdicts


def test_unit_sphere_horizontal_pairs_match_closed_form():
    m = metric_by_name("s4")
    f = FiberPoint(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), ComponentTag.PP)
    tp = TwistorPoint(P_UNIT, f)
    seen_nonzero = False
    for sy, sz in [
        (("h+", 0), ("h+", 1)),
        (("h-", 0), ("h-", 1)),
        (("h+", 0), ("h-", 1)),
        (("h+", 2), ("h-", 3)),
    ]:
        r = nijenhuis_numeric(m, tp, (sy, sz), StructureKind.GENJ)
        pred = predicted_horizontal_value(m, tp, sy, sz, StructureKind.GENJ)
        tol = 10.0 * r.noise + 1e-6
        np.testing.assert_allclose(r.value, pred, atol=tol)
        seen_nonzero = seen_nonzero or np.abs(pred).max() > 1.0
    assert seen_nonzero  # the comparison must not be vacuous


def test_unit_sphere_j1_matches_its_reduction():
    m = metric_by_name("s4")
    f = FiberPoint(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), ComponentTag.PP)
    tp = TwistorPoint(P_UNIT, f)
    for sy, sz in [(("h+", 0), ("h+", 3)), (("h-", 1), ("h-", 2))]:
        r = nijenhuis_numeric(m, tp, (sy, sz), StructureKind.ALMOST_J1)
        pred = predicted_horizontal_value(m, tp, sy, sz, StructureKind.ALMOST_J1)
        tol = 10.0 * r.noise + 1e-6
        # the closed form gives the tangent part; its vertical block is
        # the whole of it for lifted arguments
        np.testing.assert_allclose(r.value[4:8], pred[4:8], atol=tol)
        np.testing.assert_allclose(r.value[:4], 0.0, atol=tol)
        assert np.abs(pred[4:8]).max() > 1.0


def test_unit_sphere_vertical_pairs_vanish_on_all_components():
    # lifted-field / fiber-rotation pairs carry no curvature obstruction
    m = metric_by_name("s4")
    for tag in ComponentTag:
        tp = _tp(P_UNIT, tag)
        for sel in [(("h+", 1), ("v", 0)), (("h-", 2), ("v", 4)), (("v", 1), ("v", 5))]:
            r = nijenhuis_numeric(m, tp, sel, StructureKind.GENJ)
            assert r.norm < 1e-4, (tag, sel, r.norm)


def test_unit_sphere_mixed_component_integrable_every_pair_type():
    # the finite difference referee for the headline finding: on the
    # mixed components of the constant curvature space the full tensor
    # vanishes for every pair type, so the generalized structure is
    # integrable there even though the scalar curvature is 12, not 0
    m = metric_by_name("s4")
    for tag in (ComponentTag.PM, ComponentTag.MP):
        tp = _tp(P_UNIT, tag)
        for sel in ALL_PAIR_TYPES:
            r = nijenhuis_numeric(m, tp, sel, StructureKind.GENJ)
            assert r.norm < 1e-4, (tag, sel, r.norm)


def test_unit_sphere_pure_component_obstructed():
    # contrast for the previous test: on a pure component the same
    # referee sees the scalar curvature obstruction at full size
    m = metric_by_name("s4")
    f = FiberPoint(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), ComponentTag.PP)
    tp = TwistorPoint(P_UNIT, f)
    worst = 0.0
    for sel in [(("h-", 0), ("h-", 1)), (("h-", 0), ("h-", 2)), (("h+", 0), ("h+", 3))]:
        worst = max(worst, nijenhuis_numeric(m, tp, sel, StructureKind.GENJ).norm)
    assert worst > 0.5


def test_unit_sphere_mixed_j1_and_asd_instanton():
    m = metric_by_name("s4")
    pairs = [(("h+", 0), ("h+", 1)), (("h+", 1), ("v", 0))]
    for tag in (ComponentTag.PM, ComponentTag.MP):
        tp = _tp(P_UNIT, tag)
        for sel in pairs:
            r = nijenhuis_numeric(m, tp, sel, StructureKind.ALMOST_J1)
            assert r.norm < 1e-4, (tag, sel, r.norm)
    # anti-self-dual Ricci-flat metric: same verdict on the MP component
    me = metric_by_name("eguchi-hanson")
    tp = _tp(P_EH, ComponentTag.MP)
    for sel in pairs:
        r = nijenhuis_numeric(me, tp, sel, StructureKind.ALMOST_J1)
        assert r.norm < 1e-4, (sel, r.norm)


# ---------------------------------------------------------------------------
# numerics of the estimate itself


def test_noise_estimate_and_step_stability():
    m = metric_by_name("s4")
    f = FiberPoint(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), ComponentTag.PP)
    tp = TwistorPoint(P_UNIT, f)
    sel = (("h-", 0), ("h-", 1))
    r1 = nijenhuis_numeric(m, tp, sel, StructureKind.GENJ, step=1e-2)
    r2 = nijenhuis_numeric(m, tp, sel, StructureKind.GENJ, step=5e-3)
    assert 0.0 < r1.noise < 1e-5
    np.testing.assert_allclose(r1.value, r2.value, atol=1e-6)


def test_pole_choice_does_not_change_verdicts():
    m = metric_by_name("s4")
    f = FiberPoint.normalized([0.3, 0.2, 0.4], [0.1, 0.5, 0.3], ComponentTag.PM)
    tp = TwistorPoint(P_UNIT, f)
    sel = (("h+", 0), ("h-", 1))
    for poles in ((1, 1), (-1, -1), (1, -1)):
        r = nijenhuis_numeric(m, tp, sel, StructureKind.GENJ, poles=poles)
        assert r.poles == poles
        assert r.norm < 1e-4
    f2 = FiberPoint(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), ComponentTag.PP)
    tp2 = TwistorPoint(P_UNIT, f2)
    for poles in ((1, 1), (-1, -1)):
        r = nijenhuis_numeric(m, tp2, (("h-", 0), ("h-", 1)), StructureKind.GENJ, poles=poles)
        assert r.norm > 0.5
