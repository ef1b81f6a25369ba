import numpy as np
import pytest

from gentwistor.errors import InvalidInputError, UsageError
from gentwistor.gca import BasisTag, ComponentTag, classify_component
from gentwistor.metrics import MetricSpec, metric_by_name
from gentwistor.riemann import GeneralizedCurvature, generalized_curvature
from gentwistor.twistor import (
    FiberPoint,
    _constraint_block,
    constraints_genJ,
    constraints_J1,
    fiber_to_structures,
    projector_mixed_residual,
    random_fiber,
    semi_integrability_residual,
    sphere_directions,
    structure_from_fiber,
    blockwise_obstruction_matrix,
    doubled_obstruction_matrix,
    type_of_genJ,
)

RNG = np.random.default_rng(20240817)


# ---------------------------------------------------------------------------
# independent space-form model: raw wedge matrices, curvature acting as the
# identity on bivectors.  No imports from the package's bivector module, so
# a shared convention mistake there cannot hide.

def _w(x, y):
    return np.outer(y, x) - np.outer(x, y)


_E = np.eye(4)
_PLUS = (
    _w(_E[0], _E[1]) + _w(_E[2], _E[3]),
    _w(_E[0], _E[2]) - _w(_E[1], _E[3]),
    _w(_E[0], _E[3]) + _w(_E[1], _E[2]),
)
_MINUS = (
    _w(_E[0], _E[1]) - _w(_E[2], _E[3]),
    _w(_E[0], _E[2]) + _w(_E[1], _E[3]),
    _w(_E[0], _E[3]) - _w(_E[1], _E[2]),
)


def _model_u(vec, sign):
    triple = _PLUS if sign > 0 else _MINUS
    return sum(c * t for c, t in zip(vec, triple))


def _model_family_max(ua, ub, uc, lam=1.0):
    """max_(i != j) ||[uc, lam*(w1 + uc w2)]||_F with R_c = lam * Id."""
    best = 0.0
    for i in range(4):
        for j in range(4):
            if i == j:
                continue
            w1 = _w(_E[i], _E[j]) - _w(ua @ _E[i], ub @ _E[j])
            w2 = _w(ua @ _E[i], _E[j]) + _w(_E[i], ub @ _E[j])
            inner = lam * (w1 + uc @ w2)
            best = max(best, float(np.linalg.norm(uc @ inner - inner @ uc)))
    return best


def _model_norms(f: FiberPoint, lam=1.0):
    s1, s2 = f.tag.signs
    u1 = _model_u(f.a, s1)
    u2 = _model_u(f.b, s2)
    combos = {
        "C1": (u1, u1, u1),
        "C2": (u1, u1, u2),
        "C3": (u2, u2, u1),
        "C4": (u2, u2, u2),
        "C5": (u1, u2, u1),
        "C6": (u1, u2, u2),
    }
    return {k: _model_family_max(*v, lam=lam) for k, v in combos.items()}


# ---------------------------------------------------------------------------
# fiber points

def test_fiber_point_rejects_non_unit():
    with pytest.raises(InvalidInputError):
        FiberPoint(np.array([1.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0]), ComponentTag.PP)
    with pytest.raises(UsageError):
        FiberPoint(np.array([1.0, 0.0]), np.array([0.0, 0.0, 1.0]), ComponentTag.PP)


def test_fiber_point_normalized():
    f = FiberPoint.normalized([3.0, 0.0, 0.0], [0.0, 0.0, -5.0], ComponentTag.PM)
    assert np.allclose(f.a, [1.0, 0.0, 0.0])
    assert np.allclose(f.b, [0.0, 0.0, -1.0])
    with pytest.raises(InvalidInputError):
        FiberPoint.normalized([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], ComponentTag.PM)


def test_random_fiber_prefix_stable():
    r1 = np.random.default_rng(99)
    r2 = np.random.default_rng(99)
    first = [random_fiber(ComponentTag.PP, r1) for _ in range(3)]
    again = [random_fiber(ComponentTag.PP, r2) for _ in range(5)]
    for f, g in zip(first, again):
        assert np.array_equal(f.a, g.a) and np.array_equal(f.b, g.b)


def test_sphere_directions():
    d = sphere_directions(17)
    assert d.shape == (17, 3)
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0, atol=1e-12)
    dots = d @ d.T
    np.fill_diagonal(dots, -1.0)
    assert dots.max() < 1.0 - 1e-3  # pairwise distinct


def test_unit_blocks_square_to_minus_identity():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        f = random_fiber(ComponentTag(rng.choice(["++", "--", "+-", "-+"])), rng)
        u1, u2 = fiber_to_structures(f)
        assert np.allclose(u1 @ u1, -np.eye(4), atol=1e-12)
        assert np.allclose(u2 @ u2, -np.eye(4), atol=1e-12)


def test_structure_round_trip_classification():
    rng = np.random.default_rng(6)
    for tag in ComponentTag:
        for _ in range(5):
            f = random_fiber(tag, rng)
            s = structure_from_fiber(f)
            assert classify_component(s) is tag
            assert s.basis is BasisTag.PM


# ---------------------------------------------------------------------------
# type jumps

def test_type_grid_pure_components():
    dirs = sphere_directions(17)
    for tag in (ComponentTag.PP, ComponentTag.MM):
        for k in range(17):
            for l in range(17):
                f = FiberPoint(dirs[k], dirs[l], tag)
                expected = 4 if k == l else 2
                assert type_of_genJ(f) == expected, (tag, k, l)


def test_type_grid_mixed_components():
    dirs = sphere_directions(17)
    for tag in (ComponentTag.PM, ComponentTag.MP):
        for k in range(17):
            for l in range(17):
                f = FiberPoint(dirs[k], dirs[l], tag)
                assert type_of_genJ(f) == 3, (tag, k, l)


# ---------------------------------------------------------------------------
# residuals on the catalog

def _fibers(tag, n, seed):
    rng = np.random.default_rng(seed)
    return [random_fiber(tag, rng) for _ in range(n)]


def test_flat_residuals_vanish():
    m = metric_by_name("flat")
    p = np.array([0.2, -0.3, 0.1, 0.4])
    gc = generalized_curvature(m, p)
    for tag in ComponentTag:
        for f in _fibers(tag, 4, 11):
            assert constraints_genJ(m, p, f, gc=gc).max_norm < 1e-9
            assert constraints_J1(m, p, f, gc=gc).max_norm < 1e-9
            if tag.mixed:
                assert semi_integrability_residual(m, p, f, gc=gc) < 1e-9


def test_flat_perturbed_residuals_small():
    m = metric_by_name("flat-perturbed")
    p = np.array([0.3, -0.4, 0.2, 0.6])
    gc = generalized_curvature(m, p)
    for tag in ComponentTag:
        for f in _fibers(tag, 3, 12):
            assert constraints_genJ(m, p, f, gc=gc).max_norm < 1e-6
            assert constraints_J1(m, p, f, gc=gc).max_norm < 1e-6


def test_s4_matches_space_form_model():
    """Oracle test: on the round sphere the curvature acts as the identity
    on bivectors, so every family must match the closed-form model."""
    m = metric_by_name("s4")
    p = np.array([0.05, -0.1, 0.2, 0.15])
    gc = generalized_curvature(m, p)
    rng = np.random.default_rng(13)
    for tag in ComponentTag:
        for _ in range(3):
            f = random_fiber(tag, rng)
            got = constraints_genJ(m, p, f, gc=gc)
            want = _model_norms(f)
            for label in got.labels:
                assert got.norms[label] == pytest.approx(want[label], abs=1e-3), (
                    tag,
                    label,
                )


def test_s4_axis_fiber_frozen_value():
    # a along the first axis, b along the second: the C2 family reduces to
    # the bracket of the second generator with (generator + product), of
    # Frobenius norm 4 at scalar curvature 12.
    m = metric_by_name("s4")
    p = np.zeros(4)
    f = FiberPoint(np.array([1.0, 0, 0]), np.array([0.0, 1.0, 0]), ComponentTag.PP)
    r = constraints_genJ(m, p, f)
    assert r.norms["C2"] == pytest.approx(4.0, abs=5e-4)
    assert r.norms["C1"] < 1e-6
    assert r.norms["C4"] < 1e-6


def test_s4_component_profile():
    """Round sphere: scalar curvature obstructs the pure components, while
    the mixed components are clean for both structures (conformally flat
    and Einstein is exactly what the six families detect there)."""
    m = metric_by_name("s4")
    p = np.array([0.05, -0.1, 0.2, 0.15])
    gc = generalized_curvature(m, p)
    for tag in (ComponentTag.PP, ComponentTag.MM):
        for f in _fibers(tag, 3, 21):
            r = constraints_genJ(m, p, f, gc=gc)
            assert r.max_norm > 0.1
            assert r.norms["C2"] > 0.1
            assert constraints_J1(m, p, f, gc=gc).max_norm > 0.1
    for tag in (ComponentTag.PM, ComponentTag.MP):
        for f in _fibers(tag, 3, 22):
            assert constraints_genJ(m, p, f, gc=gc).max_norm < 1e-6
            assert constraints_J1(m, p, f, gc=gc).max_norm < 1e-6
            assert semi_integrability_residual(m, p, f, gc=gc) < 1e-6


def test_eguchi_hanson_component_profile():
    m = metric_by_name("eguchi-hanson")
    p = np.array([2.3, 2.2, 2.5, 2.4])
    gc = generalized_curvature(m, p)
    for f in _fibers(ComponentTag.MM, 4, 31):
        assert constraints_genJ(m, p, f, gc=gc).max_norm < 1e-6
    for f in _fibers(ComponentTag.PP, 4, 32):
        assert constraints_genJ(m, p, f, gc=gc).max_norm > 1e-3
    for tag in (ComponentTag.PM, ComponentTag.MP):
        for f in _fibers(tag, 4, 33):
            assert constraints_genJ(m, p, f, gc=gc).max_norm > 1e-3
            assert semi_integrability_residual(m, p, f, gc=gc) < 1e-6
    for f in _fibers(ComponentTag.MP, 4, 34):
        assert constraints_J1(m, p, f, gc=gc).max_norm < 1e-6
    for f in _fibers(ComponentTag.PM, 4, 35):
        assert constraints_J1(m, p, f, gc=gc).max_norm > 1e-3


def test_schwarzschild_component_profile():
    m = metric_by_name("schwarzschild")
    p = np.array([2.4, 2.2, 2.5, 2.4])
    gc = generalized_curvature(m, p)
    for tag in ComponentTag:
        for f in _fibers(tag, 3, 41):
            assert constraints_genJ(m, p, f, gc=gc).max_norm > 0.01
            assert constraints_J1(m, p, f, gc=gc).max_norm > 0.01
            if tag.mixed:
                assert semi_integrability_residual(m, p, f, gc=gc) < 1e-6


def test_fubini_study_component_profile():
    m = metric_by_name("fubini-study")
    p = np.array([0.1, -0.2, 0.15, 0.05])
    gc = generalized_curvature(m, p)
    for f in _fibers(ComponentTag.MP, 4, 51):
        assert constraints_J1(m, p, f, gc=gc).max_norm < 1e-6
        assert semi_integrability_residual(m, p, f, gc=gc) < 1e-6
    for f in _fibers(ComponentTag.PM, 4, 52):
        assert constraints_J1(m, p, f, gc=gc).max_norm > 1e-3
    # the self-dual Weyl part is clean, so the obstruction on the minus
    # pure component is pure scalar curvature
    for f in _fibers(ComponentTag.MM, 4, 53):
        r = constraints_genJ(m, p, f, gc=gc)
        assert r.max_norm > 0.1
        assert r.norms["C1"] < 1e-4  # wminus-family clean
    for tag in ComponentTag:
        for f in _fibers(tag, 2, 54):
            assert constraints_genJ(m, p, f, gc=gc).max_norm > 0.1


def test_orientation_swap_exchanges_pure_components():
    """Swapping two coordinates reverses orientation, so the component
    that was integrable becomes obstructed and vice versa."""
    base = metric_by_name("eguchi-hanson")
    perm = np.eye(4)[[0, 1, 3, 2]]

    def flipped(x):
        return perm.T @ base.g(perm @ x) @ perm

    m = MetricSpec(
        name="eguchi-hanson-flipped",
        lo=base.lo,
        hi=base.hi,
        g=flipped,
        provenance="orientation-reversed coordinate relabeling",
    )
    p = np.array([2.3, 2.2, 2.5, 2.4])
    gc = generalized_curvature(m, p)
    for f in _fibers(ComponentTag.PP, 3, 61):
        assert constraints_genJ(m, p, f, gc=gc).max_norm < 1e-6
    for f in _fibers(ComponentTag.MM, 3, 62):
        assert constraints_genJ(m, p, f, gc=gc).max_norm > 1e-3


# ---------------------------------------------------------------------------
# doubled path and algebraic identities

def test_doubled_path_matches_block_assembly():
    mats = [metric_by_name("s4"), metric_by_name("eguchi-hanson")]
    points = [np.array([0.05, -0.1, 0.2, 0.15]), np.array([2.3, 2.2, 2.5, 2.4])]
    rng = np.random.default_rng(71)
    cached = [generalized_curvature(m, p) for m, p in zip(mats, points)]
    for _ in range(100):
        k = int(rng.integers(2))
        m, p, gc = mats[k], points[k], cached[k]
        tag = ComponentTag(rng.choice(["++", "--", "+-", "-+"]))
        f = random_fiber(tag, rng)
        i, j = rng.choice(4, size=2, replace=False)
        args = (int(rng.integers(1, 3)), int(rng.integers(1, 3)))
        full = doubled_obstruction_matrix(m, p, f, int(i), int(j), args=args, gc=gc)
        blocks = blockwise_obstruction_matrix(m, p, f, int(i), int(j), args=args, gc=gc)
        assert np.allclose(full, blocks, atol=1e-10)


def test_obstruction_linear_in_curvature():
    m = metric_by_name("s4")
    p = np.array([0.05, -0.1, 0.2, 0.15])
    gc = generalized_curvature(m, p)
    doubled = GeneralizedCurvature(
        frame=gc.frame,
        connection=gc.connection,
        fpairs=tuple(2.0 * fp for fp in gc.fpairs),
    )
    f = random_fiber(ComponentTag.PP, np.random.default_rng(72))
    r1 = doubled_obstruction_matrix(m, p, f, 0, 2, gc=gc)
    r2 = doubled_obstruction_matrix(m, p, f, 0, 2, gc=doubled)
    assert np.allclose(r2, 2.0 * r1, atol=1e-12)


def test_projector_residual_is_family_average():
    m = metric_by_name("eguchi-hanson")
    p = np.array([2.3, 2.2, 2.5, 2.4])
    gc = generalized_curvature(m, p)
    rng = np.random.default_rng(73)
    for tag in ComponentTag:
        f = random_fiber(tag, rng)
        u1, u2 = fiber_to_structures(f)
        blocks = {1: u1, 2: u2}
        for first in (1, 2):
            for comm in (1, 2):
                got = projector_mixed_residual(m, p, f, 0, 3, first=first, comm=comm, gc=gc)
                ua, uc = blocks[first], blocks[comm]
                want = 0.5 * (
                    _constraint_block(gc, ua, u1, uc, 0, 3)
                    + _constraint_block(gc, ua, u2, uc, 0, 3)
                )
                assert np.allclose(got, want, atol=1e-12)


def test_semi_equals_second_family_on_mixed():
    m = metric_by_name("schwarzschild")
    p = np.array([2.4, 2.2, 2.5, 2.4])
    gc = generalized_curvature(m, p)
    rng = np.random.default_rng(74)
    for tag in (ComponentTag.PM, ComponentTag.MP):
        f = random_fiber(tag, rng)
        semi = semi_integrability_residual(m, p, f, gc=gc)
        full = constraints_J1(m, p, f, gc=gc)
        assert semi == pytest.approx(full.norms["C2'"], rel=1e-12)


def test_semi_rejects_pure_components():
    m = metric_by_name("flat")
    f = random_fiber(ComponentTag.PP, np.random.default_rng(75))
    with pytest.raises(UsageError):
        semi_integrability_residual(m, np.zeros(4), f)
