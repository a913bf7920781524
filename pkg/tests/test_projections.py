import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from projderiv.projections import (
    ball,
    brute_force_project,
    l1_ball,
    l1_projection_set_contains,
    poly_subspace,
    positive_cone,
    project_ball_l1_selection,
    project_ball_lp,
    project_poly,
    project_positive_cone,
)
from projderiv.spaces import (
    c01_space,
    dual,
    duality_map_l1_selection,
    l1_space,
    lp_space,
    norm,
    pairing,
    primal,
)

L24 = lp_space(2.0, 2)
C513 = c01_space(513)

entry = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


def test_ball_projection_examples():
    inside = primal(L24, [0.1, 0.2])
    assert project_ball_lp(inside, 1.0) is inside
    out = project_ball_lp(primal(L24, [3, 4]), 1.0)
    assert np.allclose(out.values, [0.6, 0.8], atol=1e-15)
    boundary = primal(L24, [0.6, 0.8])
    assert project_ball_lp(boundary, 1.0) is boundary


def test_cone_projection_examples():
    sp = lp_space(2.0, 3)
    assert np.array_equal(project_positive_cone(primal(sp, [1, -2, 3])).values, [1, 0, 3])
    assert norm(project_positive_cone(primal(sp, [-1, -2, 0]))) == 0.0


@given(st.lists(entry, min_size=3, max_size=3), st.floats(min_value=0, max_value=4))
def test_cone_positive_homogeneous(vals, lam):
    sp = lp_space(2.0, 3)
    x = primal(sp, vals)
    left = project_positive_cone(lam * x)
    right = lam * project_positive_cone(x)
    assert np.allclose(left.values, right.values, atol=1e-12)


def test_l1_selection_examples():
    sp = l1_space(3)
    sel = project_ball_l1_selection(primal(sp, [2, 1, 0]), 1.0)
    assert sel.selection_only
    assert np.allclose(sel.point.values, [2 / 3, 1 / 3, 0])
    inside = primal(sp, [0.2, -0.3, 0.1])
    sel2 = project_ball_l1_selection(inside, 1.0)
    assert sel2.point is inside and not sel2.selection_only


def test_l1_selection_variational_inequality(rng):
    sp = l1_space(4)
    x = primal(sp, [2.0, 1.0, 0.5, 0.25])
    r = 1.0
    sel = project_ball_l1_selection(x, r).point
    jx = duality_map_l1_selection(x).functional
    for _ in range(100):
        y = rng.normal(size=4)
        y = primal(sp, r * rng.uniform(0, 1) * y / np.sum(np.abs(y)))
        assert pairing(jx, sel - y) >= -1e-12


def test_l1_projection_set_membership():
    sp = l1_space(3)
    x = primal(sp, [2.0, 1.0, 0.0])
    assert l1_projection_set_contains(x, 1.0, primal(sp, [2 / 3, 1 / 3, 0.0]))
    assert l1_projection_set_contains(x, 1.0, primal(sp, [1.0, 0.0, 0.0]))
    assert not l1_projection_set_contains(x, 1.0, primal(sp, [0.0, 0.0, 1.0]))


def test_project_poly_examples():
    f = primal(C513, C513.grid**2)
    res = project_poly(f, 1)
    assert abs(res.error - 0.125) <= 1e-9
    poly_f = primal(C513, 0.5 - 0.25 * C513.grid)
    assert project_poly(poly_f, 1).error <= 1e-12
    shifted = project_poly(primal(C513, f.values + 0.3), 1)
    assert np.max(
        np.abs(shifted.polynomial(C513.grid) - (res.polynomial(C513.grid) + 0.3))
    ) <= 1e-8


@given(st.sampled_from([1.5, 2.0, 3.0]), st.lists(entry, min_size=3, max_size=3))
def test_ball_projection_idempotent_exactly(p, vals):
    sp = lp_space(p, 3)
    x = primal(sp, vals)
    once = project_ball_lp(x, 1.0)
    twice = project_ball_lp(once, 1.0)
    assert np.array_equal(once.values, twice.values)
    assert norm(once) <= 1.0 + 1e-12


@given(st.lists(entry, min_size=3, max_size=3))
def test_cone_and_l1_idempotent_exactly(vals):
    spc = lp_space(2.0, 3)
    x = primal(spc, vals)
    once = project_positive_cone(x)
    assert np.array_equal(once.values, project_positive_cone(once).values)
    spl = l1_space(3)
    xl = primal(spl, vals)
    sel = project_ball_l1_selection(xl, 1.0).point
    again = project_ball_l1_selection(sel, 1.0).point
    assert np.array_equal(sel.values, again.values)


def test_hilbert_nonexpansive_and_variational(rng):
    sp = lp_space(2.0, 3)
    for _ in range(500):
        x = primal(sp, rng.normal(size=3) * 2)
        y = primal(sp, rng.normal(size=3) * 2)
        assert norm(project_ball_lp(x, 1.0) - project_ball_lp(y, 1.0)) <= norm(x - y) + 1e-12
        assert norm(
            project_positive_cone(x) - project_positive_cone(y)
        ) <= norm(x - y) + 1e-12
    for _ in range(100):
        x = primal(sp, rng.normal(size=3) * 2)
        px = project_ball_lp(x, 1.0)
        z = rng.normal(size=3)
        z = primal(sp, rng.uniform(0, 1) * z / np.linalg.norm(z))
        residual = dual(sp, x.values - px.values)
        assert pairing(residual, z - px) <= 1e-9


def test_brute_force_matches_closed_forms(rng):
    for trial in range(8):
        p = (2.0, 3.0, 1.5)[trial % 3]
        d = 2 + trial % 2
        sp = lp_space(p, d)
        x = primal(sp, rng.normal(size=d) * 1.6)
        assume_outside = norm(x) > 1.1
        if not assume_outside:
            continue
        cf = project_ball_lp(x, 1.0)
        bf = brute_force_project(x, ball(sp, 1.0), resolution=40, seed=trial)
        assert norm(bf - cf) <= 2 / 40
        xc = primal(sp, rng.normal(size=d) * 1.5)
        cfc = project_positive_cone(xc)
        bfc = brute_force_project(xc, positive_cone(sp), resolution=40, seed=trial)
        assert norm(bfc - cfc) <= 2 / 40


def test_brute_force_l1_matches_distance(rng):
    sp = l1_space(3)
    for trial in range(4):
        x = primal(sp, rng.normal(size=3) * 1.5)
        bf = brute_force_project(x, l1_ball(sp, 1.0), resolution=30, seed=trial)
        expected = max(norm(x) - 1.0, 0.0)
        assert abs(norm(x - bf) - expected) <= 1e-4


def test_brute_force_inside_returns_input():
    sp = lp_space(2.0, 2)
    x = primal(sp, [0.3, -0.2])
    assert brute_force_project(x, ball(sp, 1.0)) is x


def test_brute_force_dimension_guard():
    sp = lp_space(2.0, 5)
    with pytest.raises(ValueError):
        brute_force_project(primal(sp, np.ones(5) * 2), ball(sp, 1.0))
    with pytest.raises(ValueError):
        brute_force_project(
            primal(C513, C513.grid**4), poly_subspace(C513, 3), resolution=9
        )


def test_convex_set_validation():
    with pytest.raises(ValueError):
        ball(l1_space(3), 1.0)
    with pytest.raises(ValueError):
        l1_ball(lp_space(2, 3), 1.0)
    with pytest.raises(ValueError):
        ball(lp_space(2, 3), -1.0)
    with pytest.raises(ValueError):
        poly_subspace(lp_space(2, 3), 1)
    cone = positive_cone(l1_space(3))
    assert cone.contains(primal(l1_space(3), [0, 1, 2]))
    assert not cone.contains(primal(l1_space(3), [0, -1, 2]))
