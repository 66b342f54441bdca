import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wosnn.errors import ConfigError, InputError
from wosnn.geometry import Box, LShape2D, domain_from_config


def seg_dist(p, a, b):
    # independent brute force: dense parameter sweep refined by the exact clamp
    a, b = np.asarray(a, float), np.asarray(b, float)
    ts = np.linspace(0, 1, 2001)
    pts = a + ts[:, None] * (b - a)
    coarse = np.linalg.norm(pts[None] - p[:, None], axis=-1)
    t0 = ts[coarse.argmin(axis=1)]
    ab = b - a
    t = np.clip(((p - a) @ ab) / (ab @ ab), 0, 1)
    assert np.all(np.abs(t - t0) <= 1e-3 + 1e-12)
    return np.linalg.norm(p - (a + t[:, None] * ab), axis=-1)


LSHAPE_SEGMENTS = [
    ((-1, -1), (1, -1)), ((1, -1), (1, 0)), ((1, 0), (0, 0)),
    ((0, 0), (0, 1)), ((0, 1), (-1, 1)), ((-1, 1), (-1, -1)),
]


def test_box_distance_examples(square):
    assert square.signed_distance([0.0, 0.0]) == 1.0
    assert square.signed_distance([0.5, -0.2]) == pytest.approx(0.5, abs=1e-15)


def test_lshape_distance_example(lshape):
    assert lshape.signed_distance([-0.1, 0.1]) == pytest.approx(0.1, abs=1e-15)


def test_closest_point_examples(square, cube, lshape):
    np.testing.assert_array_equal(square.closest_boundary_point([0.999, 0.0]), [1.0, 0.0])
    np.testing.assert_array_equal(cube.closest_boundary_point([0.0, 0.0, -0.995]), [0.0, 0.0, -1.0])
    np.testing.assert_allclose(lshape.closest_boundary_point([0.3, -0.002]), [0.3, 0.0], atol=1e-15)


def test_epsilon_shell_examples(square, lshape):
    assert square.in_epsilon_shell([0.9995, 0.0], 1e-3)
    assert not square.in_epsilon_shell([0.0, 0.0], 1e-3)
    assert lshape.in_epsilon_shell([-0.0005, 0.5], 1e-3)
    with pytest.raises(InputError):
        square.in_epsilon_shell([0.0, 0.0], 0.0)


@pytest.mark.parametrize("name", ["square", "cube", "lshape"])
def test_projection_distance_matches_sdf(name, request, rng):
    dom = request.getfixturevalue(name)
    p = dom.sample_interior(rng, 10_000)
    d = dom.signed_distance(p)
    q = dom.closest_boundary_point(p)
    assert np.all(d > 0)
    np.testing.assert_allclose(np.linalg.norm(p - q, axis=1), d, rtol=0, atol=1e-12)
    np.testing.assert_allclose(dom.signed_distance(q), 0.0, atol=1e-12)


def _boundary_samples(dom, rng, n):
    if isinstance(dom, LShape2D):
        pts = []
        for a, b in LSHAPE_SEGMENTS:
            t = rng.random(n // 6 + 1)
            pts.append(np.asarray(a) + t[:, None] * (np.asarray(b) - np.asarray(a)))
        return np.concatenate(pts)[:n]
    p = rng.uniform(dom.lo, dom.hi, size=(n, dom.dim))
    axis = rng.integers(dom.dim, size=n)
    side = rng.integers(2, size=n)
    p[np.arange(n), axis] = np.where(side == 0, dom.lo[axis], dom.hi[axis])
    return p


@pytest.mark.parametrize("name", ["square", "cube", "lshape"])
def test_largest_ball_is_empty(name, request, rng):
    dom = request.getfixturevalue(name)
    b = _boundary_samples(dom, rng, 1000)
    np.testing.assert_allclose(dom.signed_distance(b), 0.0, atol=1e-15)
    p = dom.sample_interior(rng, 500)
    r = dom.signed_distance(p)
    gaps = np.linalg.norm(p[:, None] - b[None], axis=-1) - r[:, None]
    assert gaps.min() >= -1e-12


def test_lshape_matches_segment_oracle(lshape, rng):
    p = rng.uniform(-1.2, 1.2, size=(4000, 2))
    oracle = np.min([seg_dist(p, a, b) for a, b in LSHAPE_SEGMENTS], axis=0)
    inside = ((np.abs(p) < 1).all(axis=1)) & ~((p[:, 0] > 0) & (p[:, 1] > 0))
    d = lshape.signed_distance(p)
    np.testing.assert_allclose(np.abs(d), oracle, atol=1e-12)
    np.testing.assert_array_equal(d > 0, inside & (oracle > 0))
    # the reentrant corner is on the boundary
    assert lshape.signed_distance([0.0, 0.0]) == 0.0
    assert lshape.signed_distance([-0.3, 0.4]) == pytest.approx(0.3)
    assert lshape.signed_distance([-0.3, -0.4]) == pytest.approx(0.5)


def test_outside_points_are_negative(square, lshape):
    assert square.signed_distance([1.5, 0.0]) == pytest.approx(-0.5)
    assert square.signed_distance([2.0, 2.0]) == pytest.approx(-np.sqrt(2))
    assert lshape.signed_distance([0.5, 0.25]) == pytest.approx(-0.25)
    assert lshape.signed_distance([0.5, 1.5]) == pytest.approx(-np.sqrt(0.5))


def test_corner_ties_break_on_lowest_axis(square, lshape):
    np.testing.assert_array_equal(square.closest_boundary_point([0.5, 0.5]), [1.0, 0.5])
    np.testing.assert_array_equal(square.closest_boundary_point([-0.5, -0.5]), [-1.0, -0.5])
    # equidistant from x=1 (axis 0), y=-1 and y=0 (axis 1)
    np.testing.assert_allclose(lshape.closest_boundary_point([0.5, -0.5]), [1.0, -0.5])
    # equidistant from x=0 (axis 0) and y=1 (axis 1)
    np.testing.assert_allclose(lshape.closest_boundary_point([-0.25, 0.75]), [0.0, 0.75])


def test_near_boundary_exterior_projection(lshape, square):
    np.testing.assert_allclose(lshape.closest_boundary_point([0.0005, 0.5]), [0.0, 0.5])
    np.testing.assert_allclose(square.closest_boundary_point([1.0000001, 0.3]), [1.0, 0.3])


def test_box_validation():
    with pytest.raises(InputError):
        Box([0, 0], [1, -1])
    with pytest.raises(InputError):
        Box([0], [1])
    with pytest.raises(InputError):
        Box([0, 0], [1, 1]).signed_distance([0.5, 0.5, 0.5])


def test_domain_from_config():
    assert isinstance(domain_from_config("box2"), Box)
    assert domain_from_config("box3").dim == 3
    ls = domain_from_config("lshape2", lo=[-2, -2], hi=[2, 2])
    np.testing.assert_array_equal(ls.corner, [0, 0])
    with pytest.raises(ConfigError):
        domain_from_config("sphere")


@settings(max_examples=200, deadline=None)
@given(st.floats(-0.999, 0.999), st.floats(-0.999, 0.999))
def test_sdf_is_one_lipschitz(x, y):
    dom = LShape2D()
    p = np.array([x, y])
    q = p + np.array([1e-3, -2e-3])
    assert abs(dom.signed_distance(p) - dom.signed_distance(q)) <= np.linalg.norm(q - p) + 1e-15
