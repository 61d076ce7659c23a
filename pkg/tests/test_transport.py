import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopfcontact.errors import DifferentFibers, OrthogonalFibers, TrackingLoss
from hopfcontact.s2maps import Circle, Concatenation, Constant, Geodesic, Restricted, angle_between, loop_area
from hopfcontact.s3core import ONE, I, J, hopf_projection, hopf_section, qexp, qmul, random_s2, random_s3
from hopfcontact.specs import random_stream_loop
from hopfcontact.transport import (
    fiber_angle,
    holonomy,
    horizontal_lift,
    nearest_neighbor,
    transport,
    wrap_angle,
)

seeds = st.integers(0, 2**32 - 1)


def admissible_target(x, r):
    while True:
        y = random_s2(1, r)[0]
        if angle_between(hopf_projection(x), y) < np.pi - 0.2:
            return y


def brute_nearest(x, y, n=200_000):
    """Closest fibre point by dense sampling of the target fibre."""
    t = np.linspace(-np.pi, np.pi, n, endpoint=False)
    pts = qmul(hopf_section(y), qexp(I, t))
    return pts[np.argmin(np.linalg.norm(pts - x, axis=-1))]


# -- nearest neighbour -------------------------------------------------------------

def test_nearest_neighbor_examples(rng):
    x = random_s3(10, rng)
    assert np.allclose(nearest_neighbor(x, hopf_projection(x)), x, atol=1e-15)
    d = 0.4
    xp = np.array([np.cos(d), 0, np.sin(d), 0])
    assert np.allclose(nearest_neighbor(xp, [1.0, 0, 0]), ONE, atol=1e-15)


def test_nearest_neighbor_matches_brute_force(rng):
    for x in random_s3(5, rng):
        y = admissible_target(x, rng)
        assert np.allclose(nearest_neighbor(x, y), brute_nearest(x, y), atol=1e-4)


@given(seeds)
def test_nearest_neighbor_involution_and_isometry(seed):
    r = np.random.default_rng(seed)
    x = random_s3(1, r)[0]
    y = admissible_target(x, r)
    x2 = nearest_neighbor(x, y)
    assert np.allclose(nearest_neighbor(x2, hopf_projection(x)), x, atol=1e-12)
    t = r.uniform(-np.pi, np.pi)
    xt = qmul(x, qexp(I, t))
    ang = fiber_angle(x2, nearest_neighbor(xt, y))
    assert abs(wrap_angle(ang - t)) < 1e-10


def test_nearest_neighbor_orthogonal_fibers():
    with pytest.raises(OrthogonalFibers):
        nearest_neighbor(ONE, [-1.0, 0, 0])


# -- fibre angle -------------------------------------------------------------------

def test_fiber_angle_examples(rng):
    x = random_s3(1, rng)[0]
    assert fiber_angle(x, x) == 0
    assert np.isclose(fiber_angle(x, qmul(x, qexp(I, np.pi / 3))), np.pi / 3)
    assert np.isclose(fiber_angle(x, -x), np.pi)
    with pytest.raises(DifferentFibers):
        fiber_angle(ONE, J)


# -- lifts -------------------------------------------------------------------------

def test_constant_curve_lifts_to_constant_path(rng):
    x0 = random_s3(1, rng)[0]
    path = horizontal_lift(Constant(hopf_projection(x0)), x0, dt=1e-2)
    assert np.allclose(path.points, x0, atol=1e-15)


def test_geodesic_lift_is_nearest_neighbor():
    gamma = Geodesic([1.0, 0, 0], [0, 1.0, 0])
    path = horizontal_lift(gamma, ONE)
    assert np.linalg.norm(path.end - nearest_neighbor(ONE, gamma(1.0))) < 1e-7
    assert path.tracking_error(gamma) < 1e-7


def test_lift_is_horizontal(rng):
    loop = Circle(1.1, axis=random_s2(1, rng)[0])
    x0 = hopf_section(loop(0.0))

    def vertical_slope(dt):
        # chords of a curved path deviate from its tangent by O(dt^2)
        path = horizontal_lift(loop, x0, dt)
        mid = 0.5 * (path.points[1:] + path.points[:-1])
        chord = np.diff(path.points, axis=0)
        slope = np.abs(np.sum(chord * qmul(mid, I), axis=-1)) / np.linalg.norm(chord, axis=-1)
        return float(np.max(slope)), path

    coarse, _ = vertical_slope(2e-3)
    fine, path = vertical_slope(1e-3)
    assert fine < 1e-5
    assert 3.5 < coarse / fine < 4.5
    assert path.tracking_error(loop) < 1e-7


def test_lift_concatenation():
    loop = Circle(0.9, axis=[0.2, 0.5, 1.0])
    x0 = hopf_section(loop(0.0))
    whole = horizontal_lift(loop, x0).end
    first = transport(Restricted(loop, 0.0, 0.5), x0)
    assert np.linalg.norm(transport(Restricted(loop, 0.5, 1.0), first) - whole) < 1e-7


def test_transport_equivariance_and_reversal(rng):
    loop = random_stream_loop(rng, 3, 0.5)
    x0 = hopf_section(loop(0.0))
    s = rng.uniform(-np.pi, np.pi, 4)
    starts = qmul(x0, qexp(I, s))
    ends = transport(loop, starts)
    ref = transport(loop, x0)
    assert np.max(np.linalg.norm(ends - qmul(ref, qexp(I, s)), axis=-1)) < 1e-8
    back = transport(loop.reversed(), ref)
    assert np.linalg.norm(back - x0) < 1e-7


def test_transport_functoriality():
    a, b, c = np.array([1.0, 0, 0]), np.array([0.0, 0.6, 0.8]), np.array([-0.3, -0.2, 0.93])
    g1, g2 = Geodesic(a, b), Geodesic(b, c)
    x0 = hopf_section(a)
    both = transport(Concatenation([g1, g2]), x0)
    assert np.linalg.norm(both - transport(g2, transport(g1, x0))) < 1e-7


def test_transport_rejects_wrong_start():
    with pytest.raises(DifferentFibers):
        transport(Geodesic([0, 0, 1.0], [0, 1.0, 0]), ONE)


def test_tracking_loss_for_coarse_step():
    with pytest.raises(TrackingLoss):
        holonomy(Circle(1.2, turns=40), dt=0.05)


def test_path_csv(tmp_path):
    path = horizontal_lift(Geodesic([1.0, 0, 0], [0, 0, 1.0]), ONE, dt=0.1)
    out = tmp_path / "lift.csv"
    path.to_csv(out)
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["t", "w", "x", "y", "z"]
    assert len(rows) == len(path.times) + 1
    assert np.allclose(np.array(rows[-1], dtype=float)[1:], path.end)
    assert np.allclose(path(1.0), path.end) and np.isclose(np.linalg.norm(path(0.37)), 1.0)


# -- holonomy ------------------------------------------------------------------------

def test_holonomy_examples():
    assert abs(abs(holonomy(Circle(np.pi / 2))) - np.pi) < 1e-6
    assert holonomy(Constant([0, 0, 1.0], closed=True)) == 0.0
    for a in (np.pi / 6, np.pi / 3):
        assert abs(wrap_angle(holonomy(Circle(a)) - np.pi * (1 - np.cos(a)))) < 1e-5


def test_holonomy_independent_of_start_point(rng):
    loop = Circle(0.7, axis=[1.0, 1.0, 0.0])
    y = loop(0.0)
    thetas = [holonomy(loop, qmul(hopf_section(y), qexp(I, s))) for s in rng.uniform(-3, 3, 3)]
    assert np.ptp(thetas) < 1e-9


@settings(max_examples=5)
@given(seeds)
def test_holonomy_area_law(seed):
    loop = random_stream_loop(np.random.default_rng(seed), 3, 0.7)
    theta = holonomy(loop)
    assert abs(wrap_angle(theta - 0.5 * loop_area(loop))) <= 1e-4


def test_holonomy_of_reversed_tilted_circle():
    # clockwise traversal encloses the complement: minus half the cap, mod 2 pi
    loop = Circle(1.0, axis=[0.0, 0.6, 0.8], turns=-1)
    assert abs(wrap_angle(holonomy(loop) - (-np.pi * (1 - np.cos(1.0))))) < 1e-9
