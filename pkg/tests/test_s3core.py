import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import left_matrix
from hopfcontact.errors import GeometryError
from hopfcontact.s3core import (
    FIELD_A,
    FIELD_B,
    FIELD_C,
    ONE,
    I,
    J,
    K,
    FrameField,
    TangentVector,
    alpha,
    as_field,
    beta,
    coordinate_field,
    curl,
    d_alpha,
    d_hopf,
    directional_derivative,
    divergence,
    frame_flow,
    frame_identity_residuals,
    frame_vector,
    gradient,
    gradient_field,
    hopf_projection,
    hopf_section,
    named_field,
    qexp,
    qlog,
    qmul,
    quat_mul,
    random_s3,
    rotation_columns,
    sph_pullback,
    sph_pullback_derivative,
    upsilon,
)

angles = st.floats(-10, 10, allow_nan=False)
seeds = st.integers(0, 2**32 - 1)


def unit(seed, n=None):
    pts = random_s3(n or 1, np.random.default_rng(seed))
    return pts[0] if n is None else pts


# -- quaternion algebra -----------------------------------------------------------

def test_quat_mul_table():
    assert np.allclose(quat_mul(I, J), K)
    q = unit(3)
    assert np.allclose(quat_mul(q, ONE), q)


def test_quat_mul_half_turn_squares_to_i():
    h = np.array([1.0, 1.0, 0.0, 0.0]) / np.sqrt(2)
    assert np.allclose(quat_mul(h, h), I, atol=1e-15)


@given(seeds)
def test_qmul_matches_matrix_oracle(seed):
    a, b = unit(seed, 2)
    assert np.allclose(qmul(a, b), left_matrix(a) @ b, atol=1e-15)


@given(seeds, angles)
def test_qexp_qlog_round_trip(seed, t):
    axis = np.random.default_rng(seed).standard_normal(3)
    axis /= np.linalg.norm(axis)
    t = np.mod(t, np.pi) * 0.999
    q = qexp(np.concatenate([[0.0], axis]), t)
    assert np.allclose(qlog(q), t * axis, atol=1e-12)


# -- frame ---------------------------------------------------------------------

def test_frame_vector_examples():
    a = frame_vector(ONE, "A")
    assert np.allclose(a.v, [0, 1, 0, 0]) and np.allclose(a.base, ONE)
    assert np.allclose(frame_vector(J, "A").v, [0, 0, 0, -1])


def test_frame_vectors_tangent_and_orthonormal(rng):
    q = random_s3(100, rng)
    vecs = [frame_vector(q, ax).v for ax in "ABC"]
    gram = np.einsum("aij,bij->iab", np.stack(vecs), np.stack(vecs))
    assert np.allclose(gram, np.eye(3), atol=1e-14)
    for v in vecs:
        assert np.max(np.abs(np.sum(v * q, axis=-1))) < 1e-15


def test_frame_flow_examples(rng):
    assert np.allclose(frame_flow(ONE, "A", np.pi / 2), I)
    q = random_s3(5, rng)
    assert np.allclose(frame_flow(q, "A", 2 * np.pi), q, atol=1e-14)
    assert np.allclose(frame_flow(ONE, "B", np.pi / 3), [np.cos(np.pi / 3), 0, np.sin(np.pi / 3), 0])


@given(seeds, angles, angles, st.sampled_from("ABC"))
def test_frame_flow_is_a_flow(seed, s, t, axis):
    q = unit(seed)
    assert np.allclose(frame_flow(frame_flow(q, axis, s), axis, t), frame_flow(q, axis, s + t), atol=1e-12)


def test_tangent_vector_rejects_normal_component():
    with pytest.raises(GeometryError):
        TangentVector(ONE, ONE)


def test_tangent_vector_coefficients(rng):
    q = random_s3(10, rng)
    v = 0.3 * frame_vector(q, "A") + 7.0 * frame_vector(q, "C")
    assert np.allclose(v.coefficients(), np.broadcast_to([0.3, 0.0, 7.0], (10, 3)))


# -- coframe -------------------------------------------------------------------

def test_coframe_values(rng):
    q = random_s3(20, rng)
    A, B, C = (frame_vector(q, ax) for ax in "ABC")
    assert np.allclose(alpha(q, A), 1) and np.allclose(alpha(q, B), 0)
    assert np.allclose(alpha(q, 0.3 * A + 7.0 * C), 0.3)
    assert np.allclose(beta(q, B), 1) and np.allclose(upsilon(q, C), 1)


def test_alpha_rejects_foreign_base(rng):
    q = random_s3(2, rng)
    with pytest.raises(GeometryError):
        alpha(q[0], frame_vector(q[1], "A"))


# -- Hopf map -------------------------------------------------------------------

def test_hopf_projection_examples():
    assert np.allclose(hopf_projection(ONE), [1, 0, 0])
    assert np.allclose(hopf_projection(J), [-1, 0, 0])


@given(seeds, angles)
def test_hopf_projection_fiber_invariant(seed, t):
    q = unit(seed)
    assert np.allclose(hopf_projection(frame_flow(q, "A", t)), hopf_projection(q), atol=1e-14)


def test_hopf_projection_matches_rotation_matrix(rng):
    q = random_s3(30, rng)
    ci, _, _ = rotation_columns(q)
    assert np.allclose(hopf_projection(q), ci, atol=1e-15)


def test_d_hopf_examples(rng):
    assert np.allclose(d_hopf(ONE, frame_vector(ONE, "B")), [0, 0, -2])
    q = random_s3(100, rng)
    assert np.max(np.abs(d_hopf(q, frame_vector(q, "A")))) < 1e-15
    assert np.allclose(np.linalg.norm(d_hopf(q, frame_vector(q, "B")), axis=-1), 2.0)


def test_d_hopf_matches_finite_differences(rng):
    q = random_s3(100, rng)
    h = 1e-6
    for ax in "BC":
        fd = (hopf_projection(frame_flow(q, ax, h)) - hopf_projection(frame_flow(q, ax, -h))) / (2 * h)
        assert np.allclose(d_hopf(q, frame_vector(q, ax)), fd, atol=1e-8)
    assert np.allclose(np.linalg.norm(d_hopf(q, frame_vector(q, "B")), axis=-1), 2.0)


def test_hopf_section_is_a_section(rng):
    y = rng.standard_normal((200, 3))
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    y[0] = [-1, 0, 0]
    assert np.allclose(hopf_projection(hopf_section(y)), y, atol=1e-14)


# -- calculus -------------------------------------------------------------------

W = coordinate_field("w")


def test_directional_derivative_examples(rng):
    assert abs(directional_derivative(W, ONE, "A")) < 1e-12
    assert np.isclose(directional_derivative(W, I, "A"), -1.0, atol=1e-8)
    q = random_s3(5, rng)
    for ax in "ABC":
        assert np.all(directional_derivative(as_field(1.0), q, ax) == 0)


def test_gradient_examples():
    assert np.allclose(gradient(as_field(2.0), I).v, 0)
    assert np.allclose(gradient(W, ONE).v, 0, atol=1e-12)
    assert np.allclose(gradient(W, I).coefficients(), [-1, 0, 0], atol=1e-8)


def test_divergence_examples(rng):
    q = random_s3(30, rng)
    assert np.max(np.abs(divergence(FIELD_A, q))) == 0
    # grad of the restricted coordinate is an eigenfunction of the Laplacian with eigenvalue -3
    lap = divergence(gradient_field(W), q)
    assert np.allclose(lap, -3 * W(q), atol=1e-5)


def test_divergence_matches_second_differences(rng):
    q = random_s3(20, rng)
    h = 1e-3
    brute = sum((W(frame_flow(q, ax, h)) - 2 * W(q) + W(frame_flow(q, ax, -h))) / h**2 for ax in "ABC")
    assert np.allclose(divergence(gradient_field(W), q), brute, atol=1e-5)


def test_curl_examples(rng):
    q = random_s3(30, rng)
    for X, ax in ((FIELD_A, "A"), (FIELD_B, "B"), (FIELD_C, "C")):
        assert np.max(np.abs(curl(X, q).v + 2 * frame_vector(q, ax).v)) < 1e-14
    assert np.max(np.abs(curl(gradient_field(W), q).v)) < 1e-6


def test_d_alpha_values(rng):
    q = random_s3(30, rng)
    assert np.allclose(d_alpha(FIELD_B, FIELD_C, q), -2, atol=1e-5)
    assert np.max(np.abs(d_alpha(FIELD_A, FIELD_B, q))) < 1e-5
    assert np.max(np.abs(d_alpha(FIELD_A, FIELD_C, q))) < 1e-5


def test_frame_identity_suite(rng):
    res = frame_identity_residuals(random_s3(100, rng))
    assert res["bracket[A,B]=2C"] <= 1e-5 and res["bracket[C,A]=2B"] <= 1e-5
    assert res["curl(A)+2A"] <= 1e-6 and res["dalpha(B,C)+2"] <= 1e-5
    assert res["orthonormality"] < 1e-12


def test_frame_identity_suite_fails_for_coarse_step(rng):
    res = frame_identity_residuals(random_s3(50, rng), h=0.1)
    assert max(v for k, v in res.items() if k.startswith("bracket")) > 1e-5


# -- named fields ------------------------------------------------------------------

def test_named_fields(rng):
    q = random_s3(10, rng)
    assert np.allclose(named_field("coord:y")(q), q[:, 2])
    assert np.allclose(named_field("const:0.5")(q), 0.5)
    assert np.allclose(named_field("mono:1,0,2,0")(q), q[:, 0] * q[:, 2] ** 2)
    assert np.allclose(named_field("sph:1,0")(q), hopf_projection(q)[:, 2])
    for bad in ("coord:u", "sph:1", "mono:1,2", "nope:1"):
        with pytest.raises(ValueError):
            named_field(bad)


@pytest.mark.parametrize("l,m", [(1, 0), (2, 1), (3, -2)])
def test_pullback_is_fiber_invariant_and_exact_derivatives_match(rng, l, m):
    q = random_s3(30, rng)
    f = sph_pullback(l, m)
    assert np.max(np.abs(directional_derivative(f, q, "A"))) < 1e-9
    for ax in "BC":
        assert np.allclose(sph_pullback_derivative(l, m, ax)(q), directional_derivative(f, q, ax), atol=1e-7)


def test_frame_field_horizontal_part(rng):
    q = random_s3(5, rng)
    X = FrameField(W, 2.0, named_field("coord:x"))
    assert np.allclose(X.horizontal_part().coefficients(q)[:, 0], 0)
    assert np.allclose(X.coefficients(q)[:, 1], 2.0)
