import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopfcontact.errors import ContactHamiltonianError, NonHorizontal, NotClosed
from hopfcontact.liealg import (
    ContactHamiltonian,
    base_pullback,
    bracket_with_reeb,
    defect_aut1,
    defect_autH,
    defect_autXi,
    defect_sdiff,
    field_is_constant,
    flow_contact_defect,
    flow_map,
    from_contact_hamiltonian,
    horizontal_lift_field,
    lie_derivative_field,
    reconstruct_f,
)
from hopfcontact.s2maps import Rotation, StreamFunction, hamiltonian_field
from hopfcontact.s3core import (
    FIELD_A,
    FIELD_B,
    FIELD_C,
    ONE,
    ZERO,
    FrameField,
    as_field,
    coordinate_field,
    d_hopf,
    divergence,
    frame_vector,
    hopf_projection,
    named_field,
    random_s3,
)

seeds = st.integers(0, 2**32 - 1)
W = coordinate_field("w")
Z_PSI = StreamFunction(((1, 0, 1.0),))


def contact_field(psi):
    f = base_pullback(psi)
    return from_contact_hamiltonian(ContactHamiltonian(f)), f


def random_psi(seed, lmax=3):
    return StreamFunction.random(np.random.default_rng(seed), lmax)


# -- Lie derivative ---------------------------------------------------------------

def test_lie_derivative_examples(rng):
    q = random_s3(20, rng)
    assert np.max(np.abs(lie_derivative_field(FIELD_A, FIELD_A, q).v)) < 1e-12
    got = lie_derivative_field(FIELD_B, FIELD_A, q).v
    assert np.allclose(got, -2 * frame_vector(q, "C").v, atol=1e-5)
    got = lie_derivative_field(FrameField(W), FIELD_A, q)
    # A w = -x, so [wA, A] = -(A w) A = x A
    assert np.allclose(got.v, q[:, 1:2] * frame_vector(q, "A").v, atol=1e-5)


def test_lie_derivative_matches_closed_form_bracket_with_reeb(rng):
    q = random_s3(30, rng)
    X = FrameField(named_field("mono:1,1,0,0"), named_field("coord:y"), named_field("mono:0,0,1,1"))
    assert np.allclose(lie_derivative_field(X, FIELD_A, q).v, bracket_with_reeb(X, q).v, atol=1e-5)


# -- membership tests -------------------------------------------------------------

def test_defect_autH_examples():
    assert defect_autH(FIELD_A).passed and defect_autH(FIELD_A).worst == 0
    X, _ = contact_field(random_psi(0))
    assert defect_autH(X).passed
    res = defect_autH(FIELD_B).sup_residuals
    assert res["h-Ag/2"] == 0 and np.isclose(res["g+Ah/2"], 1.0)


def test_defect_autXi_examples():
    assert defect_autXi(FIELD_A).passed
    X, _ = contact_field(random_psi(1))
    assert defect_autXi(X).passed
    report = defect_autXi(FIELD_C)
    assert not report.passed and np.isclose(report.worst, 1.0)


def test_defect_aut1_examples():
    assert defect_aut1(FIELD_A).passed
    X, _ = contact_field(Z_PSI)
    assert defect_aut1(X).passed
    report = defect_aut1(FrameField(W))
    assert not report.passed and report.sup_residuals["Af"] > 0.5


def test_defect_sdiff_examples():
    assert defect_sdiff(FrameField()).passed
    X, _ = contact_field(random_psi(2))
    assert defect_sdiff(X.horizontal_part()).passed
    assert not defect_sdiff(FIELD_B).passed
    with pytest.raises(NonHorizontal):
        defect_sdiff(FIELD_A)


def test_defect_report_serialises():
    d = defect_aut1(FIELD_B, samples=5).to_dict()
    assert set(d) == {"Af", "g-Cf/2", "h+Bf/2", "div"}
    assert all(isinstance(v, float) for v in d.values())


@settings(max_examples=6)
@given(seeds)
def test_contact_fields_are_strict_and_divergence_free(seed):
    X, _ = contact_field(random_psi(seed))
    report = defect_aut1(X, samples=40, rng=np.random.default_rng(seed))
    assert report.passed
    assert report.sup_residuals["div"] <= 1e-5


# -- contact Hamiltonians -----------------------------------------------------------

def test_contact_hamiltonian_certificate():
    assert ContactHamiltonian(base_pullback(Z_PSI)).certificate < 1e-9
    with pytest.raises(ContactHamiltonianError):
        ContactHamiltonian(W)


def test_from_contact_hamiltonian_constants(rng):
    q = random_s3(10, rng)
    assert np.allclose(from_contact_hamiltonian(ContactHamiltonian(as_field(1.0))).coefficients(q), [1, 0, 0])
    assert np.allclose(from_contact_hamiltonian(ContactHamiltonian(ZERO)).coefficients(q), 0)


def test_contact_flow_covers_rotation(rng):
    # d p doubles horizontal lengths, so f = (z o p) / 2 covers the unit-speed rotation about z
    X, _ = contact_field(StreamFunction(((1, 0, 0.5),)))
    q = random_s3(20, rng)
    end = hopf_projection(flow_map(X, np.pi / 2, steps=200)(q))
    expected = Rotation([0, 0, 1], np.pi / 2)(hopf_projection(q))
    assert np.max(np.linalg.norm(end - expected, axis=-1)) < 1e-6


def test_contact_field_projects_to_hamiltonian_field(rng):
    psi = random_psi(4)
    X, _ = contact_field(StreamFunction(tuple((l, m, 0.5 * c) for l, m, c in psi.coeffs)))
    q = random_s3(20, rng)
    Y = X.horizontal_part()
    assert np.allclose(d_hopf(q, Y(q).v), hamiltonian_field(psi, hopf_projection(q)), atol=1e-6)


def test_horizontal_lift_field_projects_back(rng):
    psi = random_psi(5)
    Y = horizontal_lift_field(lambda n: hamiltonian_field(psi, n))
    q = random_s3(20, rng)
    assert np.allclose(d_hopf(q, Y(q).v), hamiltonian_field(psi, hopf_projection(q)), atol=1e-12)
    assert defect_sdiff(Y).passed


def test_flow_contact_defect_quadratic_in_time():
    X, _ = contact_field(random_psi(6))
    for t in (1e-2, 5e-3):
        assert flow_contact_defect(X, t) <= 5 * t**2
    assert flow_contact_defect(FIELD_B, 1e-2) > 5e-3


# -- exactness and reconstruction ------------------------------------------------------

def test_exactness_constant_f():
    X = FrameField(as_field(2.5))
    assert defect_aut1(X).passed
    assert field_is_constant(X.f) <= 1e-6
    assert not defect_aut1(FrameField(named_field("coord:x"))).passed


def test_reconstruct_zero_field(rng):
    f = reconstruct_f(FrameField())
    assert np.max(np.abs(f(random_s3(10, rng)))) == 0


def test_reconstruct_round_trip(rng):
    X, f0 = contact_field(Z_PSI)
    rec = reconstruct_f(X.horizontal_part())
    q = random_s3(30, rng)
    assert np.max(np.abs(rec(q) - (f0(q) - f0(ONE)))) < 1e-5
    assert rec.curl_residual <= 1e-4 and rec.path_residual <= 1e-5


def test_reconstruct_handles_antipode():
    X, f0 = contact_field(random_psi(7))
    rec = reconstruct_f(X.horizontal_part())
    assert abs(rec(-ONE) - (f0(-ONE) - f0(ONE))) < 1e-5


def test_reconstruct_rejects_gradient_lift():
    psi = random_psi(8)
    with pytest.raises(NotClosed):
        reconstruct_f(horizontal_lift_field(psi.gradient))


def test_reconstruct_rejects_fibre_component():
    with pytest.raises(NonHorizontal):
        reconstruct_f(FIELD_A)


def test_divergence_of_contact_field_pointwise(rng):
    X, _ = contact_field(random_psi(9))
    assert np.max(np.abs(divergence(X, random_s3(30, rng)))) <= 1e-5
