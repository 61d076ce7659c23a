"""Tangent-algebra membership tests and contact Hamiltonians on S^3.

A vector field is ``X = f A + g B + h C``.  The tests here measure how far
``X`` is from generating fibre-preserving maps, contactomorphisms, strict
contactomorphisms, or (for horizontal fields) area-preserving maps of the
base, and reconstruct a contact Hamiltonian from its horizontal part.
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from .errors import ContactHamiltonianError, NonHorizontal, NotClosed
from .s3core import (
    H_DEFAULT,
    H_NESTED,
    ONE,
    ZERO,
    FrameField,
    ScalarField,
    TangentVector,
    beta,
    curl,
    derivative_field,
    directional_derivative,
    divergence,
    dot,
    frame_jacobian,
    hopf_projection,
    normalize,
    qmul,
    random_s3,
    rotation_columns,
    upsilon,
    vector_bracket,
    I,
    J,
    K,
)

DEFAULT_TOL = 1e-5


@dataclass
class DefectReport:
    sup_residuals: Dict[str, float]
    sample_count: int
    tolerance: float = DEFAULT_TOL

    @property
    def passed(self) -> bool:
        return all(v <= self.tolerance for v in self.sup_residuals.values())

    @property
    def worst(self) -> float:
        return max(self.sup_residuals.values(), default=0.0)

    def to_dict(self):
        return {k: float(v) for k, v in self.sup_residuals.items()}


def _points(samples, rng=None, points=None):
    if points is not None:
        return np.asarray(points, dtype=float)
    rng = np.random.default_rng(0) if rng is None else rng
    return random_s3(int(samples), rng)


def _sup(values):
    return float(np.max(np.abs(values), initial=0.0))


def _report(residuals, pts, tol):
    return DefectReport({k: _sup(v) for k, v in residuals.items()}, len(pts), tol)


# -- Lie derivatives -------------------------------------------------------------

def lie_derivative_field(X: FrameField, Y: FrameField, q, h=H_NESTED) -> TangentVector:
    """``L_X Y = [X, Y]`` at ``q`` by nested finite differences, projected onto the tangent space."""
    q = np.asarray(q, dtype=float)
    v = vector_bracket(X, Y, q, h)
    return TangentVector(q, v - dot(v, q)[..., None] * q)


def bracket_with_reeb(X: FrameField, q, h=H_DEFAULT) -> TangentVector:
    """Closed form of ``[X, A] = -(Af) A + (2h - Ag) B - (2g + Ah) C``."""
    q = np.asarray(q, dtype=float)
    af = directional_derivative(X.f, q, "A", h)
    ag = directional_derivative(X.g, q, "A", h)
    ah = directional_derivative(X.h, q, "A", h)
    c = (-af, 2 * X.h(q) - ag, -(2 * X.g(q) + ah))
    v = sum(ci[..., None] * qmul(q, e) for ci, e in zip(c, (I, J, K)))
    return TangentVector(q, v)


# -- membership defects ------------------------------------------------------------

def defect_autH(X: FrameField, samples=100, rng=None, points=None, tol=DEFAULT_TOL, h=H_NESTED):
    """Fibre-preserving generators: ``g = -A h / 2`` and ``h = A g / 2``."""
    p = _points(samples, rng, points)
    d = lambda s, a: directional_derivative(s, p, a, h)  # noqa: E731
    return _report({"g+Ah/2": X.g(p) + 0.5 * d(X.h, "A"), "h-Ag/2": X.h(p) - 0.5 * d(X.g, "A")}, p, tol)


def defect_autXi(X: FrameField, samples=100, rng=None, points=None, tol=DEFAULT_TOL, h=H_NESTED):
    """Contact generators: ``g = C f / 2`` and ``h = -B f / 2``."""
    p = _points(samples, rng, points)
    d = lambda s, a: directional_derivative(s, p, a, h)  # noqa: E731
    return _report({"g-Cf/2": X.g(p) - 0.5 * d(X.f, "C"), "h+Bf/2": X.h(p) + 0.5 * d(X.f, "B")}, p, tol)


def defect_aut1(X: FrameField, samples=100, rng=None, points=None, tol=DEFAULT_TOL, h=H_DEFAULT):
    """Strict contact generators: ``A f = 0`` plus the contact conditions, and ``div X = 0``."""
    p = _points(samples, rng, points)
    d = lambda s, a: directional_derivative(s, p, a, h)  # noqa: E731
    res = {
        "Af": d(X.f, "A"),
        "g-Cf/2": X.g(p) - 0.5 * d(X.f, "C"),
        "h+Bf/2": X.h(p) + 0.5 * d(X.f, "B"),
        "div": divergence(X, p),
    }
    return _report(res, p, tol)


def _check_horizontal(Y, p, tol=1e-12):
    if _sup(Y.f(p)) > tol:
        raise NonHorizontal("field has a non-zero component along the fibres")


def defect_sdiff(Y: FrameField, samples=100, rng=None, points=None, tol=DEFAULT_TOL, h=H_NESTED):
    """Horizontal lifts of divergence-free base fields: fibre-preserving and ``Bg + Ch = 0``."""
    p = _points(samples, rng, points)
    _check_horizontal(Y, p)
    d = lambda s, a: directional_derivative(s, p, a, h)  # noqa: E731
    res = {
        "g+Ah/2": Y.g(p) + 0.5 * d(Y.h, "A"),
        "h-Ag/2": Y.h(p) - 0.5 * d(Y.g, "A"),
        "Bg+Ch": d(Y.g, "B") + d(Y.h, "C"),
    }
    return _report(res, p, tol)


# -- contact Hamiltonians ------------------------------------------------------------

class ContactHamiltonian:
    """A function constant along the fibres, certified on sample points."""

    def __init__(self, f: ScalarField, samples=100, rng=None, tol=1e-6):
        p = _points(samples, rng)
        af = _sup(directional_derivative(f, p, "A"))
        if af > tol:
            raise ContactHamiltonianError(f"sup |A f| = {af:.3g} exceeds {tol}")
        self.f = f
        self.certificate = af


def base_pullback(psi) -> ScalarField:
    """``psi o p`` for a function ``psi`` on the base sphere."""
    label = getattr(psi, "label", type(psi).__name__)
    return ScalarField(lambda q: psi(hopf_projection(q)), f"pullback({label})")


def from_contact_hamiltonian(H: ContactHamiltonian, h=H_DEFAULT) -> FrameField:
    """``X = f A + (C f / 2) B - (B f / 2) C``."""
    f = H.f
    cf = derivative_field(f, "C", h)
    bf = derivative_field(f, "B", h)
    return FrameField(f, 0.5 * cf, -0.5 * bf)


def horizontal_lift_field(V) -> FrameField:
    """Horizontal field covering the base field ``V`` (a procedure ``n -> tangent 3-vector``).

    ``d p`` maps ``B`` and ``C`` to ``-2 R k`` and ``2 R j``, where ``R`` is
    the rotation of ``q``; the coefficients invert that.
    """

    def g(q):
        _, _, rk = rotation_columns(q)
        return -0.5 * np.sum(V(hopf_projection(q)) * rk, axis=-1)

    def h(q):
        _, rj, _ = rotation_columns(q)
        return 0.5 * np.sum(V(hopf_projection(q)) * rj, axis=-1)

    return FrameField(ZERO, ScalarField(g, "lift_g"), ScalarField(h, "lift_h"))


# -- flows ------------------------------------------------------------------------

def flow_map(X: FrameField, t: float, steps: int = 10):
    """Time-``t`` RK4 flow of ``X`` with renormalisation, as a batched map of S^3."""

    def F(q):
        q = np.array(q, dtype=float)
        dt = t / steps
        for _ in range(steps):
            k1 = X.vector(q)
            k2 = X.vector(normalize(q + 0.5 * dt * k1))
            k3 = X.vector(normalize(q + 0.5 * dt * k2))
            k4 = X.vector(normalize(q + dt * k3))
            q = normalize(q + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))
        return q

    return F


def alpha_pullback_defect(mapping, points, h=H_DEFAULT):
    """Sup over points and unit frame vectors of ``|F* alpha - alpha|``."""
    jac = frame_jacobian(mapping, points, h)
    return float(np.max(np.linalg.norm(jac[..., 0, :] - np.array([1.0, 0.0, 0.0]), axis=-1)))


def flow_contact_defect(X: FrameField, t: float, samples=50, rng=None, steps: int = 10):
    return alpha_pullback_defect(flow_map(X, t, steps), _points(samples, rng))


def field_is_constant(f: ScalarField, samples=100, rng=None):
    """``sup |f - mean f|`` over sample points."""
    v = f(_points(samples, rng))
    return float(np.max(np.abs(v - v.mean())))


# -- reconstruction of the Hamiltonian ------------------------------------------------

def _slerp_nodes(a, b, s):
    """Points and velocities of the great arc from ``a`` to ``b`` at parameters ``s``."""
    c = np.clip(dot(a, b), -1.0, 1.0)
    om = np.arccos(c)[..., None]
    u = b - c[..., None] * a
    un = np.linalg.norm(u, axis=-1, keepdims=True)
    u = np.where(un > 1e-300, u / np.where(un > 1e-300, un, 1.0), 0.0)
    s = s[:, None, None]
    pts = np.cos(om * s) * a + np.sin(om * s) * u
    vel = om * (-np.sin(om * s) * a + np.cos(om * s) * u)
    return pts, vel


class ReconstructedHamiltonian(ScalarField):
    """Result of :func:`reconstruct_f`: a scalar field plus its certificates."""

    def __init__(self, fn, base, curl_residual, path_residual):
        super().__init__(fn, "reconstructed")
        self.base = base
        self.curl_residual = curl_residual
        self.path_residual = path_residual


def reconstruct_f(
    Y: FrameField,
    q0=ONE,
    nodes: int = 200,
    check_samples: int = 30,
    rng=None,
    curl_tol: float = 1e-4,
    h=H_NESTED,
) -> ReconstructedHamiltonian:
    """Recover ``f`` (with ``f(q0) = 0``) from the horizontal part ``Y`` of a strict contact field.

    ``f`` is the line integral of ``omega = -(A g) beta - (A h) upsilon``
    along great arcs from ``q0``, using Gauss-Legendre quadrature.  The
    closedness of ``omega`` is certified by the curl of
    ``-(A g) B - (A h) C`` and by comparing against arcs through a waypoint.
    """
    q0 = normalize(np.asarray(q0, dtype=float))
    rng = np.random.default_rng(12345) if rng is None else rng
    check = random_s3(check_samples, rng)
    _check_horizontal(Y, check)
    ag = derivative_field(Y.g, "A", h)
    ah = derivative_field(Y.h, "A", h)
    W = FrameField(ZERO, -1.0 * ag, -1.0 * ah)
    curl_res = float(np.max(np.linalg.norm(curl(W, check, h).v, axis=-1)))
    if curl_res > curl_tol:
        raise NotClosed(f"curl residual {curl_res:.3g} exceeds {curl_tol}; no potential exists")

    gx, gw = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * (gx + 1.0)
    w = 0.5 * gw

    def arc_integral(a, b):
        pts, vel = _slerp_nodes(a, b, s)
        form = -ag(pts) * beta(pts, vel) - ah(pts) * upsilon(pts, vel)
        return np.tensordot(w, form, axes=1)

    def waypoint_for(q):
        cands = np.stack([qmul(q0, J), qmul(q0, -J), qmul(q0, K), qmul(q0, -K)])
        scores = np.einsum("cd,nd->nc", cands, q)
        return cands[np.argmax(scores, axis=1)]

    def evaluate(q, via_waypoint=False):
        q = np.asarray(q, dtype=float)
        shape = q.shape[:-1]
        flat = q.reshape(-1, 4)
        a = np.broadcast_to(q0, flat.shape)
        out = np.empty(len(flat))
        near_antipode = dot(flat, q0) < -1.0 + 1e-6
        direct = ~near_antipode & (not via_waypoint)
        if np.any(direct):
            out[direct] = arc_integral(a[direct], flat[direct])
        rest = ~direct
        if np.any(rest):
            wp = waypoint_for(flat[rest])
            out[rest] = arc_integral(a[rest], wp) + arc_integral(wp, flat[rest])
        return out.reshape(shape)

    path_res = float(np.max(np.abs(evaluate(check) - evaluate(check, via_waypoint=True))))
    return ReconstructedHamiltonian(evaluate, q0, curl_res, path_res)
