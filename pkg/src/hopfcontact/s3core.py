"""Quaternion calculus on the three-sphere.

Points of S^3 are unit quaternions stored as float arrays of shape
``(..., 4)`` in the order ``(w, x, y, z)`` for ``w + xi + yj + zk``.  All
routines broadcast over leading axes.

The left-invariant frame is ``A(q) = q i``, ``B(q) = q j``, ``C(q) = q k``;
its flows are the exact one-parameter subgroups ``q -> q exp(t e)``, and
every directional derivative in this module is a central difference along
those flows.  The Hopf map is ``p(q) = q i q^-1`` read as a point of the
unit two-sphere.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GeometryError
from .harmonics import real_sph, real_sph_grad

H_DEFAULT = 1e-4
H_NESTED = 1e-3

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])
AXES = {"A": I, "B": J, "C": K}
AXIS_NAMES = ("A", "B", "C")


# -- quaternion arithmetic ----------------------------------------------------

def qmul(a, b):
    """Hamilton product of quaternion arrays (no normalisation)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def qconj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def normalize(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def unit_quaternion(w, x=0.0, y=0.0, z=0.0):
    return normalize(np.stack(np.broadcast_arrays(*map(np.asarray, (w, x, y, z))), axis=-1).astype(float))


def quat_mul(a, b):
    return normalize(qmul(a, b))


def dot(a, b):
    return np.sum(np.asarray(a) * np.asarray(b), axis=-1)


def axis_unit(axis):
    if isinstance(axis, str):
        try:
            return AXES[axis]
        except KeyError:
            raise ValueError(f"unknown frame axis {axis!r}") from None
    return np.asarray(axis, dtype=float)


def qexp(axis, t):
    """``exp(t e) = cos t + e sin t`` for a unit imaginary ``e``."""
    e = axis_unit(axis)
    t = np.asarray(t, dtype=float)[..., None]
    return np.cos(t) * ONE + np.sin(t) * e


def qlog(q):
    """Imaginary logarithm of unit quaternions, as 3-vectors (angle * axis)."""
    q = np.asarray(q, dtype=float)
    im = q[..., 1:]
    s = np.linalg.norm(im, axis=-1)
    ang = np.arctan2(s, q[..., 0])
    scale = np.where(s > 1e-300, ang / np.where(s > 1e-300, s, 1.0), 1.0)
    return im * scale[..., None]


def random_s3(n, rng):
    """``n`` uniformly distributed points of S^3."""
    return normalize(rng.standard_normal((n, 4)))


def random_s2(n, rng):
    return normalize(rng.standard_normal((n, 3)))


# -- frame and flows ------------------------------------------------------------

@dataclass(frozen=True)
class TangentVector:
    """A tangent vector ``v`` (ambient R^4 coordinates) at ``base``."""

    base: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        v = np.asarray(self.v, dtype=float)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "v", v)
        if np.any(np.abs(dot(base, v)) > 1e-10 * np.maximum(1.0, np.linalg.norm(v, axis=-1))):
            raise GeometryError("vector is not tangent to S^3 at its base point")

    def __add__(self, other):
        _check_base(self.base, other.base)
        return TangentVector(self.base, self.v + other.v)

    def __mul__(self, c):
        return TangentVector(self.base, self.v * np.asarray(c, dtype=float)[..., None])

    __rmul__ = __mul__

    def coefficients(self):
        """Components against ``(A, B, C)`` at the base point, shape (..., 3)."""
        return np.stack([dot(self.v, qmul(self.base, e)) for e in (I, J, K)], axis=-1)


def _check_base(a, b):
    if np.shape(a) != np.shape(b) or np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0) > 1e-12:
        raise GeometryError("tangent vectors are based at different points")


def frame_vector(q, axis):
    q = np.asarray(q, dtype=float)
    return TangentVector(q, qmul(q, axis_unit(axis)))


def frame_flow(q, axis, t):
    return qmul(q, qexp(axis, t))


def rotation_columns(q):
    """Images of i, j, k under ``v -> q v q^-1``, each of shape (..., 3)."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    ci = np.stack([w * w + x * x - y * y - z * z, 2 * (x * y + w * z), 2 * (x * z - w * y)], axis=-1)
    cj = np.stack([2 * (x * y - w * z), w * w - x * x + y * y - z * z, 2 * (y * z + w * x)], axis=-1)
    ck = np.stack([2 * (x * z + w * y), 2 * (y * z - w * x), w * w - x * x - y * y + z * z], axis=-1)
    return ci, cj, ck


def rotate_vector(q, v):
    """Apply ``v -> q v q^-1`` to 3-vectors."""
    ci, cj, ck = rotation_columns(q)
    v = np.asarray(v, dtype=float)
    return ci * v[..., 0:1] + cj * v[..., 1:2] + ck * v[..., 2:3]


# -- Hopf projection -------------------------------------------------------------

def hopf_projection(q):
    return rotation_columns(q)[0]


def d_hopf(q, v):
    """Differential of the Hopf map applied to a tangent vector (unit-sphere scale)."""
    if isinstance(v, TangentVector):
        _check_base(v.base, np.asarray(q, dtype=float))
        v = v.v
    q = np.asarray(q, dtype=float)
    out = qmul(qmul(v, I), qconj(q)) + qmul(qmul(q, I), qconj(v))
    return out[..., 1:]


def hopf_section(y):
    """Some point of the fibre over ``y`` (a smooth choice away from y = -i)."""
    y = normalize(np.asarray(y, dtype=float))
    ex = np.array([1.0, 0.0, 0.0])
    # q ~ (1 + <i,y>) + i x y rotates i onto y; switch branch near y = -i
    near = y[..., 0] >= 0.0
    c = np.cross(ex, y)
    q1 = np.concatenate([(1.0 + y[..., 0])[..., None], c], axis=-1)
    # s ~ (1 - <i,y>) - i x y rotates -i onto y, and j maps i to -i
    q2 = qmul(np.concatenate([(1.0 - y[..., 0])[..., None], -c], axis=-1), J)
    return normalize(np.where(near[..., None], q1, q2))


# -- coframe ---------------------------------------------------------------------

def _coframe(q, v, e):
    q = np.asarray(q, dtype=float)
    if isinstance(v, TangentVector):
        _check_base(v.base, q)
        v = v.v
    return dot(qmul(q, e), v)


def alpha(q, v):
    return _coframe(q, v, I)


def beta(q, v):
    return _coframe(q, v, J)


def upsilon(q, v):
    return _coframe(q, v, K)


# -- scalar and frame fields ---------------------------------------------------

class ScalarField:
    """A real function on S^3 given by a vectorised evaluation procedure."""

    def __init__(self, fn: Callable, label: str = ""):
        self.fn = fn
        self.label = label

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        return np.broadcast_to(np.asarray(self.fn(q), dtype=float), q.shape[:-1])

    def __repr__(self):
        return f"ScalarField({self.label!r})"

    def __add__(self, other):
        other = as_field(other)
        return ScalarField(lambda q: self(q) + other(q), f"({self.label}+{other.label})")

    __radd__ = __add__

    def __sub__(self, other):
        other = as_field(other)
        return ScalarField(lambda q: self(q) - other(q), f"({self.label}-{other.label})")

    def __mul__(self, other):
        other = as_field(other)
        return ScalarField(lambda q: self(q) * other(q), f"{self.label}*{other.label}")

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(lambda q: -self(q), f"-{self.label}")


def as_field(value):
    if isinstance(value, ScalarField):
        return value
    c = float(value)
    return ScalarField(lambda q: np.full(np.shape(q)[:-1], c), f"{c:g}")


ZERO = as_field(0.0)


@dataclass(frozen=True)
class FrameField:
    """The vector field ``f A + g B + h C``."""

    f: ScalarField = ZERO
    g: ScalarField = ZERO
    h: ScalarField = ZERO

    def __post_init__(self):
        for name in ("f", "g", "h"):
            object.__setattr__(self, name, as_field(getattr(self, name)))

    def coefficients(self, q):
        return np.stack([self.f(q), self.g(q), self.h(q)], axis=-1)

    def vector(self, q):
        q = np.asarray(q, dtype=float)
        c = self.coefficients(q)
        return c[..., 0:1] * qmul(q, I) + c[..., 1:2] * qmul(q, J) + c[..., 2:3] * qmul(q, K)

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        return TangentVector(q, self.vector(q))

    def horizontal_part(self):
        return FrameField(ZERO, self.g, self.h)


FIELD_A = FrameField(1.0, 0.0, 0.0)
FIELD_B = FrameField(0.0, 1.0, 0.0)
FIELD_C = FrameField(0.0, 0.0, 1.0)


# -- differential operators ----------------------------------------------------

def directional_derivative(field, q, axis, h=H_DEFAULT):
    """Central difference of ``field`` along the exact flow of a frame axis."""
    if h <= 0:
        raise ValueError("step must be positive")
    q = np.asarray(q, dtype=float)
    return (field(frame_flow(q, axis, h)) - field(frame_flow(q, axis, -h))) / (2.0 * h)


def derivative_field(field, axis, h=H_DEFAULT):
    """The scalar field ``E field`` for a frame axis E, evaluated lazily."""
    name = axis if isinstance(axis, str) else "v"
    return ScalarField(lambda q: directional_derivative(field, q, axis, h), f"{name}({field.label})")


def gradient_field(phi, h=H_DEFAULT):
    return FrameField(*(derivative_field(phi, a, h) for a in AXIS_NAMES))


def gradient(phi, q, h=H_DEFAULT):
    return gradient_field(phi, h)(q)


def divergence(X, q, h=H_NESTED):
    return (
        directional_derivative(X.f, q, "A", h)
        + directional_derivative(X.g, q, "B", h)
        + directional_derivative(X.h, q, "C", h)
    )


def curl(X, q, h=H_NESTED):
    q = np.asarray(q, dtype=float)

    def d(field, axis):
        return directional_derivative(field, q, axis, h)

    c = X.coefficients(q)
    ca = d(X.h, "B") - d(X.g, "C") - 2.0 * c[..., 0]
    cb = d(X.f, "C") - d(X.h, "A") - 2.0 * c[..., 1]
    cc = d(X.g, "A") - d(X.f, "B") - 2.0 * c[..., 2]
    v = ca[..., None] * qmul(q, I) + cb[..., None] * qmul(q, J) + cc[..., None] * qmul(q, K)
    return TangentVector(q, v)


def vector_bracket(X, Y, q, h=H_NESTED):
    """Lie bracket ``[X, Y]`` at ``q`` as an ambient R^4 vector.

    Uses ``[X, Y] = D_X Y - D_Y X`` with the ambient derivatives taken along
    the exact frame flows; no structure constants are assumed.
    """
    q = np.asarray(q, dtype=float)

    def ambient(V, W):
        c = V.coefficients(q)
        out = np.zeros(q.shape)
        for idx, e in enumerate(AXIS_NAMES):
            dw = (W.vector(frame_flow(q, e, h)) - W.vector(frame_flow(q, e, -h))) / (2.0 * h)
            out = out + c[..., idx : idx + 1] * dw
        return out

    return ambient(X, Y) - ambient(Y, X)


def d_alpha(X, Y, q, h=H_NESTED):
    """``d alpha(X, Y) = X alpha(Y) - Y alpha(X) - alpha([X, Y])`` by finite differences."""
    q = np.asarray(q, dtype=float)
    alpha_of = lambda V: ScalarField(lambda p: alpha(p, V.vector(p)))  # noqa: E731

    def along(V, phi):
        c = V.coefficients(q)
        return sum(c[..., i] * directional_derivative(phi, q, e, h) for i, e in enumerate(AXIS_NAMES))

    return along(X, alpha_of(Y)) - along(Y, alpha_of(X)) - alpha(q, vector_bracket(X, Y, q, h))


# -- named field catalogue -------------------------------------------------------

_COORD = {"w": 0, "x": 1, "y": 2, "z": 3}


def coordinate_field(name):
    idx = _COORD[name]
    return ScalarField(lambda q: q[..., idx], f"coord:{name}")


def sph_pullback(l, m):
    """``psi o p`` for the real harmonic ``psi = Y(l, m)`` on the base sphere."""
    return ScalarField(lambda q: real_sph(l, m, hopf_projection(q)), f"sph:{l},{m}")


def sph_pullback_derivative(l, m, axis):
    """Exact frame derivative of ``psi o p`` via the chain rule through ``d_hopf``."""
    e = axis_unit(axis)

    def fn(q):
        return dot(real_sph_grad(l, m, hopf_projection(q)), d_hopf(q, qmul(q, e)))

    return ScalarField(fn, f"{axis}(sph:{l},{m})")


def named_field(spec: str) -> ScalarField:
    """Resolve ids like ``coord:w``, ``sph:2,1``, ``const:0.5``, ``mono:1,0,2,0``."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "coord":
            return coordinate_field(arg)
        if kind == "const":
            return as_field(float(arg))
        if kind == "sph":
            l, m = (int(s) for s in arg.split(","))
            return sph_pullback(l, m)
        if kind == "mono":
            exps = tuple(int(s) for s in arg.split(","))
            if len(exps) != 4 or min(exps) < 0:
                raise ValueError
            return ScalarField(lambda q: np.prod(q ** np.array(exps, dtype=float), axis=-1), spec)
    except (KeyError, ValueError):
        pass
    raise ValueError(f"unknown field id {spec!r}")


TEST_FIELD_IDS = ("coord:w", "coord:y", "mono:1,1,0,0", "mono:0,1,1,1", "mono:2,0,0,1")


# -- identity checks -------------------------------------------------------------

def frame_identity_residuals(points, fields=None, h=H_DEFAULT, h_nested=H_NESTED):
    """Sup residuals of the bracket, curl and coframe identities at ``points``."""
    points = np.asarray(points, dtype=float)
    fields = [named_field(s) for s in TEST_FIELD_IDS] if fields is None else fields
    res = {}
    cyc = (("A", "B", "C"), ("B", "C", "A"), ("C", "A", "B"))
    for a, b, c in cyc:
        worst = 0.0
        for phi in fields:
            da = derivative_field(phi, a, h)
            db = derivative_field(phi, b, h)
            lhs = directional_derivative(db, points, a, h_nested) - directional_derivative(da, points, b, h_nested)
            rhs = 2.0 * directional_derivative(phi, points, c, h)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        res[f"bracket[{a},{b}]=2{c}"] = worst
    for name, X in zip(AXIS_NAMES, (FIELD_A, FIELD_B, FIELD_C)):
        cv = curl(X, points, h_nested).v + 2.0 * X.vector(points)
        res[f"curl({name})+2{name}"] = float(np.max(np.linalg.norm(cv, axis=-1)))
    res["dalpha(B,C)+2"] = float(np.max(np.abs(d_alpha(FIELD_B, FIELD_C, points, h_nested) + 2.0)))
    res["dalpha(A,B)"] = float(np.max(np.abs(d_alpha(FIELD_A, FIELD_B, points, h_nested))))
    res["dalpha(A,C)"] = float(np.max(np.abs(d_alpha(FIELD_A, FIELD_C, points, h_nested))))
    frame = np.stack([qmul(points, e) for e in (I, J, K)], axis=-2)
    gram = np.einsum("...ik,...jk->...ij", frame, frame)
    res["orthonormality"] = float(np.max(np.abs(gram - np.eye(3))))
    res["alpha(A)-1"] = float(np.max(np.abs(alpha(points, qmul(points, I)) - 1.0)))
    return res


# -- maps of S^3 -------------------------------------------------------------

def frame_jacobian(mapping, q, h=H_DEFAULT):
    """Matrix ``J[a, b] = <E_a(F(q)), dF(q) E_b(q)>`` of a map of S^3 in the frame.

    ``mapping`` takes an array ``(..., 4)`` of points.  Derivatives are
    central chord differences along the exact frame flows, divided by
    ``2 sin h`` so that isometries are measured exactly; all 7 evaluations
    per point are batched into one call.
    """
    q = np.asarray(q, dtype=float)
    stack = [q]
    for e in (I, J, K):
        stack.append(qmul(q, qexp(e, h)))
        stack.append(qmul(q, qexp(e, -h)))
    img = np.asarray(mapping(np.stack(stack)), dtype=float)
    fq = img[0]
    cols = [(img[1 + 2 * b] - img[2 + 2 * b]) / (2.0 * np.sin(h)) for b in range(3)]
    rows = [qmul(fq, e) for e in (I, J, K)]
    return np.stack([np.stack([dot(r, c) for c in cols], axis=-1) for r in rows], axis=-2)
