"""Area-preserving maps, curves and enclosed area on the unit two-sphere.

Maps are represented generatively (rotations, Hamiltonian stream flows and
their compositions) so that area preservation holds by construction.  The
non-area-preserving :class:`Squeeze` exists only as a negative control.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial.polynomial import polyval
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from .errors import AntipodalPoints, PoleOnLoop
from .harmonics import harmonic_profile
from .s3core import normalize, qmul, rotate_vector

ANTIPODAL_MARGIN = 1e-6
POLE_CANDIDATES = np.array(
    [[0, 0, 1], [0, 0, -1], [1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]], dtype=float
)
POLE_CLEARANCE = 0.2


def angle_between(a, b):
    """Great-circle distance between unit 3-vectors (stable for small and large angles)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.arctan2(np.linalg.norm(np.cross(a, b), axis=-1), np.sum(a * b, axis=-1))


def tangent_frame(n):
    """Orthonormal ``(e1, e2)`` at each ``n`` with ``e1 x e2 = n``."""
    n = np.asarray(n, dtype=float)
    helper = np.where(
        (np.abs(n[..., 0]) < 0.9)[..., None], np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    )
    e1 = normalize(np.cross(helper, n))
    e2 = np.cross(n, e1)
    return e1, e2


def sphere_exp(n, v):
    """Exponential map of the unit sphere at ``n`` applied to tangent ``v``."""
    r = np.linalg.norm(v, axis=-1, keepdims=True)
    safe = np.where(r > 0, r, 1.0)
    return np.cos(r) * n + np.sin(r) * v / safe


# -- stream functions ----------------------------------------------------------

@dataclass(frozen=True)
class StreamFunction:
    """A finite real spherical-harmonic expansion ``psi = sum c Y(l, m)``."""

    coeffs: tuple = ()

    def __post_init__(self):
        terms = tuple((int(l), int(m), float(c)) for l, m, c in self.coeffs)
        for l, m, _ in terms:
            if l < 0 or abs(m) > l:
                raise ValueError(f"invalid harmonic index ({l}, {m})")
        object.__setattr__(self, "coeffs", terms)
        # terms sharing an order m share the azimuthal factor: fold them into one z-polynomial
        combined = {}
        for l, m, c in terms:
            q, _ = harmonic_profile(l, m)
            combined[m] = combined.get(m, 0.0) + c * q
        polys = {m: (p.coef, p.deriv().coef) for m, p in combined.items()}
        object.__setattr__(self, "_polys", polys)

    @classmethod
    def random(cls, rng, lmax=3, scale=0.5):
        """Random expansion of degree 1..lmax with coefficients ``scale * N(0,1) / l``."""
        terms = []
        for l in range(1, lmax + 1):
            for m in range(-l, l + 1):
                terms.append((l, m, scale * rng.standard_normal() / l))
        return cls(tuple(terms))

    def _parts(self, n, grad):
        x, y, z = n[..., 0], n[..., 1], n[..., 2]
        w = x + 1j * y
        top = max((abs(m) for m in self._polys), default=0)
        powers = [np.ones_like(w)]
        for _ in range(top):
            powers.append(powers[-1] * w)
        val = np.zeros(x.shape)
        g = np.zeros(n.shape) if grad else None
        for m, (pc, dpc) in self._polys.items():
            mm = abs(m)
            pz = polyval(z, pc)
            if mm == 0:
                val += pz
                if grad:
                    g[..., 2] += polyval(z, dpc)
                continue
            wm = powers[mm]
            dw = mm * powers[mm - 1]
            if m > 0:
                az, ax_, ay_ = wm.real, dw.real, -dw.imag
            else:
                az, ax_, ay_ = wm.imag, dw.imag, dw.real
            val += pz * az
            if grad:
                g[..., 0] += pz * ax_
                g[..., 1] += pz * ay_
                g[..., 2] += polyval(z, dpc) * az
        return val, g

    def __call__(self, n):
        return self._parts(np.asarray(n, dtype=float), False)[0]

    def gradient(self, n):
        """Tangential gradient on the unit sphere."""
        n = np.asarray(n, dtype=float)
        g = self._parts(n, True)[1]
        return g - np.sum(g * n, axis=-1, keepdims=True) * n

    def to_spec(self):
        return [[l, m, c] for l, m, c in self.coeffs]


def hamiltonian_field(psi: StreamFunction, n):
    """Divergence-free field ``grad psi x n`` generated by ``psi``.

    With this orientation ``psi = z`` generates the counterclockwise rotation
    about the z axis at unit angular speed.
    """
    n = np.asarray(n, dtype=float)
    return np.cross(psi.gradient(n), n)


# -- maps ----------------------------------------------------------------------

class S2Map:
    """Base class: a vectorised map of the unit sphere."""

    area_preserving = True

    def __call__(self, n):
        raise NotImplementedError

    def inverse(self):
        raise NotImplementedError

    def to_spec(self):
        raise NotImplementedError

    def __matmul__(self, other):
        return Composition((self, other))


class Identity(S2Map):
    def __call__(self, n):
        return np.array(n, dtype=float)

    def inverse(self):
        return self

    def to_spec(self):
        return {"type": "rotation", "axis": [0.0, 0.0, 1.0], "angle": 0.0}

    def __repr__(self):
        return "Identity()"


class Rotation(S2Map):
    """Right-handed rotation by ``angle`` about ``axis``, applied as ``n -> u n u^-1``."""

    def __init__(self, axis, angle):
        axis = np.asarray(axis, dtype=float)
        norm = np.linalg.norm(axis)
        if norm == 0:
            raise ValueError("rotation axis must be non-zero")
        self.axis = axis / norm
        self.angle = float(angle)
        self.quaternion = np.concatenate([[np.cos(self.angle / 2)], np.sin(self.angle / 2) * self.axis])

    def __call__(self, n):
        return rotate_vector(self.quaternion, np.asarray(n, dtype=float))

    def inverse(self):
        return Rotation(self.axis, -self.angle)

    def to_spec(self):
        return {"type": "rotation", "axis": self.axis.tolist(), "angle": self.angle}

    def __repr__(self):
        return f"Rotation(axis={self.axis.tolist()}, angle={self.angle})"


class StreamFlow(S2Map):
    """Time-``time`` flow of :func:`hamiltonian_field`, RK4 with renormalisation."""

    def __init__(self, psi: StreamFunction, time: float, dt: float = 1e-3):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.psi = psi if isinstance(psi, StreamFunction) else StreamFunction(psi)
        self.time = float(time)
        self.dt = float(dt)
        self.steps = int(np.ceil(abs(self.time) / self.dt - 1e-9)) if self.time else 0

    def __call__(self, n):
        n = normalize(np.array(n, dtype=float))
        if self.steps == 0:
            return n
        h = self.time / self.steps
        vf = lambda p: hamiltonian_field(self.psi, p)  # noqa: E731
        for _ in range(self.steps):
            k1 = vf(n)
            k2 = vf(n + 0.5 * h * k1)
            k3 = vf(n + 0.5 * h * k2)
            k4 = vf(n + h * k3)
            n = normalize(n + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))
        return n

    def inverse(self):
        return StreamFlow(self.psi, -self.time, self.dt)

    def to_spec(self):
        return {"type": "stream", "coeffs": self.psi.to_spec(), "time": self.time, "dt": self.dt}

    def __repr__(self):
        return f"StreamFlow(terms={len(self.psi.coeffs)}, time={self.time}, dt={self.dt})"


class Composition(S2Map):
    """``maps[0] o maps[1] o ...``: the last map is applied first."""

    def __init__(self, maps: Sequence[S2Map]):
        self.maps = tuple(maps)
        self.area_preserving = all(m.area_preserving for m in self.maps)

    def __call__(self, n):
        out = np.array(n, dtype=float)
        for m in reversed(self.maps):
            out = m(out)
        return out

    def inverse(self):
        return Composition(tuple(m.inverse() for m in reversed(self.maps)))

    def to_spec(self):
        return {"type": "compose", "maps": [m.to_spec() for m in self.maps]}

    def __repr__(self):
        return f"Composition({list(self.maps)!r})"


class Squeeze(S2Map):
    """``n -> normalize(diag(factors) n)``; not area-preserving (negative control)."""

    area_preserving = False

    def __init__(self, factors=(1.0, 1.0, 2.0)):
        self.factors = np.asarray(factors, dtype=float)
        if self.factors.shape != (3,) or np.any(self.factors <= 0):
            raise ValueError("squeeze needs three positive factors")

    def __call__(self, n):
        return normalize(np.asarray(n, dtype=float) * self.factors)

    def inverse(self):
        return Squeeze(1.0 / self.factors)

    def to_spec(self):
        return {"type": "squeeze", "factors": self.factors.tolist()}

    def __repr__(self):
        return f"Squeeze({self.factors.tolist()})"


def apply_map(f: S2Map, n):
    return f(n)


def area_defect(f: S2Map, samples: int = 200, rng=None, h: float = 1e-4, points=None):
    """Sup over sample points of ``|det Df - 1|`` in orthonormal tangent frames.

    Derivatives are central chord differences along exact great circles,
    divided by ``2 sin h``; for isometries this is exact.
    """
    if points is None:
        if samples < 1:
            raise ValueError("samples must be >= 1")
        rng = np.random.default_rng(0) if rng is None else rng
        points = normalize(rng.standard_normal((samples, 3)))
    n = np.asarray(points, dtype=float)
    e1, e2 = tangent_frame(n)
    stack = np.concatenate([n, sphere_exp(n, h * e1), sphere_exp(n, -h * e1),
                            sphere_exp(n, h * e2), sphere_exp(n, -h * e2)])
    img = f(stack).reshape(5, len(n), 3)
    d1 = (img[1] - img[2]) / (2 * np.sin(h))
    d2 = (img[3] - img[4]) / (2 * np.sin(h))
    det = np.sum(img[0] * np.cross(d1, d2), axis=-1)
    return float(np.max(np.abs(det - 1.0)))


# -- curves --------------------------------------------------------------------

class CurveS2:
    """A curve ``[0, 1] -> S^2``.  Subclasses provide vectorised ``__call__``.

    ``velocity`` returns the analytic derivative when a subclass knows it and
    ``None`` otherwise, in which case callers differentiate samples.
    """

    closed = False

    def __call__(self, t):
        raise NotImplementedError

    def velocity(self, t) -> Optional[np.ndarray]:
        return None

    def pieces(self):
        """Smooth pieces as ``(curve, t_start, t_end)`` covering [0, 1]."""
        return [(self, 0.0, 1.0)]

    def start(self):
        return self(np.array(0.0))

    def end(self):
        return self(np.array(1.0))

    def reversed(self):
        return Reversed(self)


def grid_velocity(points, t):
    """Fourth-order finite-difference derivative of samples on a uniform grid."""
    points = np.asarray(points, dtype=float)
    n = len(points)
    if n < 5:
        return np.gradient(points, t, axis=0)
    h = t[1] - t[0]
    d = np.empty_like(points)
    p = points
    d[2:-2] = (p[:-4] - 8 * p[1:-3] + 8 * p[3:-1] - p[4:]) / (12 * h)
    d[0] = (-25 * p[0] + 48 * p[1] - 36 * p[2] + 16 * p[3] - 3 * p[4]) / (12 * h)
    d[1] = (-3 * p[0] - 10 * p[1] + 18 * p[2] - 6 * p[3] + p[4]) / (12 * h)
    d[-1] = (25 * p[-1] - 48 * p[-2] + 36 * p[-3] - 16 * p[-4] + 3 * p[-5]) / (12 * h)
    d[-2] = (3 * p[-1] + 10 * p[-2] - 18 * p[-3] + 6 * p[-4] - p[-5]) / (12 * h)
    return d


def sample_curve(curve: CurveS2, t):
    """Positions and velocities of a smooth curve on the uniform grid ``t``."""
    t = np.asarray(t, dtype=float)
    pts = curve(t)
    vel = curve.velocity(t)
    if vel is None:
        vel = grid_velocity(pts, t)
    return pts, vel


class Constant(CurveS2):
    def __init__(self, y, closed=False):
        self.y = normalize(np.asarray(y, dtype=float))
        self.closed = closed

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.y, t.shape + (3,)).copy()

    def velocity(self, t):
        return np.zeros(np.shape(t) + (3,))


class Geodesic(CurveS2):
    """Constant-speed minimising great-circle arc."""

    def __init__(self, y0, y1):
        self.y0 = normalize(np.asarray(y0, dtype=float))
        self.y1 = normalize(np.asarray(y1, dtype=float))
        self.length = float(angle_between(self.y0, self.y1))
        if self.length > np.pi - ANTIPODAL_MARGIN:
            raise AntipodalPoints("endpoints are antipodal; the geodesic is not unique")
        if self.length > 0:
            u = self.y1 - np.dot(self.y0, self.y1) * self.y0
            self.direction = u / np.linalg.norm(u)
        else:
            self.direction = np.zeros(3)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        s = self.length * t
        return np.cos(s) * self.y0 + np.sin(s) * self.direction

    def velocity(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        s = self.length * t
        return self.length * (-np.sin(s) * self.y0 + np.cos(s) * self.direction)


def geodesic(y0, y1) -> Geodesic:
    return Geodesic(y0, y1)


class Circle(CurveS2):
    """Small circle at angular radius ``colatitude`` about ``axis``.

    Traversed counterclockwise as seen from outside the sphere above ``axis``;
    ``turns`` may be negative to reverse the orientation.
    """

    closed = True

    def __init__(self, colatitude, axis=(0.0, 0.0, 1.0), phase=0.0, turns=1.0):
        self.colatitude = float(colatitude)
        self.axis = normalize(np.asarray(axis, dtype=float))
        self.phase = float(phase)
        self.turns = float(turns)
        self.e1, self.e2 = tangent_frame(self.axis)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        phi = self.phase + 2 * np.pi * self.turns * t
        a = self.colatitude
        return np.cos(a) * self.axis + np.sin(a) * (np.cos(phi) * self.e1 + np.sin(phi) * self.e2)

    def velocity(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        phi = self.phase + 2 * np.pi * self.turns * t
        w = 2 * np.pi * self.turns * np.sin(self.colatitude)
        return w * (-np.sin(phi) * self.e1 + np.cos(phi) * self.e2)


class SampledLoop(CurveS2):
    """Closed curve through given points via a periodic cubic spline, projected to the sphere."""

    closed = True

    def __init__(self, points):
        pts = normalize(np.asarray(points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 3:
            raise ValueError("need at least three 3-vectors")
        if np.linalg.norm(pts[0] - pts[-1]) > 1e-10:
            pts = np.vstack([pts, pts[:1]])
        keep = np.concatenate([[True], np.linalg.norm(np.diff(pts, axis=0), axis=1) > 1e-12])
        pts = pts[keep]
        if len(pts) < 4:
            raise ValueError("loop needs at least three distinct points")
        self.points = pts
        chord = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        knots = np.concatenate([[0.0], np.cumsum(chord)])
        self._spline = CubicSpline(knots / knots[-1], pts, bc_type="periodic")

    def __call__(self, t):
        return normalize(self._spline(np.asarray(t, dtype=float)))

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        s = self._spline(t)
        ds = self._spline(t, 1)
        r = np.linalg.norm(s, axis=-1, keepdims=True)
        u = s / r
        return (ds - np.sum(ds * u, axis=-1, keepdims=True) * u) / r


class FunctionCurve(CurveS2):
    """Curve from a user procedure (optionally with its derivative)."""

    def __init__(self, fn: Callable, velocity: Optional[Callable] = None, closed=False):
        self.fn = fn
        self._velocity = velocity
        self.closed = closed

    def __call__(self, t):
        return normalize(np.asarray(self.fn(np.asarray(t, dtype=float)), dtype=float))

    def velocity(self, t):
        return None if self._velocity is None else np.asarray(self._velocity(np.asarray(t, dtype=float)))


class MappedCurve(CurveS2):
    """``f o curve`` for a sphere map ``f``."""

    def __init__(self, f: S2Map, curve: CurveS2):
        self.f = f
        self.curve = curve
        self.closed = curve.closed

    def __call__(self, t):
        return self.f(self.curve(t))

    def pieces(self):
        return [(MappedCurve(self.f, c), a, b) for c, a, b in self.curve.pieces()]


class Reversed(CurveS2):
    def __init__(self, curve: CurveS2):
        self.curve = curve
        self.closed = curve.closed

    def __call__(self, t):
        return self.curve(1.0 - np.asarray(t, dtype=float))

    def velocity(self, t):
        v = self.curve.velocity(1.0 - np.asarray(t, dtype=float))
        return None if v is None else -v

    def pieces(self):
        return [(Reversed(c), 1.0 - b, 1.0 - a) for c, a, b in reversed(self.curve.pieces())]


class Restricted(CurveS2):
    """The sub-arc ``t in [a, b]`` of ``curve``, reparametrised over [0, 1]."""

    def __init__(self, curve: CurveS2, a: float, b: float):
        self.curve, self.a, self.b = curve, float(a), float(b)

    def __call__(self, t):
        return self.curve(self.a + (self.b - self.a) * np.asarray(t, dtype=float))

    def velocity(self, t):
        v = self.curve.velocity(self.a + (self.b - self.a) * np.asarray(t, dtype=float))
        return None if v is None else (self.b - self.a) * v


class Concatenation(CurveS2):
    """Curves traversed one after another, each over an equal share of [0, 1]."""

    def __init__(self, curves: Sequence[CurveS2], tol=1e-8):
        flat = []
        for c in curves:
            flat.extend(c.curves if isinstance(c, Concatenation) else [c])
        for a, b in zip(flat[:-1], flat[1:]):
            if np.linalg.norm(a.end() - b.start()) > tol:
                raise ValueError("consecutive curves do not join")
        self.curves = tuple(flat)
        self.closed = bool(np.linalg.norm(flat[0].start() - flat[-1].end()) <= tol)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        m = len(self.curves)
        idx = np.clip(np.floor(t * m).astype(int), 0, m - 1)
        local = t * m - idx
        out = np.empty(t.shape + (3,))
        for k, c in enumerate(self.curves):
            sel = idx == k
            if np.any(sel):
                out[sel] = c(local[sel])
        return out

    def pieces(self):
        m = len(self.curves)
        out = []
        for k, c in enumerate(self.curves):
            for piece, a, b in c.pieces():
                out.append((piece, (k + a) / m, (k + b) / m))
        return out


# -- enclosed area -------------------------------------------------------------

def choose_pole(points):
    """First of ``+-z, +-x, +-y`` at least 0.2 rad from every point."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    for pole in POLE_CANDIDATES:
        if np.min(angle_between(points, pole)) >= POLE_CLEARANCE:
            return pole
    raise PoleOnLoop("no admissible integration pole: the loop passes near all six candidates")


def loop_area(loop: CurveS2, samples: int = 2001) -> float:
    """Signed enclosed area on the unit sphere, reduced to [0, 4 pi).

    Positive orientation is counterclockwise as seen from outside.  The
    area is the integral of the Dirac-string potential about a pole ``s``
    chosen off the loop, which is exact modulo 4 pi.
    """
    if samples % 2 == 0:
        samples += 1
    t = np.linspace(0.0, 1.0, samples)
    sampled = []
    for piece, _, _ in loop.pieces():
        sampled.append(sample_curve(piece, t))
    allpts = np.concatenate([p for p, _ in sampled])
    if np.linalg.norm(allpts[0] - allpts[-1]) > 1e-8:
        raise ValueError("curve is not closed")
    north = -choose_pole(allpts)
    total = 0.0
    for pts, vel in sampled:
        integrand = np.cross(pts, vel) @ north / (1.0 + pts @ north)
        total += simpson(integrand, x=t)
    area = float(np.mod(total, 4 * np.pi))
    if 4 * np.pi - area < 1e-9:
        area = 0.0
    return area


# -- deformations ----------------------------------------------------------------

class DeformationS2:
    """A path ``t -> Phi(t)`` of sphere maps with ``Phi(0) = id``."""

    def __call__(self, t: float) -> S2Map:
        raise NotImplementedError

    def to_spec(self):
        raise NotImplementedError


class ConstantDeformation(DeformationS2):
    def __call__(self, t):
        return Identity()

    def to_spec(self):
        return {"type": "constant"}


@dataclass
class RotationFamily(DeformationS2):
    """Rotation about a fixed axis by ``t * angle``."""

    axis: Sequence[float] = (0.0, 0.0, 1.0)
    angle: float = 1.0

    def __call__(self, t):
        return Rotation(self.axis, float(t) * self.angle)

    def to_spec(self):
        return {"type": "rotation", "axis": list(map(float, self.axis)), "angle": float(self.angle)}


@dataclass
class StreamFamily(DeformationS2):
    """Stream flow of ``psi`` for time ``t * time``."""

    psi: StreamFunction = field(default_factory=StreamFunction)
    time: float = 1.0
    dt: float = 1e-2

    def __call__(self, t):
        return StreamFlow(self.psi, float(t) * self.time, self.dt)

    def to_spec(self):
        return {"type": "stream", "coeffs": self.psi.to_spec(), "time": self.time, "dt": self.dt}


def compose(outer: S2Map, inner: S2Map) -> S2Map:
    """``outer o inner``, folding identities and rotation pairs exactly."""
    if isinstance(inner, Identity):
        return outer
    if isinstance(outer, Identity):
        return inner
    if isinstance(outer, Rotation) and isinstance(inner, Rotation):
        u = qmul(outer.quaternion, inner.quaternion)
        s = np.linalg.norm(u[1:])
        if s < 1e-15:
            return Identity()
        return Rotation(u[1:] / s, 2 * np.arctan2(s, u[0]))
    return Composition((outer, inner))
