"""Strict contactomorphisms of S^3 lifted from area-preserving maps of S^2.

A lift is evaluated lazily: transport ``x`` horizontally back to the base
fibre over ``y0`` along the chosen base path, apply the nearest-neighbour
map onto the fibre over ``f(y0)`` (rotated by ``gauge``), then transport
horizontally along the image path under ``f``.
"""

import csv
import threading
from typing import Optional, Sequence

import numpy as np

from .errors import AntipodalEvaluation, BaseMoveTooFar, NotAreaPreserving, NotConstantAngle, NotInChart
from .s2maps import (
    ANTIPODAL_MARGIN,
    Composition,
    Identity,
    Rotation,
    S2Map,
    angle_between,
    area_defect,
    grid_velocity,
    tangent_frame,
)
from .s3core import (
    H_DEFAULT,
    I,
    frame_jacobian,
    hopf_projection,
    hopf_section,
    normalize,
    qexp,
    qmul,
    random_s3,
)
from .transport import fiber_angle, lift_samples, nearest_neighbor, wrap_angle

DEFAULT_BASE = np.array([1.0, 0.0, 0.0])
CHART_RADIUS = np.pi / 2
AREA_TOL = 1e-5
FIBER_KEY_GRID = 1e-11


class FiberMap:
    """A batched map of S^3 that permutes Hopf fibres.

    Subclasses implement ``_eval`` on arrays of shape ``(M, 4)`` and
    ``base_map`` returning the covered sphere map when it is known.
    """

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = normalize(x.reshape(-1, 4))
        return self._eval(flat).reshape(x.shape)

    def _eval(self, x):
        raise NotImplementedError

    def base_map(self) -> S2Map:
        return InducedMap(self)

    def __matmul__(self, other):
        return ComposedFiberMap((self, other))


class UniformRotation(FiberMap):
    """``x -> x exp(i theta)``: every fibre rotated through the same angle."""

    def __init__(self, theta: float):
        self.theta = float(theta)
        self._u = qexp(I, self.theta)

    def _eval(self, x):
        return qmul(x, self._u)

    def base_map(self):
        return Identity()


def uniform_rotation(theta: float) -> UniformRotation:
    return UniformRotation(theta)


def rotation_from_quaternion(u) -> S2Map:
    """Sphere rotation ``n -> u n u^-1``."""
    u = normalize(np.asarray(u, dtype=float))
    s = np.linalg.norm(u[1:])
    if s < 1e-15:
        return Identity()
    return Rotation(u[1:] / s, 2 * np.arctan2(s, u[0]))


class LeftMultiplication(FiberMap):
    """``x -> u x`` for a unit quaternion ``u``; covers the rotation ``n -> u n u^-1``."""

    def __init__(self, u):
        self.u = normalize(np.asarray(u, dtype=float))

    def _eval(self, x):
        return qmul(self.u, x)

    def base_map(self):
        return rotation_from_quaternion(self.u)


class ComposedFiberMap(FiberMap):
    """``maps[0] o maps[1] o ...`` (the last is applied first)."""

    def __init__(self, maps: Sequence[FiberMap]):
        self.maps = tuple(maps)

    def _eval(self, x):
        for m in reversed(self.maps):
            x = m._eval(x)
        return x

    def base_map(self):
        return Composition(tuple(m.base_map() for m in self.maps))


class FiberTwist(FiberMap):
    """``x -> F(x) exp(i phi(p(x)))`` with a fibre-dependent angle ``phi``.

    Still permutes fibres rigidly but does not preserve the contact form
    unless ``phi`` is constant; used as a fault-injection control.
    """

    def __init__(self, inner: FiberMap, phi):
        self.inner = inner
        self.phi = phi

    def _eval(self, x):
        ang = np.asarray(self.phi(hopf_projection(x)), dtype=float)
        return qmul(self.inner._eval(x), qexp(I, ang))

    def base_map(self):
        return self.inner.base_map()


class InducedMap(S2Map):
    """The sphere map ``y -> p(F(s(y)))`` for any fibre point ``s(y)``."""

    def __init__(self, F: FiberMap):
        self.F = F

    def __call__(self, n):
        return hopf_projection(self.F(hopf_section(np.asarray(n, dtype=float))))

    def inverse(self):
        raise NotImplementedError("induced maps are not inverted")

    def to_spec(self):
        return {"type": "induced"}


def bundle_projection(F: FiberMap) -> InducedMap:
    return InducedMap(F)


def fiber_point_independence(F: FiberMap, samples=50, rng=None):
    """Sup distance between projections of two random points of each of ``samples`` fibres."""
    rng = np.random.default_rng(0) if rng is None else rng
    x = random_s3(samples, rng)
    xt = qmul(x, qexp(I, rng.uniform(-np.pi, np.pi, samples)))
    return float(np.max(np.linalg.norm(hopf_projection(F(x)) - hopf_projection(F(xt)), axis=-1)))


# -- the lift ----------------------------------------------------------------

def _leg_grid(a, b, grid):
    """Great arcs from ``a[m]`` to ``b[m]`` sampled at ``grid``: shape (S, M, 3), with velocities."""
    length = angle_between(a, b)
    u = b - np.sum(a * b, axis=-1, keepdims=True) * a
    un = np.linalg.norm(u, axis=-1, keepdims=True)
    u = np.where(un > 1e-300, u / np.where(un > 1e-300, un, 1.0), 0.0)
    s = grid[:, None, None] * length[None, :, None]
    pts = np.cos(s) * a + np.sin(s) * u
    vel = length[None, :, None] * (-np.sin(s) * a + np.cos(s) * u)
    return pts, vel


class Quantomorphism(FiberMap):
    """Lift of an area-preserving sphere map to a strict contactomorphism.

    Parameters
    ----------
    f : S2Map
        The covered map of the base.
    y0 : array_like, shape (3,)
        Base point whose fibre is sent to the fibre over ``f(y0)`` by the
        nearest-neighbour map.
    gauge : float
        Fibre rotation applied after the nearest-neighbour map.
    via : array_like, optional
        Waypoint; base paths then run ``y0 -> via -> p(x)``.
    lift_steps : int
        RK4 steps per geodesic leg for transport along the image path.
    reroute_antipodal : bool
        Route points over the antipode of ``y0`` through a perpendicular
        waypoint instead of raising :class:`AntipodalEvaluation`.
    memoize : bool
        Cache one evaluation per fibre and reuse it through fibre rigidity.
    certify : bool
        Check area preservation and the chart condition on construction.
    isometry_shortcut : bool
        For rotations, replace the RK4 transport along the (great-arc) image
        path by the closed-form nearest-neighbour map.
    """

    def __init__(
        self,
        f: S2Map,
        y0=DEFAULT_BASE,
        gauge: float = 0.0,
        via: Optional[np.ndarray] = None,
        lift_steps: int = 200,
        reroute_antipodal: bool = True,
        memoize: bool = True,
        certify: bool = True,
        isometry_shortcut: bool = True,
    ):
        self.f = f
        self.y0 = normalize(np.asarray(y0, dtype=float))
        self.gauge = float(gauge)
        self.via = None if via is None else normalize(np.asarray(via, dtype=float))
        self.lift_steps = int(lift_steps)
        self.reroute_antipodal = reroute_antipodal
        self.memoize = memoize
        self.isometry_shortcut = isometry_shortcut
        self.fy0 = f(self.y0)
        self.base_move = float(angle_between(self.y0, self.fy0))
        if certify:
            if not getattr(f, "area_preserving", True):
                raise NotAreaPreserving(f"{f!r} is not area-preserving")
            defect = area_defect(f, 64)
            if defect > AREA_TOL:
                raise NotAreaPreserving(f"area defect {defect:.3g} exceeds {AREA_TOL}")
        if self.base_move >= CHART_RADIUS and certify:
            raise BaseMoveTooFar(f"f moves the base point by {self.base_move:.3f} >= pi/2")
        self._cache = {}
        self._lock = threading.Lock()
        self._perp = tangent_frame(self.y0)[0]

    def base_map(self):
        return self.f

    def with_gauge(self, gauge):
        return Quantomorphism(self.f, self.y0, gauge, self.via, self.lift_steps, self.reroute_antipodal,
                              self.memoize, certify=False, isometry_shortcut=self.isometry_shortcut)

    def base_fiber_map(self, x0):
        """Nearest-neighbour map from the fibre over ``y0`` to the fibre over ``f(y0)``, then the gauge."""
        return qmul(nearest_neighbor(x0, self.fy0), qexp(I, self.gauge))

    def _waypoints(self, y):
        """Per-point waypoint (NaN row for a direct geodesic)."""
        wp = np.full(y.shape, np.nan)
        if self.via is not None:
            wp[:] = self.via
            bad = angle_between(self.via, y) > np.pi - ANTIPODAL_MARGIN
            bad |= angle_between(self.via, self.y0) > np.pi - ANTIPODAL_MARGIN
        else:
            bad = angle_between(self.y0, y) > np.pi - ANTIPODAL_MARGIN
            if self.reroute_antipodal:
                wp[bad] = self._perp
                bad = np.zeros_like(bad)
        if np.any(bad):
            raise AntipodalEvaluation("base path through an antipodal pair; use a waypoint")
        return wp

    def _legs(self, y):
        """Lists of (start, end) arrays per leg, plus the selector of points using a waypoint."""
        wp = self._waypoints(y)
        two = ~np.isnan(wp[:, 0])
        return wp, two

    def _transport_image(self, z, starts, ends):
        """Transport ``z`` horizontally along ``f`` applied to great arcs ``starts -> ends``."""
        grid = np.linspace(0.0, 1.0, 2 * self.lift_steps + 1)
        if isinstance(self.f, (Identity, Rotation)) and self.isometry_shortcut:
            # the image of a great arc is a great arc; transport along it is the nearest-neighbour map
            return nearest_neighbor(z, self.f(ends))
        pts, vel = _leg_grid(starts, ends, grid)
        if isinstance(self.f, (Identity, Rotation)):
            ipts, ivel = self.f(pts), self.f(vel)
        else:
            ipts = self.f(pts.reshape(-1, 3)).reshape(pts.shape)
            ivel = grid_velocity(ipts, grid)
        return lift_samples(ipts, ivel, z)

    def _compute(self, x):
        y = hopf_projection(x)
        wp, two = self._legs(y)
        m = len(x)
        y0 = np.broadcast_to(self.y0, (m, 3))
        # back to the base fibre: transport along geodesics is the nearest-neighbour map
        x0 = np.array(x)
        if np.any(two):
            x0[two] = nearest_neighbor(x0[two], wp[two])
        x0 = nearest_neighbor(x0, y0)
        z = self.base_fiber_map(x0)
        out = np.empty_like(x)
        one = ~two
        if np.any(one):
            out[one] = self._transport_image(z[one], y0[one], y[one])
        if np.any(two):
            mid = self._transport_image(z[two], y0[two], wp[two])
            out[two] = self._transport_image(mid, wp[two], y[two])
        return out

    def _eval(self, x):
        if not self.memoize:
            return self._compute(x)
        y = hopf_projection(x)
        keys = [tuple(k) for k in np.round(y / FIBER_KEY_GRID).astype(np.int64)]
        reps = {}
        for idx, key in enumerate(keys):
            if key not in self._cache and key not in reps:
                reps[key] = idx
        if reps:
            sel = np.fromiter(reps.values(), dtype=int)
            vals = self._compute(x[sel])
            with self._lock:
                for key, i, v in zip(reps, sel, vals):
                    self._cache.setdefault(key, (x[i].copy(), v))
        rep_x = np.stack([self._cache[k][0] for k in keys])
        rep_f = np.stack([self._cache[k][1] for k in keys])
        shift = fiber_angle(rep_x, x, tol=1e-9)
        return qmul(rep_f, qexp(I, shift))


def lift_diffeo(f: S2Map, y0=DEFAULT_BASE, gauge: float = 0.0, **kwargs) -> Quantomorphism:
    return Quantomorphism(f, y0, gauge, **kwargs)


# -- defect measurements -------------------------------------------------------

def _sample_points(samples, rng, points):
    if points is not None:
        return np.asarray(points, dtype=float)
    rng = np.random.default_rng(0) if rng is None else rng
    return random_s3(samples, rng)


def pullback_defect(F: FiberMap, samples=20, rng=None, points=None, h=H_DEFAULT):
    """Sup over points and unit frame directions of ``|alpha(dF v) - alpha(v)|``."""
    jac = frame_jacobian(F, _sample_points(samples, rng, points), h)
    return float(np.max(np.linalg.norm(jac[:, 0, :] - np.array([1.0, 0.0, 0.0]), axis=-1)))


def volume_defect(F: FiberMap, samples=20, rng=None, points=None, h=H_DEFAULT):
    jac = frame_jacobian(F, _sample_points(samples, rng, points), h)
    return float(np.max(np.abs(np.linalg.det(jac) - 1.0)))


def fiber_rigidity_defect(F: FiberMap, samples=20, rng=None, points=None):
    """Sup of ``|F(x exp(it)) - F(x) exp(it)|`` over random points and angles."""
    rng = np.random.default_rng(1) if rng is None else rng
    x = _sample_points(samples, rng, points)
    t = rng.uniform(-np.pi, np.pi, len(x))
    r = qexp(I, t)
    return float(np.max(np.linalg.norm(F(qmul(x, r)) - qmul(F(x), r), axis=-1)))


def projection_defect(F: FiberMap, f: S2Map, samples=20, rng=None, points=None):
    """Sup of ``|p(F(x)) - f(p(x))|``."""
    x = _sample_points(samples, rng, points)
    return float(np.max(np.linalg.norm(hopf_projection(F(x)) - f(hopf_projection(x)), axis=-1)))


def path_independence_defect(f: S2Map, x, via, y0=DEFAULT_BASE, lift_steps: int = 200):
    """Fibre angle from the geodesic-path evaluation of the lift to the waypoint-path one.

    Zero for area-preserving ``f``; in general half the change of enclosed
    unit-sphere area between the base loop and its image, modulo 2 pi.
    """
    kw = dict(lift_steps=lift_steps, memoize=False, certify=False, reroute_antipodal=False)
    geo = Quantomorphism(f, y0, **kw)
    way = Quantomorphism(f, y0, via=via, **kw)
    x = np.asarray(x, dtype=float)
    return fiber_angle(geo(x), way(x), tol=1e-7)


def unitary_deviation(F: FiberMap, u, samples=50, rng=None, points=None):
    """Distance of ``F`` from ``x -> u x`` modulo one common fibre phase.

    Returns ``(sup deviation, phase)``.
    """
    x = _sample_points(samples, rng, points)
    ref = qmul(np.asarray(u, dtype=float), x)
    got = F(x)
    ang = fiber_angle(ref, got, tol=1e-6)
    phase = float(np.angle(np.mean(np.exp(1j * ang))))
    return float(np.max(np.linalg.norm(got - qmul(ref, qexp(I, phase)), axis=-1))), phase


# -- trivialisation ------------------------------------------------------------

class Trivialization:
    """Result of :func:`trivialize`."""

    def __init__(self, theta, base_map, residual, projection_residual):
        self.theta = theta
        self.base_map = base_map
        self.residual = residual
        self.projection_residual = projection_residual

    def __iter__(self):
        return iter((self.theta, self.base_map))


def trivialize(
    G: FiberMap,
    y0=DEFAULT_BASE,
    samples: int = 50,
    rng=None,
    tol: float = 1e-4,
    lift_steps: int = 200,
) -> Trivialization:
    """Split ``G`` into ``(theta, f)`` with ``G = (slice lift of f) o exp(i theta)``.

    The angle between ``G`` and the gauge-zero slice lift of its base map is
    measured on ``samples`` random fibres; it must be constant.
    """
    rng = np.random.default_rng(2) if rng is None else rng
    y0 = normalize(np.asarray(y0, dtype=float))
    f = G.base_map()
    move = float(angle_between(y0, f(y0)))
    if move >= CHART_RADIUS:
        raise NotInChart(f"base map moves y0 by {move:.3f} >= pi/2")
    F = Quantomorphism(f, y0, 0.0, lift_steps=lift_steps, certify=False)
    x = random_s3(samples, rng)
    gx = G(x)
    proj_res = float(np.max(np.linalg.norm(hopf_projection(gx) - f(hopf_projection(x)), axis=-1)))
    theta = fiber_angle(F(x), gx, tol=1e-6)
    mean = float(np.angle(np.mean(np.exp(1j * theta))))
    residual = float(np.max(np.abs(wrap_angle(theta - mean))))
    if residual > tol:
        raise NotConstantAngle(f"fibre angle varies by {residual:.3g}; map is not a strict contactomorphism")
    return Trivialization(mean, f, residual, proj_res)


# -- export --------------------------------------------------------------------

def export_samples(F: FiberMap, points, path):
    """CSV with columns ``w,x,y,z,w',x',y',z'``."""
    points = np.asarray(points, dtype=float)
    images = F(points)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["w", "x", "y", "z", "w'", "x'", "y'", "z'"])
        for a, b in zip(points, images):
            w.writerow([repr(float(c)) for c in np.concatenate([a, b])])
