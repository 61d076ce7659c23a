"""Horizontal transport in the Hopf bundle.

Closed-form nearest-neighbour maps between fibres, RK4 horizontal lifts of
sphere curves with per-step snapping back onto the target fibre, fibre
angles, and holonomy.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DifferentFibers, OrthogonalFibers, TrackingLoss
from .s2maps import CurveS2, grid_velocity
from .s3core import I, dot, hopf_projection, hopf_section, normalize, qmul

FIBER_TOL = 1e-8
SNAP_LIMIT = 0.01
DEFAULT_DT = 1e-3


def nearest_neighbor(x, y2):
    """Closest point to ``x`` on the fibre over ``y2`` (broadcasts)."""
    x = np.asarray(x, dtype=float)
    x2 = hopf_section(y2)
    a = dot(x, x2)
    b = dot(x, qmul(x2, I))
    r2 = a * a + b * b
    if np.any(r2 < 1e-12):
        raise OrthogonalFibers("fibres are orthogonal; the nearest point is not unique")
    r = np.sqrt(r2)[..., None]
    return (a[..., None] * x2 + b[..., None] * qmul(x2, I)) / r


def fiber_angle(x1, x2, tol=FIBER_TOL):
    """The ``t`` in (-pi, pi] with ``x2 = x1 exp(i t)``."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    gap = np.linalg.norm(hopf_projection(x1) - hopf_projection(x2), axis=-1)
    if np.any(gap > tol):
        raise DifferentFibers(f"points lie on different fibres (base gap {np.max(gap):.3g})")
    t = np.arctan2(dot(x2, qmul(x1, I)), dot(x2, x1))
    return np.where(t <= -np.pi, t + 2 * np.pi, t)


def wrap_angle(t):
    """Reduce to (-pi, pi]."""
    t = np.mod(np.asarray(t, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(t <= -np.pi, t + 2 * np.pi, t)


def _rate(w, x, y, z, v0, v1, v2):
    """Horizontal velocity ``q (b j + c k)`` covering base velocity ``v``, by components."""
    b = -(v0 * (x * z + w * y) + v1 * (y * z - w * x)) - 0.5 * v2 * (w * w - x * x - y * y + z * z)
    c = v0 * (x * y - w * z) + 0.5 * v1 * (w * w - x * x + y * y - z * z) + v2 * (y * z + w * x)
    return -y * b - z * c, y * c - z * b, w * b - x * c, w * c + x * b


def _snap(w, x, y, z, n0, n1, n2):
    """Component form of :func:`nearest_neighbor` onto the fibre over ``n``."""
    near = n0 >= 0.0
    sw = np.where(near, 1.0 + n0, -n2)
    sx = np.where(near, 0.0, n1)
    sy = np.where(near, -n2, 1.0 - n0)
    sz = np.where(near, n1, 0.0)
    r = np.sqrt(sw * sw + sx * sx + sy * sy + sz * sz)
    sw, sx, sy, sz = sw / r, sx / r, sy / r, sz / r
    a = w * sw + x * sx + y * sy + z * sz
    b = -w * sx + x * sw + y * sz - z * sy
    m = a * a + b * b
    if np.any(m < 1e-12):
        raise OrthogonalFibers("fibres are orthogonal; the nearest point is not unique")
    m = np.sqrt(m)
    a, b = a / m, b / m
    return a * sw - b * sx, a * sx + b * sw, a * sy + b * sz, a * sz - b * sy


def lift_samples(points, velocities, x0, keep_path=False):
    """Batched RK4 horizontal lift over a uniform stage grid.

    ``points`` and ``velocities`` have shape ``(2K+1, ..., 3)``; step ``k``
    uses grid rows ``2k, 2k+1, 2k+2`` and the step size is two grid spacings
    of a unit parameter interval.  After each step the state is snapped to
    the nearest point of the fibre over the next grid point.  Returns the
    endpoint, or every step state (shape ``(K+1, ..., 4)``) when
    ``keep_path`` is set.
    """
    points = np.asarray(points, dtype=float)
    velocities = np.asarray(velocities, dtype=float)
    rows = points.shape[0]
    if rows % 2 != 1:
        raise ValueError("stage grid needs an odd number of rows")
    steps = (rows - 1) // 2
    shape = np.broadcast_shapes(points.shape[1:-1], np.shape(x0)[:-1])
    q = np.broadcast_to(np.asarray(x0, dtype=float), shape + (4,))
    P = np.moveaxis(np.broadcast_to(points, (rows,) + shape + (3,)), -1, 0)
    V = np.moveaxis(np.broadcast_to(velocities, (rows,) + shape + (3,)), -1, 0)
    w, x, y, z = (q[..., i].copy() for i in range(4))
    path = [np.stack([w, x, y, z], axis=-1)] if keep_path else None
    h = 1.0 / max(steps, 1)
    worst = 0.0
    for k in range(steps):
        i0, im, i1 = 2 * k, 2 * k + 1, 2 * k + 2
        a = _rate(w, x, y, z, V[0, i0], V[1, i0], V[2, i0])
        hh = 0.5 * h
        b = _rate(w + hh * a[0], x + hh * a[1], y + hh * a[2], z + hh * a[3], V[0, im], V[1, im], V[2, im])
        c = _rate(w + hh * b[0], x + hh * b[1], y + hh * b[2], z + hh * b[3], V[0, im], V[1, im], V[2, im])
        d = _rate(w + h * c[0], x + h * c[1], y + h * c[2], z + h * c[3], V[0, i1], V[1, i1], V[2, i1])
        s6 = h / 6.0
        tw = w + s6 * (a[0] + 2 * b[0] + 2 * c[0] + d[0])
        tx = x + s6 * (a[1] + 2 * b[1] + 2 * c[1] + d[1])
        ty = y + s6 * (a[2] + 2 * b[2] + 2 * c[2] + d[2])
        tz = z + s6 * (a[3] + 2 * b[3] + 2 * c[3] + d[3])
        r = np.sqrt(tw * tw + tx * tx + ty * ty + tz * tz)
        tw, tx, ty, tz = tw / r, tx / r, ty / r, tz / r
        w, x, y, z = _snap(tw, tx, ty, tz, P[0, i1], P[1, i1], P[2, i1])
        jump = np.sqrt((w - tw) ** 2 + (x - tx) ** 2 + (y - ty) ** 2 + (z - tz) ** 2)
        worst = max(worst, float(np.max(jump, initial=0.0)))
        if worst > SNAP_LIMIT:
            raise TrackingLoss(f"fibre correction {worst:.3g} rad exceeds {SNAP_LIMIT}; reduce dt")
        if keep_path:
            path.append(np.stack([w, x, y, z], axis=-1))
    if keep_path:
        return np.stack(path)
    return np.stack([w, x, y, z], axis=-1)


def steps_for(dt, span=1.0):
    if dt <= 0:
        raise ValueError("dt must be positive")
    return max(1, int(np.ceil(span / dt - 1e-9)))


@dataclass(frozen=True)
class PathS3:
    """Samples ``(t_k, q_k)`` of a path in S^3, geodesically interpolated."""

    times: np.ndarray
    points: np.ndarray

    def __call__(self, t):
        t = float(t)
        k = int(np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2))
        t0, t1 = self.times[k], self.times[k + 1]
        s = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        a, b = self.points[k], self.points[k + 1]
        om = np.arccos(np.clip(np.dot(a, b), -1.0, 1.0))
        if om < 1e-12:
            return a.copy()
        return (np.sin((1 - s) * om) * a + np.sin(s * om) * b) / np.sin(om)

    @property
    def end(self):
        return self.points[-1]

    def tracking_error(self, curve: CurveS2):
        return float(np.max(np.linalg.norm(hopf_projection(self.points) - curve(self.times), axis=-1)))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "w", "x", "y", "z"])
            for t, q in zip(self.times, self.points):
                w.writerow([repr(float(t))] + [repr(float(c)) for c in q])


def _check_start(curve, x0):
    gap = np.linalg.norm(hopf_projection(x0) - curve(np.zeros(np.shape(x0)[:-1])), axis=-1)
    if np.any(gap > FIBER_TOL):
        raise DifferentFibers(f"start point is not over the curve's start (gap {np.max(gap):.3g})")


def horizontal_lift(curve: CurveS2, x0, dt: float = DEFAULT_DT) -> PathS3:
    """Horizontal lift of ``curve`` starting at ``x0`` (one starting point)."""
    x0 = normalize(np.asarray(x0, dtype=float))
    _check_start(curve, x0)
    times, states = [np.zeros(1)], [x0[None]]
    x = x0
    for piece, a, b in curve.pieces():
        steps = steps_for(dt, b - a)
        grid = np.linspace(0.0, 1.0, 2 * steps + 1)
        pts, vel = _sample(piece, grid)
        path = lift_samples(pts, vel, x, keep_path=True)
        times.append(a + (b - a) * grid[2::2])
        states.append(path[1:])
        x = path[-1]
    return PathS3(np.concatenate(times), np.concatenate(states))


def _sample(piece, grid):
    pts = piece(grid)
    vel = piece.velocity(grid)
    if vel is None:
        vel = grid_velocity(pts, grid)
    return pts, vel


def transport(curve: CurveS2, x0, dt: float = DEFAULT_DT):
    """Endpoint of the horizontal lift (``x0`` may be a batch of fibre points)."""
    x0 = normalize(np.asarray(x0, dtype=float))
    _check_start(curve, x0)
    x = x0
    for piece, a, b in curve.pieces():
        steps = steps_for(dt, b - a)
        grid = np.linspace(0.0, 1.0, 2 * steps + 1)
        pts, vel = _sample(piece, grid)
        shape = (len(grid),) + (1,) * (x.ndim - 1) + (3,)
        x = lift_samples(pts.reshape(shape), vel.reshape(shape), x)
    return x


def holonomy(loop: CurveS2, x0=None, dt: float = DEFAULT_DT):
    """Fibre rotation after transport once around ``loop``, in (-pi, pi]."""
    if x0 is None:
        x0 = hopf_section(loop(np.array(0.0)))
    end = transport(loop, x0, dt)
    return float(fiber_angle(x0, end, tol=1e-7))
