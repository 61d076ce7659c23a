"""L2 geometry of paths of strict contactomorphisms.

Quadrature for the normalised L2 inner product on S^3, the vertical
(fibre-direction) component of a velocity field, the adjustment angle that
makes a path of lifts L2-horizontal, and the horizontal lift of a
deformation of sphere maps.
"""

import csv
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import ChartExit, NotConstantAngle, StepTooCoarse
from .quantomorph import (
    CHART_RADIUS,
    DEFAULT_BASE,
    ComposedFiberMap,
    FiberMap,
    Quantomorphism,
    UniformRotation,
)
from .s2maps import DeformationS2, S2Map, angle_between, compose
from .s3core import I, hopf_projection, normalize, qconj, qexp, qlog, qmul
from .transport import fiber_angle, wrap_angle

ANCHOR_CANDIDATES = np.array(
    [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=float
)
ANCHOR_SWITCH = CHART_RADIUS - 0.3
ANCHOR_LIMIT = CHART_RADIUS - 0.05
MAX_STEP_ANGLE = np.pi / 4
MAX_POINT_ANGLE = np.pi / 2


# -- quadrature ----------------------------------------------------------------

@dataclass(frozen=True)
class S3Quadrature:
    """Nodes and weights for the normalised integral ``(1 / 2 pi^2) int_{S^3}``."""

    nodes: np.ndarray
    weights: np.ndarray
    scheme: str = ""

    def __len__(self):
        return len(self.weights)

    def integrate(self, values):
        return float(np.tensordot(self.weights, np.asarray(values, dtype=float), axes=1))

    @classmethod
    def hopf_product(cls, n_eta=16, n_theta1=32, n_theta2=32):
        """Product rule in Hopf coordinates.

        ``q = (cos e cos t1, cos e sin t1, sin e cos t2, sin e sin t2)``; the
        volume density ``sin e cos e`` becomes uniform in ``u = sin^2 e``,
        which gets Gauss-Legendre, and both angles get the trapezoid rule.
        """
        gx, gw = np.polynomial.legendre.leggauss(n_eta)
        u = 0.5 * (gx + 1.0)
        wu = 0.5 * gw
        eta = np.arcsin(np.sqrt(u))
        t1 = 2 * np.pi * np.arange(n_theta1) / n_theta1
        t2 = 2 * np.pi * np.arange(n_theta2) / n_theta2
        E, T1, T2 = np.meshgrid(eta, t1, t2, indexing="ij")
        W = np.broadcast_to(wu[:, None, None], E.shape) / (n_theta1 * n_theta2)
        nodes = np.stack(
            [np.cos(E) * np.cos(T1), np.cos(E) * np.sin(T1), np.sin(E) * np.cos(T2), np.sin(E) * np.sin(T2)],
            axis=-1,
        ).reshape(-1, 4)
        return cls(nodes, W.reshape(-1).copy(), f"hopf_product({n_eta},{n_theta1},{n_theta2})")

    @classmethod
    def monte_carlo(cls, n=200_000, seed=0):
        rng = np.random.default_rng(seed)
        nodes = normalize(rng.standard_normal((int(n), 4)))
        return cls(nodes, np.full(int(n), 1.0 / int(n)), f"monte_carlo({int(n)},{seed})")


def _values(X, points):
    return np.asarray(X(points) if callable(X) else X, dtype=float)


def l2_inner(X, Y, quad: S3Quadrature):
    """``<X, Y>`` for vector fields given as callables on nodes or as value arrays."""
    return quad.integrate(np.sum(_values(X, quad.nodes) * _values(Y, quad.nodes), axis=-1))


def vertical_component(X, quad: S3Quadrature, G: Optional[FiberMap] = None, G_values=None):
    """Coefficient ``<X, A o G>`` of the projection onto the fibre direction along ``G``.

    ``X`` holds the field values at the image points ``G(nodes)`` (or is a
    callable of those points).  ``G`` defaults to the identity.
    """
    if G_values is None:
        G_values = quad.nodes if G is None else G(quad.nodes)
    vals = np.asarray(X(G_values) if callable(X) else X, dtype=float)
    return quad.integrate(np.sum(vals * qmul(G_values, I), axis=-1))


# -- adjustment angle ----------------------------------------------------------

def _increment(prev, nxt, weights, iterations=30):
    """Fibre rotation ``d`` that zeroes the weighted fibre part of ``log(prev^-1 nxt exp(i d))``.

    To first order ``d`` is minus the weighted mean of the fibre component
    of the increments; solving exactly removes the higher-order coupling
    between the fibre rotation and the transverse part of the increment.
    """
    m = qmul(qconj(prev), nxt)
    log = qlog(m)
    worst = float(np.max(np.linalg.norm(log, axis=-1)))
    if worst >= MAX_POINT_ANGLE:
        raise StepTooCoarse(f"pointwise increment {worst:.3f} rad; refine the partition")
    d = -float(np.dot(weights, log[:, 0]))
    for _ in range(iterations):
        resid = float(np.dot(weights, qlog(qmul(m, qexp(I, d)))[:, 0]))
        d -= resid
        if abs(resid) < 1e-16:
            break
    return d


def adjustment_angle(family, times, quad: S3Quadrature, images=None):
    """Angles ``theta(t_k)`` with ``theta(0) = 0`` making ``F_t exp(i theta)`` L2-horizontal.

    ``family`` maps ``t`` to a :class:`FiberMap` (or ``images`` gives the node
    images per time).  Each step integrates the fibre component of the
    velocity through the group logarithm of consecutive images: ``G_k`` is
    chosen so that the weighted fibre component of ``log(G_{k-1}^-1 G_k)``
    vanishes.
    """
    times = np.asarray(times, dtype=float)
    if images is None:
        images = [family(t)(quad.nodes) for t in times]
    theta = np.zeros(len(times))
    for k in range(1, len(times)):
        d = _increment(images[k - 1], images[k], quad.weights)
        if abs(d) >= MAX_STEP_ANGLE:
            raise StepTooCoarse(f"angle step {d:.3f} at t={times[k]:.4g}; refine the partition")
        theta[k] = theta[k - 1] + d
    return theta


def horizontality_residuals(images, times, quad: S3Quadrature):
    """``|<dG/dt, A o G>|`` at interior nodes by central group-log differences (0 at the ends)."""
    times = np.asarray(times, dtype=float)
    res = np.zeros(len(times))
    for k in range(1, len(times) - 1):
        log = qlog(qmul(qconj(images[k - 1]), images[k + 1]))
        res[k] = abs(float(np.dot(quad.weights, log[:, 0]))) / (times[k + 1] - times[k - 1])
    return res


# -- lifting deformations ------------------------------------------------------------

def _displacement(f: S2Map, y):
    return float(angle_between(y, f(y)))


def _best_anchor(f: S2Map):
    moves = angle_between(ANCHOR_CANDIDATES, f(ANCHOR_CANDIDATES))
    k = int(np.argmin(moves))
    return ANCHOR_CANDIDATES[k], float(moves[k])


def _circular_mean(angles):
    return float(np.angle(np.mean(np.exp(1j * np.asarray(angles)))))


@dataclass
class GroupPath:
    """A horizontal path ``G_t = S_t exp(i (theta_start + theta(t)))`` on a partition.

    ``S_t`` is the slice lift of the base map at ``t`` (with its anchor and
    the gauge offset accumulated over anchor switches).
    """

    times: np.ndarray
    theta: np.ndarray
    slices: List[FiberMap]
    base_maps: List[S2Map]
    theta_start: float
    horizontality_residual: np.ndarray
    projection_residual: np.ndarray
    anchors: List[np.ndarray] = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    def __getitem__(self, k) -> FiberMap:
        return ComposedFiberMap((UniformRotation(self.theta_start + self.theta[k]), self.slices[k]))

    @property
    def end(self) -> FiberMap:
        return self[len(self.times) - 1]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "theta", "horizontality_residual", "projection_residual"])
            for row in zip(self.times, self.theta, self.horizontality_residual, self.projection_residual):
                w.writerow([repr(float(v)) for v in row])


def lift_deformation(
    deformation: DeformationS2,
    start: FiberMap,
    n: int = 64,
    quad: Optional[S3Quadrature] = None,
    times=None,
    lift_steps: int = 200,
    y0=DEFAULT_BASE,
) -> GroupPath:
    """L2-horizontal path through ``start`` covering ``t -> deformation(t) o P(start)``.

    Slices are gauge-zero lifts anchored at a coordinate axis; when the
    current anchor is displaced by more than ``pi/2 - 0.3`` the least
    displaced axis takes over and the two slices are matched by their
    (constant) fibre angle.  Raises :class:`ChartExit` if no axis is
    admissible.
    """
    quad = S3Quadrature.hopf_product() if quad is None else quad
    times = np.linspace(0.0, 1.0, n + 1) if times is None else np.asarray(times, dtype=float)
    f0 = start.base_map()
    anchor = normalize(np.asarray(y0, dtype=float))
    offset = 0.0
    slices, base_maps, anchors, images = [], [], [], []
    for t in times:
        ft = compose(deformation(t), f0)
        if _displacement(ft, anchor) >= ANCHOR_SWITCH:
            new_anchor, move = _best_anchor(ft)
            if move >= ANCHOR_LIMIT:
                raise ChartExit(f"no admissible chart anchor at t={t:.4g}", t=float(t))
            if not np.allclose(new_anchor, anchor):
                old = Quantomorphism(ft, anchor, 0.0, lift_steps=lift_steps, certify=False)
                new = Quantomorphism(ft, new_anchor, 0.0, lift_steps=lift_steps, certify=False)
                probe = quad.nodes[:: max(1, len(quad) // 64)]
                ang = fiber_angle(new(probe), old(probe), tol=1e-6)
                offset = offset + _circular_mean(ang)
                anchor = new_anchor
        F = Quantomorphism(ft, anchor, offset, lift_steps=lift_steps, certify=False)
        slices.append(F)
        base_maps.append(ft)
        anchors.append(anchor)
        images.append(F(quad.nodes))
    ang = fiber_angle(images[0], start(quad.nodes), tol=1e-6)
    theta_start = _circular_mean(ang)
    spread = float(np.max(np.abs(wrap_angle(ang - theta_start))))
    if spread > 1e-6:
        raise NotConstantAngle(f"start differs from its slice lift by a non-uniform rotation ({spread:.3g})")
    theta = adjustment_angle(None, times, quad, images=images)
    rot = [qexp(I, theta_start + th) for th in theta]
    g_images = [qmul(img, r) for img, r in zip(images, rot)]
    horiz = horizontality_residuals(g_images, times, quad)
    base = hopf_projection(quad.nodes)
    proj = np.array(
        [np.max(np.linalg.norm(hopf_projection(g) - fm(base), axis=-1)) for g, fm in zip(g_images, base_maps)]
    )
    return GroupPath(times, theta, slices, base_maps, theta_start, horiz, proj, anchors)
