"""Real spherical harmonics on the unit sphere, with tangential gradients.

Schmidt semi-normalised, no Condon-Shortley phase, so that the degree-one
harmonics are exactly the coordinate functions: ``(1, 0) -> z``,
``(1, 1) -> x``, ``(1, -1) -> y``.  Negative ``m`` selects the sine part.

Each harmonic is evaluated through the polynomial extension
``Q(z) * Re((x + iy)^m)`` (resp. ``Im``); its ambient gradient differs
from the true spherical gradient only by a radial term, which is
projected away.
"""

from functools import lru_cache
from math import factorial, sqrt

import numpy as np
from numpy.polynomial import Legendre, Polynomial


@lru_cache(maxsize=None)
def harmonic_profile(l, m):
    """z-profile polynomial of the harmonic (l, m) and its derivative."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"invalid harmonic degree/order ({l}, {m})")
    mm = abs(m)
    q = Legendre.basis(l).convert(kind=Polynomial).deriv(mm)
    norm = 1.0 if mm == 0 else sqrt(2.0 * factorial(l - mm) / factorial(l + mm))
    return norm * q, norm * q.deriv()


def _azimuthal(x, y, m):
    """Return Re/Im of (x+iy)^|m| and its x, y partial derivatives."""
    mm = abs(m)
    w = x + 1j * y
    if mm == 0:
        one = np.ones_like(x)
        return one, np.zeros_like(x), np.zeros_like(x)
    wm = w**mm
    dw = mm * w ** (mm - 1)
    if m > 0:
        return wm.real, dw.real, -dw.imag
    return wm.imag, dw.imag, dw.real


def real_sph(l, m, n):
    n = np.asarray(n, dtype=float)
    q, _ = harmonic_profile(l, m)
    az, _, _ = _azimuthal(n[..., 0], n[..., 1], m)
    return q(n[..., 2]) * az


def real_sph_grad(l, m, n):
    """Tangential gradient of the harmonic on the unit sphere, shape (..., 3)."""
    n = np.asarray(n, dtype=float)
    q, dq = harmonic_profile(l, m)
    z = n[..., 2]
    az, daz_x, daz_y = _azimuthal(n[..., 0], n[..., 1], m)
    qz = q(z)
    g = np.stack([qz * daz_x, qz * daz_y, dq(z) * az], axis=-1)
    return g - np.sum(g * n, axis=-1, keepdims=True) * n
