"""Green's function of a ball: total mass, radial law and in-ball sampling.

``G`` is the nonnegative kernel with ``ΔG = -δ`` in ``B(c, r)`` and ``G = 0``
on the sphere.  A sample ``y`` drawn with density ``G(c, y) / Ḡ(r)`` and
weighted by the total mass ``Ḡ(r)`` is an unbiased estimate of
``∫_B G(c, y) f(y) dy``; for ``Δu = f`` this gives the mean-value identity

    u(c) = mean of u over ∂B  -  ∫_B G(c, y) f(y) dy.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InputError
from .rng import as_generator, unit_vectors


def _check_dim(d):
    if d not in (2, 3):
        raise InputError(f"dimension must be 2 or 3, got {d}")


def green_function(r, rho, d):
    """``G(c, y)`` for ``|y - c| = rho`` in a ball of radius ``r``."""
    _check_dim(d)
    rho = np.asarray(rho, dtype=float)
    if d == 2:
        return np.log(r / rho) / (2 * np.pi)
    return (1.0 / rho - 1.0 / r) / (4 * np.pi)


def green_total_mass(r, d):
    """``∫_B G(c, y) dy``: ``r²/4`` in 2D, ``r²/6`` in 3D."""
    _check_dim(d)
    r = np.asarray(r, dtype=float)
    return r * r / (2.0 * d)


def radial_cdf(t, d):
    """CDF of the normalized radius ``|y - c| / r`` under the Green density."""
    _check_dim(d)
    t = np.asarray(t, dtype=float)
    if d == 2:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = t * t * (1.0 - 2.0 * np.log(t))
        return np.where(t > 0, out, 0.0)[()]
    return (3.0 * t * t - 2.0 * t**3)[()]


class InverseCdfTable:
    """Tabulated inverse of :func:`radial_cdf` on a uniform grid of CDF values.

    Lookups interpolate linearly between entries.
    """

    def __init__(self, d, resolution=1e-5):
        _check_dim(d)
        n = int(round(1.0 / resolution))
        if n < 2 or not np.isclose(n * resolution, 1.0):
            raise InputError("resolution must divide 1")
        self.dim = d
        self.resolution = resolution
        self.cdf_values = np.linspace(0.0, 1.0, n + 1)
        self.radii = self._invert(self.cdf_values)

    def _invert(self, u):
        # bisection: radial_cdf is strictly increasing on [0, 1]
        lo = np.zeros_like(u)
        hi = np.ones_like(u)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = radial_cdf(mid, self.dim) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        t = 0.5 * (lo + hi)
        t[0], t[-1] = 0.0, 1.0
        return np.maximum.accumulate(t)

    def __call__(self, u):
        return np.interp(u, self.cdf_values, self.radii)


@lru_cache(maxsize=None)
def default_table(d):
    """Shared table at the standard 1e-5 resolution."""
    return InverseCdfTable(d)


@dataclass(frozen=True)
class InBallSample:
    y: np.ndarray
    weight: float


def place_in_ball(center, r, table, u, normals):
    """Map uniforms ``u`` and Gaussian ``normals`` to Green-distributed points."""
    r = np.asarray(r, dtype=float)
    radius = r * table(u)
    return center + radius[..., None] * unit_vectors(normals)


def sample_in_ball(center, r, table, rng, size=None):
    """Draw ``y ~ G(center, .) / Ḡ(r)`` in ``B(center, r)``.

    Returns one :class:`InBallSample`, or ``(points, weight)`` arrays when
    ``size`` is given.
    """
    if r <= 0:
        raise InputError("ball radius must be positive")
    center = np.asarray(center, dtype=float)
    gen = as_generator(rng)
    d = center.shape[-1]
    shape = () if size is None else (size,)
    u = gen.random(shape)
    normals = gen.standard_normal(shape + (d,))
    y = place_in_ball(center, r, table, u, normals)
    weight = float(green_total_mass(r, d))
    if size is None:
        return InBallSample(y, weight)
    return y, weight
