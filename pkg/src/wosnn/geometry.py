"""Analytic domains with exact Euclidean distance queries.

All query methods accept a single point of shape ``(d,)`` or a batch of shape
``(..., d)`` and broadcast over the leading axes.
"""

import numpy as np

from .errors import ConfigError, InputError


def _as_points(p, dim):
    p = np.asarray(p, dtype=float)
    if p.shape[-1:] != (dim,):
        raise InputError(f"expected points with trailing dimension {dim}, got shape {p.shape}")
    return p


def _segment_projection(p, a, b):
    """Closest point on segment [a, b] to each point in ``p`` and its distance."""
    ab = b - a
    t = np.clip(((p - a) @ ab) / (ab @ ab), 0.0, 1.0)
    q = a + t[..., None] * ab
    return q, np.linalg.norm(p - q, axis=-1)


def _pick(dist, axes):
    """Index of the minimal distance; exact ties go to the lowest axis, then list order."""
    dmin = dist.min(axis=-1, keepdims=True)
    score = np.where(dist == dmin, axes, np.iinfo(np.int64).max)
    return np.argmin(score, axis=-1)


class Domain:
    """Common interface of the analytic domains."""

    dim: int
    lo: np.ndarray
    hi: np.ndarray

    def signed_distance(self, p):
        raise NotImplementedError

    def closest_boundary_point(self, p):
        raise NotImplementedError

    def in_epsilon_shell(self, p, eps):
        if eps <= 0:
            raise InputError("eps must be positive")
        return self.signed_distance(p) < eps

    def contains(self, p):
        """Strict interior test."""
        return self.signed_distance(p) > 0

    def sample_interior(self, rng, n):
        """``n`` points uniform in the interior, by rejection from the bounding box."""
        out = np.empty((0, self.dim))
        while len(out) < n:
            need = n - len(out)
            batch = rng.uniform(self.lo, self.hi, size=(max(2 * need, 16), self.dim))
            out = np.concatenate([out, batch[self.contains(batch)]])
        return out[:n]


class Box(Domain):
    """Axis-aligned box ``[lo, hi]`` in 2 or 3 dimensions."""

    def __init__(self, lo, hi):
        self.lo = np.array(lo, dtype=float).ravel()
        self.hi = np.array(hi, dtype=float).ravel()
        if self.lo.shape != self.hi.shape or self.lo.size not in (2, 3):
            raise InputError("Box bounds must be matching 2- or 3-vectors")
        if not np.all(self.lo < self.hi):
            raise InputError("Box requires lo < hi componentwise")
        self.dim = self.lo.size
        # face order: axis 0 lo, axis 0 hi, axis 1 lo, ...
        self._face_axes = np.repeat(np.arange(self.dim), 2)

    def __repr__(self):
        return f"Box(lo={self.lo.tolist()}, hi={self.hi.tolist()})"

    def signed_distance(self, p):
        p = _as_points(p, self.dim)
        below = p - self.lo
        above = self.hi - p
        inner = np.minimum(below, above).min(axis=-1)
        gap = np.maximum(np.maximum(-below, -above), 0.0)
        outer = np.sqrt((gap * gap).sum(axis=-1))
        return np.where(inner >= 0, inner, -outer)[()]

    def face_distances(self, p):
        p = _as_points(p, self.dim)
        return np.stack([p - self.lo, self.hi - p], axis=-1).reshape(p.shape[:-1] + (2 * self.dim,))

    def closest_boundary_point(self, p):
        p = _as_points(p, self.dim)
        faces = self.face_distances(p)
        choice = _pick(faces, self._face_axes)
        axis = choice // 2
        value = np.where(choice % 2 == 0, self.lo[axis], self.hi[axis])
        q = p.copy()
        np.put_along_axis(q, axis[..., None], value[..., None], axis=-1)
        outside = np.any(faces < 0, axis=-1)
        return np.where(outside[..., None], np.clip(p, self.lo, self.hi), q)


class LShape2D(Domain):
    """Outer box with the quadrant ``(corner, hi]`` removed.

    The default corner is the box centre, giving ``[-1,1]^2 minus (0,1]^2``
    for the unit case.
    """

    dim = 2

    def __init__(self, outer=None, corner=None):
        self.outer = outer if outer is not None else Box([-1.0, -1.0], [1.0, 1.0])
        if self.outer.dim != 2:
            raise InputError("LShape2D requires a 2D outer box")
        c = 0.5 * (self.outer.lo + self.outer.hi) if corner is None else np.array(corner, dtype=float)
        if not np.all((self.outer.lo < c) & (c < self.outer.hi)):
            raise InputError("reentrant corner must lie strictly inside the outer box")
        self.corner = c
        self.removed = Box(c, self.outer.hi)
        self.lo, self.hi = self.outer.lo, self.outer.hi
        (a0, a1), (b0, b1), (c0, c1) = self.outer.lo, self.outer.hi, c
        verts = np.array([[a0, a1], [b0, a1], [b0, c1], [c0, c1], [c0, b1], [a0, b1]])
        self.segments = [(verts[i], verts[(i + 1) % 6]) for i in range(6)]
        # axis normal to each segment
        self._segment_axes = np.array([1, 0, 1, 0, 1, 0])

    def __repr__(self):
        return f"LShape2D(outer={self.outer!r}, corner={self.corner.tolist()})"

    def _segment_queries(self, p):
        proj = [_segment_projection(p, a, b) for a, b in self.segments]
        pts = np.stack([q for q, _ in proj], axis=-2)
        dist = np.stack([d for _, d in proj], axis=-1)
        return pts, dist

    def signed_distance(self, p):
        p = _as_points(p, 2)
        d_outer = self.outer.signed_distance(p)
        d_removed = self.removed.signed_distance(p)
        interior = np.minimum(d_outer, -d_removed)
        if np.all(interior > 0):
            return interior[()]
        # the removed box's outer faces are not boundary, so zeros need the segments too
        _, seg = self._segment_queries(p)
        return np.where(interior > 0, interior, -seg.min(axis=-1))[()]

    def closest_boundary_point(self, p):
        p = _as_points(p, 2)
        pts, dist = self._segment_queries(p)
        choice = _pick(dist, self._segment_axes)
        return np.take_along_axis(pts, choice[..., None, None], axis=-2)[..., 0, :]


def domain_from_config(kind, lo=None, hi=None, corner=None):
    """Build a domain from its config key: ``box2``, ``box3`` or ``lshape2``."""
    dims = {"box2": 2, "box3": 3, "lshape2": 2}
    if kind not in dims:
        raise ConfigError(f"unknown domain kind {kind!r}; expected one of {sorted(dims)}", key="domain.kind")
    d = dims[kind]
    lo = np.broadcast_to(np.asarray(-1.0 if lo is None else lo, dtype=float), (d,))
    hi = np.broadcast_to(np.asarray(1.0 if hi is None else hi, dtype=float), (d,))
    try:
        box = Box(lo, hi)
        return LShape2D(box, corner) if kind == "lshape2" else box
    except InputError as exc:
        raise ConfigError(str(exc), key="domain") from exc
