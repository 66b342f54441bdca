"""Walk-on-Spheres path sampling and the classic point estimator.

Walks are advanced in lock-step across a batch of paths.  Randomness is owned
by streams: every stream drives a fixed group of paths and draws its numbers
in blocks of ``BLOCK`` steps, so a path's trajectory depends only on
``(seed, stream_id)`` and never on batch composition or worker count.
"""

import json
import multiprocessing
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import ConfigError, EstimationError, InputError
from .greens import InBallSample, default_table, green_total_mass, place_in_ball
from .rng import RngStream, unit_vectors

BLOCK = 16
CHUNK_PATHS = 20000


@dataclass
class WosPath:
    """One recorded walk ``x_0 .. x_k`` with its boundary target.

    ``source_terms[i] = Ḡ(R_i) f(y_i)``; ``target = g(exit_point) - source_sum``.
    """

    centers: np.ndarray
    exit_point: np.ndarray
    target: float
    source_terms: np.ndarray
    ball_points: Optional[np.ndarray] = None
    ball_weights: Optional[np.ndarray] = None
    stream_id: int = 0
    valid: bool = True

    @property
    def k(self):
        return len(self.centers) - 1

    @property
    def steps(self):
        return np.diff(self.centers, axis=0)

    @property
    def radii(self):
        return np.linalg.norm(self.steps, axis=-1)

    @property
    def source_sum(self):
        return float(self.source_terms.sum())

    @property
    def in_ball(self):
        if self.ball_points is None:
            return []
        return [InBallSample(y, float(w)) for y, w in zip(self.ball_points, self.ball_weights)]


@dataclass
class WalkBatch:
    """Raw output of :func:`walk`; arrays are indexed by path."""

    steps: np.ndarray
    valid: np.ndarray
    final: np.ndarray
    exit_point: np.ndarray
    source_sum: np.ndarray
    target: np.ndarray
    centers: Optional[np.ndarray] = None
    source_terms: Optional[np.ndarray] = None
    ball_points: Optional[np.ndarray] = None
    ball_weights: Optional[np.ndarray] = None


def walk(problem, starts, streams, counts, eps, max_steps, record=False):
    """Run one walk per row of ``starts``.

    ``streams[s]`` drives ``counts[s]`` consecutive rows.  Paths still outside
    the ε-shell after ``max_steps`` moves are flagged invalid.
    """
    if eps <= 0:
        raise InputError("eps must be positive")
    if max_steps < 1:
        raise InputError("max_steps must be at least 1")
    domain = problem.domain
    d = domain.dim
    x = np.array(starts, dtype=float).reshape(-1, d)
    n = len(x)
    counts = np.asarray(counts, dtype=np.int64)
    if counts.sum() != n or len(counts) != len(streams):
        raise InputError("stream counts do not cover the starts")
    if n and np.any(domain.signed_distance(x) <= 0):
        raise InputError("walk starts must lie strictly inside the domain")
    owner = np.repeat(np.arange(len(streams)), counts)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    source = problem.has_source
    table = default_table(d) if source else None

    steps = np.zeros(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int8)  # 0 walking, 1 reached shell, 2 over the cap
    src = np.zeros(n)
    if record:
        centers = np.empty((n, max_steps + 1, d))
        centers[:, 0] = x
        terms = np.zeros((n, max_steps))
        if source:
            ball_points = np.zeros((n, max_steps, d))
            ball_weights = np.zeros((n, max_steps))
    dirs = np.empty((n, BLOCK, d))
    if source:
        ball_u = np.empty((n, BLOCK))
        ball_dirs = np.empty((n, BLOCK, d))

    active = np.arange(n)
    for step in range(max_steps + 1):
        if active.size == 0:
            break
        r = domain.signed_distance(x[active])
        hit = r < eps
        steps[active[hit]] = step
        status[active[hit]] = 1
        active, r = active[~hit], r[~hit]
        if step == max_steps:
            steps[active] = max_steps
            status[active] = 2
            break
        if active.size == 0:
            break
        j = step % BLOCK
        if j == 0:
            for s in np.unique(owner[active]):
                lo, hi = offsets[s], offsets[s + 1]
                gen = streams[s].generator
                dirs[lo:hi] = gen.standard_normal((hi - lo, BLOCK, d))
                if source:
                    ball_u[lo:hi] = gen.random((hi - lo, BLOCK))
                    ball_dirs[lo:hi] = gen.standard_normal((hi - lo, BLOCK, d))
        xa = x[active]
        if source:
            y = place_in_ball(xa, r, table, ball_u[active, j], ball_dirs[active, j])
            w = green_total_mass(r, d)
            term = w * problem.f(y)
            src[active] += term
            if record:
                terms[active, step] = term
                ball_points[active, step] = y
                ball_weights[active, step] = w
        x[active] = xa + r[:, None] * unit_vectors(dirs[active, j])
        if record:
            centers[active, step + 1] = x[active]

    valid = status == 1
    exit_point = np.full((n, d), np.nan)
    target = np.full(n, np.nan)
    if valid.any():
        exit_point[valid] = domain.closest_boundary_point(x[valid])
        target[valid] = problem.g(exit_point[valid]) - src[valid]
    batch = WalkBatch(steps, valid, x, exit_point, src, target)
    if record:
        batch.centers = centers
        batch.source_terms = terms
        if source:
            batch.ball_points, batch.ball_weights = ball_points, ball_weights
    return batch


def _path_from_batch(batch, i, stream_id):
    k = int(batch.steps[i])
    return WosPath(
        centers=batch.centers[i, : k + 1].copy(),
        exit_point=batch.exit_point[i].copy(),
        target=float(batch.target[i]),
        source_terms=batch.source_terms[i, :k].copy(),
        ball_points=None if batch.ball_points is None else batch.ball_points[i, :k].copy(),
        ball_weights=None if batch.ball_weights is None else batch.ball_weights[i, :k].copy(),
        stream_id=stream_id,
        valid=bool(batch.valid[i]),
    )


def sample_path(problem, x0, eps, max_steps, rng):
    """Sample one walk from ``x0`` driven by ``rng`` (an :class:`RngStream`)."""
    batch = walk(problem, np.asarray(x0, dtype=float)[None], [rng], [1], eps, max_steps, record=True)
    return _path_from_batch(batch, 0, rng.stream_id)


def _summarize(targets):
    n_valid = len(targets)
    if n_valid == 0:
        raise EstimationError("no valid paths reached the boundary shell")
    stderr = float(np.std(targets, ddof=1) / np.sqrt(n_valid)) if n_valid > 1 else float("nan")
    return float(np.mean(targets)), stderr, n_valid


def wos_estimate(problem, x, n_paths, eps, max_steps, rng):
    """Classic WoS estimate at ``x``: ``(mean, stderr, n_valid)`` over valid paths."""
    if n_paths < 1:
        raise InputError("n_paths must be at least 1")
    x = np.asarray(x, dtype=float)
    batch = walk(problem, np.repeat(x[None], n_paths, axis=0), [rng], [n_paths], eps, max_steps)
    return _summarize(batch.target[batch.valid])


def _field_chunk(args):
    problem, points, first_id, n_paths, eps, max_steps, seed = args
    streams = [RngStream(seed, first_id + i) for i in range(len(points))]
    batch = walk(problem, np.repeat(points, n_paths, axis=0), streams, [n_paths] * len(points), eps, max_steps)
    t = np.where(batch.valid, batch.target, 0.0).reshape(len(points), n_paths)
    v = batch.valid.reshape(len(points), n_paths)
    return t, v, batch.steps.reshape(len(points), n_paths)


_SHARED = {}


def _run_shared(task):
    fn, args = task
    return fn((_SHARED["problem"],) + args)


def _map(fn, problem, tasks, workers):
    """Evaluate ``fn((problem,) + args)`` per task, optionally on forked workers.

    Problems hold closures that do not pickle, so workers inherit the problem
    through fork instead of receiving it.
    """
    if workers > 1 and len(tasks) > 1:
        _SHARED["problem"] = problem
        try:
            ctx = multiprocessing.get_context("fork")
            with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
                return list(pool.map(_run_shared, [(fn, t) for t in tasks]))
        finally:
            _SHARED.clear()
    return [fn((problem,) + t) for t in tasks]


def wos_field(problem, points, n_paths, eps, max_steps, seed, workers=1):
    """WoS estimates at many points; point ``i`` is driven by stream ``(seed, i)``.

    Returns ``(estimate, stderr, n_valid)`` arrays.
    """
    points = np.asarray(points, dtype=float)
    per_chunk = max(1, CHUNK_PATHS // n_paths)
    tasks = [
        (points[i : i + per_chunk], i, n_paths, eps, max_steps, seed)
        for i in range(0, len(points), per_chunk)
    ]
    parts = _map(_field_chunk, problem, tasks, workers)
    t = np.concatenate([p[0] for p in parts])
    v = np.concatenate([p[1] for p in parts])
    n_valid = v.sum(axis=1)
    if np.any(n_valid == 0):
        raise EstimationError(f"{int((n_valid == 0).sum())} points had no valid paths")
    est = t.sum(axis=1) / n_valid
    dev = np.where(v, t - est[:, None], 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        stderr = np.sqrt((dev * dev).sum(axis=1) / (n_valid - 1) / n_valid)
    return est, stderr, n_valid


def _dataset_chunk(args):
    problem, starts, first_id, eps, max_steps, seed = args
    streams = [RngStream(seed, first_id + i) for i in range(len(starts))]
    batch = walk(problem, starts, streams, [1] * len(starts), eps, max_steps, record=True)
    return [_path_from_batch(batch, i, first_id + i) for i in np.flatnonzero(batch.valid)]


def sample_dataset(problem, starts, eps, max_steps, base_seed, workers=1) -> List[WosPath]:
    """One walk per start (stream id = start index); invalid walks are dropped."""
    starts = np.asarray(starts, dtype=float)
    if starts.ndim != 2 or len(starts) == 0:
        raise ConfigError("starts must be a nonempty (n, d) array")
    tasks = [
        (starts[i : i + CHUNK_PATHS], i, eps, max_steps, base_seed)
        for i in range(0, len(starts), CHUNK_PATHS)
    ]
    return [p for part in _map(_dataset_chunk, problem, tasks, workers) for p in part]


# --- dataset file -----------------------------------------------------------

PATHS_MAGIC = b"WOSPATHS"
PATHS_VERSION = 1


def save_paths(file, paths, header):
    """Write paths as: magic, version, JSON header, then one record per path.

    Record layout (little-endian): stream id (u8), k (i8), centers
    ``(k+1)*d`` f8, in-ball points ``k*d`` f8 and weights ``k`` f8 (only when
    the header says ``has_source``), source terms ``k`` f8, exit point ``d``
    f8, target f8.
    """
    header = dict(header, n_paths=len(paths), version=PATHS_VERSION)
    has_source = bool(header.get("has_source", False))
    blob = json.dumps(header, sort_keys=True).encode()
    with open(file, "wb") as fh:
        fh.write(PATHS_MAGIC + struct.pack("<HI", PATHS_VERSION, len(blob)) + blob)
        for p in paths:
            fh.write(struct.pack("<Qq", p.stream_id, p.k))
            parts = [p.centers.ravel()]
            if has_source:
                parts += [p.ball_points.ravel(), p.ball_weights]
            parts += [p.source_terms, p.exit_point, [p.target]]
            fh.write(np.concatenate(parts).astype("<f8").tobytes())


def load_paths(file):
    """Inverse of :func:`save_paths`: returns ``(header, paths)``."""
    with open(file, "rb") as fh:
        data = fh.read()
    if data[: len(PATHS_MAGIC)] != PATHS_MAGIC:
        raise ConfigError(f"{file}: not a path dataset file")
    pos = len(PATHS_MAGIC)
    version, hlen = struct.unpack_from("<HI", data, pos)
    if version != PATHS_VERSION:
        raise ConfigError(f"{file}: unsupported dataset version {version}")
    pos += 6
    header = json.loads(data[pos : pos + hlen])
    pos += hlen
    d = int(header["dimension"])
    has_source = bool(header.get("has_source", False))
    paths = []
    for _ in range(header["n_paths"]):
        sid, k = struct.unpack_from("<Qq", data, pos)
        pos += 16
        n = (k + 1) * d + (k * d + k if has_source else 0) + k + d + 1
        vals = np.frombuffer(data, dtype="<f8", count=n, offset=pos).astype(float)
        pos += 8 * n
        c = (k + 1) * d
        centers = vals[:c].reshape(k + 1, d)
        ball_points = ball_weights = None
        if has_source:
            ball_points = vals[c : c + k * d].reshape(k, d)
            c += k * d
            ball_weights = vals[c : c + k]
            c += k
        paths.append(
            WosPath(
                centers=centers, exit_point=vals[c + k : c + k + d], target=float(vals[-1]),
                source_terms=vals[c : c + k], ball_points=ball_points, ball_weights=ball_weights,
                stream_id=sid,
            )
        )
    return header, paths
