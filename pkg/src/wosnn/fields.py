"""Lattice fields, error metrics and CSV export.

Nodes sit at ``spacing * index`` for integer index vectors; two grids are
aligned when they hold the same node set with the same spacing.  Nodes are
kept in lexicographic index order.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class FieldGrid:
    spacing: float
    indices: np.ndarray
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        order = np.lexsort(idx.T[::-1])
        object.__setattr__(self, "indices", idx[order])
        if self.values is not None:
            vals = np.asarray(self.values, dtype=float)
            if len(vals) != len(idx):
                raise InputError("one value row per node is required")
            object.__setattr__(self, "values", vals[order])

    @classmethod
    def lattice(cls, domain, spacing=0.02, lo=None, hi=None):
        """All lattice nodes strictly inside ``domain`` and within ``[lo, hi]``."""
        lo = domain.lo if lo is None else np.broadcast_to(np.asarray(lo, dtype=float), (domain.dim,))
        hi = domain.hi if hi is None else np.broadcast_to(np.asarray(hi, dtype=float), (domain.dim,))
        axes = [
            np.arange(math.ceil(a / spacing - 1e-9), math.floor(b / spacing + 1e-9) + 1)
            for a, b in zip(lo, hi)
        ]
        idx = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, domain.dim)
        inside = domain.signed_distance(idx * spacing) > 1e-9 * spacing
        return cls(spacing, idx[inside])

    @property
    def coords(self):
        return self.indices * self.spacing

    @property
    def dim(self):
        return self.indices.shape[1]

    def __len__(self):
        return len(self.indices)

    def with_values(self, values):
        values = np.asarray(values, dtype=float)
        # values are given in this grid's (already canonical) node order
        grid = object.__new__(FieldGrid)
        object.__setattr__(grid, "spacing", self.spacing)
        object.__setattr__(grid, "indices", self.indices)
        if len(values) != len(self.indices):
            raise InputError("one value row per node is required")
        object.__setattr__(grid, "values", values)
        return grid

    def aligned(self, other):
        return (
            math.isclose(self.spacing, other.spacing, rel_tol=1e-12)
            and self.indices.shape == other.indices.shape
            and np.array_equal(self.indices, other.indices)
        )

    def union(self, other):
        """Node-set union (values dropped)."""
        idx = np.unique(np.concatenate([self.indices, other.indices]), axis=0)
        return FieldGrid(self.spacing, idx)


def _paired(a, b):
    if a.values is None or b.values is None:
        raise InputError("both grids need values")
    if not a.aligned(b):
        raise InputError("grids are not aligned")
    if a.values.shape != b.values.shape:
        raise InputError("value arity differs")
    return a.values, b.values


def mean_error(a, b):
    """Mean Euclidean distance between node values (absolute error for scalars)."""
    va, vb = _paired(a, b)
    diff = va - vb
    err = np.abs(diff) if diff.ndim == 1 else np.sqrt((diff * diff).sum(axis=1))
    return float(err.mean())


def mse(a, b):
    va, vb = _paired(a, b)
    if va.ndim != 1:
        raise InputError("mse expects scalar fields")
    return float(np.mean((va - vb) ** 2))


def rrmse(estimate, truth):
    """``||est - true|| / ||true||`` over nodes; plain RMSE (with a warning) if truth is zero."""
    ve, vt = _paired(estimate, truth)
    if ve.ndim != 1:
        raise InputError("rrmse expects scalar fields")
    num = np.sqrt(np.sum((ve - vt) ** 2))
    den = np.sqrt(np.sum(vt * vt))
    if den == 0:
        warnings.warn("truth field is identically zero; returning plain RMSE", RuntimeWarning, stacklevel=2)
        return float(num / np.sqrt(len(vt)))
    return float(num / den)


def value_columns(grid, kind=None):
    vals = grid.values
    if vals.ndim == 1:
        return [kind or "u"]
    names = "xyz"[: vals.shape[1]] if vals.shape[1] == grid.dim else [str(j) for j in range(vals.shape[1])]
    return [f"{kind or 'z'}{n}" for n in names]


def export_field(grid, file, kind=None):
    """Write ``x,y[,z],<values>`` rows with 17 significant digits."""
    if grid.values is None:
        raise InputError("grid has no values to export")
    cols = list("xyz"[: grid.dim]) + value_columns(grid, kind)
    vals = grid.values.reshape(len(grid), -1)
    table = np.hstack([grid.coords, vals])
    try:
        np.savetxt(file, table, fmt="%.17g", delimiter=",", header=",".join(cols), comments="")
    except OSError as exc:
        raise OSError(f"cannot write field file {file}: {exc}") from exc


def import_field(file, spacing=0.02):
    """Read a file written by :func:`export_field` back into a grid."""
    with open(file) as fh:
        cols = fh.readline().strip().split(",")
    table = np.loadtxt(file, delimiter=",", skiprows=1, ndmin=2)
    d = sum(1 for c in cols if c in ("x", "y", "z"))
    idx = np.rint(table[:, :d] / spacing).astype(np.int64)
    vals = table[:, d:]
    return FieldGrid(spacing, idx, vals[:, 0] if vals.shape[1] == 1 else vals)
