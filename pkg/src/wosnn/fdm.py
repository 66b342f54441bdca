"""Finite-difference Dirichlet reference solver (5-point / 7-point stencil, red-black SOR)."""

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .fields import FieldGrid


@dataclass
class FdmGrid:
    """Full lattice over the bounding box; ``interior`` marks the unknowns."""

    spacing: float
    indices: np.ndarray  # (*shape, d) integer lattice indices
    interior: np.ndarray  # bool, shape
    solution: np.ndarray  # boundary nodes hold g
    residual: float
    iterations: int

    @property
    def coords(self):
        return self.indices * self.spacing


def _lattice_axes(domain, h):
    axes = []
    for a, b in zip(domain.lo, domain.hi):
        ia, ib = a / h, b / h
        if abs(ia - round(ia)) > 1e-9 or abs(ib - round(ib)) > 1e-9:
            raise InputError(f"spacing {h} does not divide the domain bounds [{a}, {b}]")
        axes.append(np.arange(round(ia), round(ib) + 1))
    return axes


def _neighbour_sum(u):
    s = np.zeros_like(u)
    for ax in range(u.ndim):
        lead = [slice(None)] * u.ndim
        lag = [slice(None)] * u.ndim
        lead[ax], lag[ax] = slice(1, None), slice(None, -1)
        s[tuple(lag)] += u[tuple(lead)]
        s[tuple(lead)] += u[tuple(lag)]
    return s


def _residual(u, rhs, interior, h):
    lap = (_neighbour_sum(u) - 2 * u.ndim * u) / (h * h)
    return np.abs(np.where(interior, lap - rhs, 0.0)).max()


def solve_fdm_grid(problem, h, tol=1e-10, max_iters=100000, omega=1.9, check_every=25):
    """Solve ``Δ_h u = f`` with ``u = g`` on non-interior nodes; returns :class:`FdmGrid`.

    The residual is the max over interior nodes of ``|Δ_h u - f|``.
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    if not 0 < omega < 2:
        raise InputError("relaxation factor must be in (0, 2)")
    domain = problem.domain
    axes = _lattice_axes(domain, h)
    idx = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    x = idx * h
    interior = domain.signed_distance(x) > 1e-9 * h
    # outermost layer is never interior, so neighbour sums never wrap
    u = np.where(interior, 0.0, problem.g(x))
    rhs = np.where(interior, problem.f(x), 0.0)
    parity = idx.sum(axis=-1) % 2
    colours = [interior & (parity == 0), interior & (parity == 1)]
    n = 2 * domain.dim
    h2 = h * h
    residual = _residual(u, rhs, interior, h)
    it = 0
    while residual >= tol:
        if it >= max_iters:
            raise NumericalError(
                f"SOR did not converge in {max_iters} iterations (residual {residual:.3e})", residual=residual
            )
        for mask in colours:
            gs = (_neighbour_sum(u) - h2 * rhs) / n
            u[mask] += omega * (gs[mask] - u[mask])
        it += 1
        if it % check_every == 0:
            residual = _residual(u, rhs, interior, h)
    return FdmGrid(h, idx, interior, u, float(residual), it)


def solve_fdm(problem, h=0.02, tol=1e-10, max_iters=100000, omega=1.9):
    """FDM solution on the interior lattice nodes as a :class:`FieldGrid`."""
    grid = solve_fdm_grid(problem, h, tol, max_iters, omega)
    return FieldGrid(h, grid.indices[grid.interior], grid.solution[grid.interior])
