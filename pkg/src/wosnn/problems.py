"""Dirichlet problems ``Δu = f`` in a domain with ``u = g`` on its boundary."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError
from .geometry import Box, Domain, LShape2D

PointFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PdeProblem:
    """Domain plus boundary data, source and (optionally) the exact solution.

    Every callable maps points of shape ``(..., d)`` to arrays of shape
    ``(...)`` (``exact_grad`` to ``(..., d)``).
    """

    name: str
    domain: Domain
    g: PointFn
    f: PointFn
    has_source: bool
    exact_u: Optional[PointFn] = None
    exact_grad: Optional[PointFn] = None

    @property
    def dim(self):
        return self.domain.dim


def _zero(p):
    return np.zeros(np.shape(p)[:-1])


def _builtin(name):
    if name == "laplace2d_xy":
        xy = lambda p: p[..., 0] * p[..., 1]
        return PdeProblem(
            name, Box([-1, -1], [1, 1]), g=xy, f=_zero, has_source=False,
            exact_u=xy, exact_grad=lambda p: np.stack([p[..., 1], p[..., 0]], axis=-1),
        )
    if name == "poisson2d_xy2":
        u = lambda p: p[..., 0] * p[..., 1] ** 2
        return PdeProblem(
            name, Box([-1, -1], [1, 1]), g=u, f=lambda p: 2.0 * p[..., 0], has_source=True,
            exact_u=u,
            exact_grad=lambda p: np.stack([p[..., 1] ** 2, 2.0 * p[..., 0] * p[..., 1]], axis=-1),
        )
    if name == "lshape_indicator":
        # corner (0,0) takes value 1 (closed quadrant)
        ind = lambda p: ((p[..., 0] >= 0) & (p[..., 1] >= 0)).astype(float)
        return PdeProblem(name, LShape2D(), g=ind, f=_zero, has_source=False)
    if name == "poisson3d_x2yz":
        u = lambda p: p[..., 0] ** 2 * p[..., 1] * p[..., 2]
        grad = lambda p: np.stack(
            [2 * p[..., 0] * p[..., 1] * p[..., 2], p[..., 0] ** 2 * p[..., 2], p[..., 0] ** 2 * p[..., 1]],
            axis=-1,
        )
        return PdeProblem(
            name, Box([-1, -1, -1], [1, 1, 1]), g=u, f=lambda p: 2.0 * p[..., 1] * p[..., 2],
            has_source=True, exact_u=u, exact_grad=grad,
        )
    return None


BUILTIN_PROBLEMS = ("laplace2d_xy", "poisson2d_xy2", "lshape_indicator", "poisson3d_x2yz")


def builtin_problem(name):
    problem = _builtin(name)
    if problem is None:
        raise ConfigError(f"unknown problem {name!r}; expected one of {list(BUILTIN_PROBLEMS)}", key="problem.name")
    return problem


def _compile_polynomial(expr_text, symbols, key):
    import sympy

    try:
        expr = sympy.sympify(expr_text, locals={s.name: s for s in symbols})
        sympy.Poly(expr, *symbols)
    except (sympy.SympifyError, sympy.PolynomialError, TypeError) as exc:
        raise ConfigError(f"not a polynomial in {[s.name for s in symbols]}: {expr_text!r}", key=key) from exc
    fn = sympy.lambdify(symbols, expr, modules="numpy")

    def evaluate(p):
        p = np.asarray(p, dtype=float)
        value = fn(*(p[..., j] for j in range(len(symbols))))
        return np.broadcast_to(np.asarray(value, dtype=float), p.shape[:-1]).copy()

    return expr, evaluate


def polynomial_problem(domain, g, f="0", u=None, name="custom"):
    """Problem whose data are polynomial strings in ``x, y[, z]``."""
    import sympy

    symbols = sympy.symbols("x y z")[: domain.dim]
    _, g_fn = _compile_polynomial(g, symbols, "problem.custom.g")
    f_expr, f_fn = _compile_polynomial(f, symbols, "problem.custom.f")
    exact_u = exact_grad = None
    if u is not None:
        u_expr, exact_u = _compile_polynomial(u, symbols, "problem.custom.u")
        partials = [_compile_polynomial(str(sympy.diff(u_expr, s)), symbols, "problem.custom.u")[1] for s in symbols]
        exact_grad = lambda p: np.stack([d(p) for d in partials], axis=-1)
    return PdeProblem(
        name, domain, g=g_fn, f=f_fn, has_source=sympy.simplify(f_expr) != 0,
        exact_u=exact_u, exact_grad=exact_grad,
    )


def laplacian_residual(problem, points, h=1e-3):
    """Central-difference Laplacian of ``exact_u`` minus ``f`` at ``points``."""
    points = np.asarray(points, dtype=float)
    u = problem.exact_u
    lap = -2.0 * problem.dim * u(points)
    for j in range(problem.dim):
        step = np.zeros(problem.dim)
        step[j] = h
        lap = lap + u(points + step) + u(points - step)
    return lap / h**2 - problem.f(points)
