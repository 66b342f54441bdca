import numpy as np
import pytest
from scipy.sparse import lil_matrix
from scipy.sparse.linalg import spsolve

from wosnn.errors import InputError, NumericalError
from wosnn.fdm import solve_fdm, solve_fdm_grid
from wosnn.fields import FieldGrid
from wosnn.problems import builtin_problem


@pytest.mark.parametrize("name", ["laplace2d_xy", "poisson2d_xy2"])
def test_exact_on_polynomials(name):
    p = builtin_problem(name)
    field = solve_fdm(p, 0.02, tol=1e-10)
    assert len(field) == 9801
    assert field.aligned(FieldGrid.lattice(p.domain, 0.02))
    assert np.max(np.abs(field.values - p.exact_u(field.coords))) < 1e-10


def test_residual_below_tolerance():
    p = builtin_problem("poisson2d_xy2")
    grid = solve_fdm_grid(p, 0.05, tol=1e-9)
    assert grid.residual < 1e-9
    u, h = grid.solution, grid.spacing
    lap = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4 * u[1:-1, 1:-1]) / h**2
    f = p.f(grid.coords[1:-1, 1:-1])
    assert np.max(np.abs(lap - f)) < 1e-9


@pytest.fixture(scope="module")
def lshape_solution():
    return solve_fdm_grid(builtin_problem("lshape_indicator"), 0.02, tol=1e-10)


def test_lshape_mask(lshape_solution):
    c = lshape_solution.coords
    x, y = c[..., 0], c[..., 1]
    inside = lshape_solution.interior
    assert not np.any(inside & (x > -1e-12) & (y > -1e-12))
    assert not np.any(inside & (np.abs(np.abs(x) - 1) < 1e-12))
    # every interior node has its four neighbours on the lattice
    assert not inside[0].any() and not inside[-1].any() and not inside[:, 0].any() and not inside[:, -1].any()
    assert inside.sum() == 3 * 49 * 49 + 2 * 49


def test_maximum_principle(lshape_solution):
    u = lshape_solution.solution[lshape_solution.interior]
    assert u.min() >= 0.0 and u.max() <= 1.0


def test_matches_direct_sparse_solve():
    # independent oracle: assemble the 5-point system and solve it directly
    p = builtin_problem("lshape_indicator")
    grid = solve_fdm_grid(p, 0.05, tol=1e-11)
    mask = grid.interior
    number = -np.ones(mask.shape, dtype=int)
    number[mask] = np.arange(mask.sum())
    A = lil_matrix((mask.sum(), mask.sum()))
    b = np.zeros(mask.sum())
    g = p.g(grid.coords)
    for i, j in zip(*np.nonzero(mask)):
        row = number[i, j]
        A[row, row] = -4
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            k = number[i + di, j + dj]
            if k >= 0:
                A[row, k] = 1
            else:
                b[row] -= g[i + di, j + dj]
    direct = spsolve(A.tocsr(), b)
    np.testing.assert_allclose(grid.solution[mask], direct, atol=1e-10)


def test_refinement_order_away_from_corner():
    p = builtin_problem("lshape_indicator")
    probes = np.array([[-0.5, -0.5], [-0.5, 0.5], [0.5, -0.5], [-0.2, -0.6], [-0.8, 0.2]])
    assert np.all(np.linalg.norm(probes, axis=1) > 0.1)
    vals = []
    for h in (0.1, 0.05, 0.025):
        grid = solve_fdm_grid(p, h, tol=1e-11)
        idx = np.rint(probes / h).astype(int) - grid.indices[0, 0]
        vals.append(grid.solution[idx[:, 0], idx[:, 1]])
    coarse = np.abs(vals[0] - vals[1])
    fine = np.abs(vals[1] - vals[2])
    order = np.log2(np.linalg.norm(coarse) / np.linalg.norm(fine))
    assert order > 0.5


def test_three_d_smoke():
    p = builtin_problem("poisson3d_x2yz")
    field = solve_fdm(p, 0.1, tol=1e-10)
    assert field.dim == 3 and len(field) == 19**3
    # the 7-point stencil is exact on x²yz
    assert np.max(np.abs(field.values - p.exact_u(field.coords))) < 1e-9


def test_errors():
    p = builtin_problem("laplace2d_xy")
    with pytest.raises(InputError):
        solve_fdm(p, 0.03)
    with pytest.raises(InputError):
        solve_fdm(p, 0.1, tol=0)
    with pytest.raises(InputError):
        solve_fdm(p, 0.1, omega=2.0)
    with pytest.raises(NumericalError) as info:
        solve_fdm(builtin_problem("lshape_indicator"), 0.02, tol=1e-10, max_iters=10)
    assert info.value.residual > 1e-10
