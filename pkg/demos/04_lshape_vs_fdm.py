"""
L-shaped domain against finite differences
==========================================

The indicator boundary data on the L-shape has no closed-form solution, so
the reference is a red-black SOR finite-difference solve on the same lattice.
"""

import numpy as np

from wosnn import (
    FieldGrid, RngStream, STARTS_STREAM, TrainConfig, YzNet, builtin_problem, mse, predict_field,
    sample_dataset, solve_fdm, solve_fdm_grid, train, vectorize,
)

problem = builtin_problem("lshape_indicator")

fd = solve_fdm_grid(problem, 0.02)
print("SOR iterations:", fd.iterations, "residual:", fd.residual)
reference = solve_fdm(problem, 0.02)
print("nodes:", len(reference), "range:", reference.values.min(), reference.values.max())

starts = problem.domain.sample_interior(RngStream(0, STARTS_STREAM).generator, 10_000)
data = vectorize(sample_dataset(problem, starts, 1e-3, 20, base_seed=0))
net, _ = train(YzNet(2, [32, 64, 128], 0), data, TrainConfig(lr=3e-4, batch_size=512, epochs=20))

u, _ = predict_field(net, FieldGrid.lattice(problem.domain, 0.02))
print("MSE against FDM:", mse(u, reference))

# Agreement is worst next to the reentrant corner and the jump at (-1..0, 1)
err = (u.values - reference.values) ** 2
print("worst node:", u.coords[np.argmax(err)])
