"""
A 3D Poisson problem
====================

u = x^2 yz with source 2yz on the cube.  Walks carry one Green-sampled point
per step; targets fold the source sum in, so training is unchanged.
"""

import numpy as np

from wosnn import (
    RngStream, STARTS_STREAM, TrainConfig, YzNet, builtin_problem, load_config, mean_error, predict_field,
    sample_dataset, train, vectorize, wos_estimate,
)
from wosnn.config import evaluation_grid

problem = builtin_problem("poisson3d_x2yz")
x = np.array([-0.5, 0.5, 0.5])
est, err, _ = wos_estimate(problem, x, 20_000, 1e-2, 80, RngStream(0, 0))
print(f"WoS at {x}: {est:.4f} +- {err:.4f}, exact {problem.exact_u(x):.4f}")

starts = problem.domain.sample_interior(RngStream(0, STARTS_STREAM).generator, 10_000)
paths = sample_dataset(problem, starts, 1e-2, 80, base_seed=0)
print("mean source terms per path:", np.mean([len(p.in_ball) for p in paths]))

net, _ = train(YzNet(3, [64, 128, 128], 0), vectorize(paths), TrainConfig(lr=2e-4, batch_size=1024, epochs=10))

# Probe on the three mid-planes of [-1,0] x [0,1]^2
grid = evaluation_grid(load_config(preset="poisson3d"), problem.domain)
u, _ = predict_field(net, grid)
print(len(grid), "probe nodes, mean error", mean_error(u, grid.with_values(problem.exact_u(grid.coords))))
