"""
Training a solution-and-gradient network on walks
=================================================

A reduced version of the 2D Laplace experiment: one walk per start, then a
network whose value at the start plus its gradient head along the walk has to
land on the boundary value.  The full-size run is `wosnn ... --preset laplace2d`.
"""

import numpy as np

from wosnn import (
    FieldGrid, RngStream, STARTS_STREAM, TrainConfig, YzNet, builtin_problem, mean_error, predict_field,
    sample_dataset, train, vectorize,
)

problem = builtin_problem("laplace2d_xy")
starts = problem.domain.sample_interior(RngStream(0, STARTS_STREAM).generator, 10_000)
paths = sample_dataset(problem, starts, eps=1e-3, max_steps=20, base_seed=0)
data = vectorize(paths)
print(len(paths), "valid paths, centers", data.centers.shape)

net = YzNet(2, [32, 64, 128], seed=0)
grid = FieldGrid.lattice(problem.domain, 0.02)
exact_u = grid.with_values(problem.exact_u(grid.coords))
exact_grad = grid.with_values(problem.exact_grad(grid.coords))


def report(epoch, loss, net):
    if epoch % 5 == 0:
        u, z = predict_field(net, grid)
        print(f"epoch {epoch:2d}  loss {loss:.5f}  u err {mean_error(u, exact_u):.4f}  "
              f"grad err {mean_error(z, exact_grad):.4f}")


net, history = train(net, data, TrainConfig(lr=3e-4, batch_size=512, epochs=20, seed=0), report)
print("loss went from", round(history[0], 4), "to", round(history[-1], 4))
