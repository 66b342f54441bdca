"""
Classic Walk-on-Spheres on the unit square
==========================================

Estimate the harmonic function u = xy from its boundary values alone, then
look at how the walk length depends on the shell width.
"""

import numpy as np

from wosnn import RngStream, builtin_problem, sample_path, walk, wos_estimate

problem = builtin_problem("laplace2d_xy")

# A single walk: every step jumps to the sphere of the largest empty ball.
path = sample_path(problem, [0.3, 0.4], eps=1e-3, max_steps=1000, rng=RngStream(0, 0))
print("steps:", path.k, "exit point:", path.exit_point, "target:", round(path.target, 4))
print("radii equal distances:", np.allclose(path.radii, problem.domain.signed_distance(path.centers[:-1])))

# Averaging many walks converges to u(0.3, 0.4) = 0.12.
for n in (100, 1_000, 10_000, 100_000):
    est, err, valid = wos_estimate(problem, [0.3, 0.4], n, 1e-3, 1000, RngStream(1, 0))
    print(f"{n:>7} paths: {est:+.4f} +- {err:.4f}")

# Steps grow like log(1/eps), so tight shells are cheap.
for eps in (1e-2, 1e-3, 1e-4, 1e-5):
    batch = walk(problem, np.full((20_000, 2), 0.3), [RngStream(2, 0)], [20_000], eps, 1000)
    print(f"eps={eps:.0e}: mean steps {batch.steps.mean():.2f}")

# With the experiment's cap of 20 steps some walks never reach the shell and are dropped.
batch = walk(problem, np.zeros((10_000, 2)), [RngStream(3, 0)], [10_000], 1e-3, 20)
print("valid fraction at max_steps=20:", batch.valid.mean())
