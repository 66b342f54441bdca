"""
Sampling a ball by its Green's function
=======================================

Source terms enter each step through one extra point drawn with density
proportional to the ball's Green's function and weighted by its total mass.
"""

import numpy as np

from wosnn import RngStream, default_table, green_total_mass, radial_cdf, sample_in_ball

table = default_table(2)
print("table entries:", len(table.radii), "t(0.5) =", table(0.5))

y, w = sample_in_ball(np.zeros(2), 1.0, table, RngStream(0, 0), size=1_000_000)
print("weight", w, "=", green_total_mass(1.0, 2))

# Radial law check against the closed-form CDF
rho = np.sort(np.linalg.norm(y, axis=1))
emp = np.arange(1, len(rho) + 1) / len(rho)
print("KS distance:", np.abs(emp - radial_cdf(rho, 2)).max())

# One-ball identity for u = x^2, f = 2: boundary mean minus source integral is u(0) = 0
theta = RngStream(0, 1).generator.uniform(0, 2 * np.pi, len(y))
samples = np.cos(theta) ** 2 - w * 2.0
print(f"u(0) estimate: {samples.mean():+.5f} +- {samples.std() / np.sqrt(len(y)):.5f}")

# A non-constant source: the integral of G(0,y) y_x^2 is 1/32
print("E[w y_x^2] =", np.mean(w * y[:, 0] ** 2), "vs", 1 / 32)
