"""
Bounds, Hoffman constants and what the averages actually do
===========================================================

For an equality-only system of full column rank the Hoffman constant is
exactly 1/sigma_min, so the contraction bound can be compared with a Monte
Carlo average of squared distances.
"""

import numpy as np

from blockkaczmarz import (
    RateParams,
    SolverConfig,
    gen_gaussian_system,
    hoffman_equality_case,
    hoffman_lower_bound,
    measure_beta,
    random_partition,
    run_algorithm1,
    theoretical_rate,
)

sys, x_star = gen_gaussian_system(60, 10, 60, seed=2)
L = hoffman_equality_case(sys.A)
print(f"L = 1/sigma_min = {L:.4f}, sampled lower bound = {hoffman_lower_bound(sys, 300, seed=0):.4f}")

# Blocks of 5 rows in R^10: each step solves part of the system.
T = random_partition(60, 12, seed=0)
beta = measure_beta(sys.A, T)
rho = theoretical_rate("thm1", RateParams(L=L, n_i=0, beta=beta, m=T.m))
print(f"beta = {beta:.3f}, bound per iteration = {rho:.4f}")

runs, steps = 300, 60
acc = np.zeros(steps + 1)
for seed in range(runs):
    cfg = SolverConfig(epsilon=0.0, max_iterations=steps, seed=seed)
    _, tr = run_algorithm1(sys, T, cfg, monitor=lambda x: float(np.sum((x - x_star) ** 2)), check=False)
    d = tr.distance
    acc += np.concatenate([d, np.full(steps + 1 - d.size, d[-1])])
mean = acc / runs

for j in (0, 10, 20, 40, 60):
    print(f"j = {j:2d}: mean d^2 = {mean[j]:.3e}   bound = {rho**j * mean[0]:.3e}")

# Everything in one table
for v, p in [
    ("sv", RateParams(frob_norm_sq=60.0, sigma_min=1 / L)),
    ("block", RateParams(sigma_min=1 / L, beta=beta, m=T.m)),
    ("thm1", RateParams(L=L, n_i=0, beta=beta, m=T.m)),
]:
    print(f"{v:6s} {theoretical_rate(v, p):.5f}")
