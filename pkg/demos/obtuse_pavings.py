"""
When blocks of inequalities help, and when they cannot be fixed
================================================================

Projecting onto several violated half-spaces at once can overshoot the
feasible set. If every pair of rows in a block has a non-positive inner
product, it cannot. Sign flips (with extra slack) are the tool for getting
there, but they do not always work.
"""

import numpy as np

from blockkaczmarz import (
    MixedSystem,
    ObtusifyFailed,
    RowPaving,
    count_positive_pairs,
    distance_to_S,
    gen_gaussian_system,
    is_pairwise_obtuse,
    obtusify,
    pruned_block_step,
    standardize,
    violated_subset,
)

# Three half-spaces through the origin in R^3 with pairwise acute normals.
# The point below violates the first two; projecting onto both of their
# boundaries at once moves it further from S than it started.
A, b = standardize([[-0.67, 0.74, -0.06], [-0.53, 0.71, -0.47], [-0.31, -0.02, -0.95]], np.zeros(3))
acute = MixedSystem(A, b, 0)
block = RowPaving([[0, 1, 2]])
x = np.array([-2.5, -1.2, 0.9])
y = pruned_block_step(acute, x, [0, 1, 2])
print("Gram matrix of the block:\n", np.round(A @ A.T, 3))
print("violated rows:", violated_subset(acute, x, [0, 1, 2]).tolist())
print(f"d(x, S) = {distance_to_S(acute, x):.4f}   d(step, S) = {distance_to_S(acute, y):.4f}")

# Two rows with a positive inner product become obtuse after one flip.
pair = MixedSystem(np.array([[1.0, 0.0], [0.8, 0.6]]), np.zeros(2), 0)
flipped = obtusify(pair, RowPaving([[0, 1]]), slack=0.0)
print("pair after one flip:", flipped.A.tolist(), is_pairwise_obtuse(flipped.A, RowPaving([[0, 1]])))

# Three rows whose three inner products are all positive. Flipping a row
# changes the sign of two of the products, so an odd number of acute pairs
# survives any set of flips.
tri = MixedSystem(np.array([[1.0, 0.0, 0.0], [0.6, 0.8, 0.0], [0.6, 0.0, 0.8]]), np.zeros(3), 0)
try:
    obtusify(tri, RowPaving([[0, 1, 2]]), slack=0.0, max_passes=20)
except ObtusifyFailed as err:
    print("triangle:", err, "| best state keeps", err.positive_pairs, "positive pair")

# The same obstruction appears in blocks of 10 random rows.
sys, _ = gen_gaussian_system(300, 100, 200, seed=0, slack=0.1)
T = RowPaving([np.arange(200 + 10 * k, 210 + 10 * k) for k in range(10)])
print("positive pairs before:", count_positive_pairs(sys.A, T))
best = obtusify(sys, T, slack=0.2, strict=False)
print("positive pairs after the best sweep:", count_positive_pairs(best.A, T))
print("blocks that became obtuse:", sum(is_pairwise_obtuse(best.A, T)), "of", T.m)
