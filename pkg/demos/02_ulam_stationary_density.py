"""
Ulam matrices and stationary densities
======================================

Discretize the annealed transfer operator on a uniform partition and solve
for its stationary density by power iteration.
"""
import numpy as np

from nio import MapSpec, NoiseKernel, Partition, annealed_matrix, deterministic_matrix, noise_matrix
from nio.spectral import stationary_density, variation
from nio.ulam import check_stochastic

T = MapSpec(5.0)
part = Partition(256)

# %%
# The annealed matrix is the deterministic Ulam matrix followed by the noise
# matrix. Densities are row vectors, so one step is ``f @ M``.
det = deterministic_matrix(T, part)
noise = noise_matrix(NoiseKernel.uniform(0.2), "periodic", part)
M = annealed_matrix(T, NoiseKernel.uniform(0.2), "periodic", part, det=det)
for name, A in [("deterministic", det), ("noise", noise), ("annealed", M)]:
    check_stochastic(A)
    print(f"{name:14s} nonzeros per row: {np.count_nonzero(A, axis=1).mean():6.1f}")

# %%
# The stationary density is normalized as a probability density.
f, info = stationary_density(M, full_output=True)
print(f"converged in {info.iterations} steps, residual {info.residual:.1e}, "
      f"mass {part.delta * f.sum():.12f}")

# %%
# A coarse text profile: mass piles up near the fixed point at 1 and near -1.
coarse = f.reshape(16, -1).mean(axis=1)
for c, v in zip(part.edges[::16], coarse):
    print(f"{c:+.3f} {'#' * int(40 * v / coarse.max())}")

# %%
# Larger noise flattens the density. At xi = 2 periodic noise wraps around the
# circle exactly once and the density is exactly uniform.
for xi in (0.05, 0.2, 0.5, 2.0):
    g = stationary_density(annealed_matrix(T, NoiseKernel.uniform(xi), "periodic", part, det=det))
    print(f"xi={xi:<5} Var(f)={variation(g):8.4f}   bound 1/xi={1 / xi:8.4f}")
