"""
Monte Carlo cross-check
=======================

Independent noisy orbits estimate the same exponent as a time average.
Each orbit draws from its own Philox stream, so the numbers do not depend on
the number of threads.
"""
from nio import MapSpec, McConfig, NoiseKernel, finite_time_lyapunov, heatmap_sweep, lyapunov_curve

T = MapSpec(5.0)
cfg = McConfig(orbits=200, length=10_000, seed=0)

# %%
# Operator value against the orbit average at a few amplitudes.
xis = [0.05, 0.1, 0.3, 1.0]
curve = lyapunov_curve(T, None, "periodic", 1024, xis, with_cf=False, workers=4)
for s in curve.samples:
    est = finite_time_lyapunov(T, NoiseKernel.uniform(s.xi), "periodic", cfg, threads=4)
    print(f"xi={s.xi:<5} operator {s.lam:+.5f}   orbits {est.mean:+.5f} +- {est.stderr:.5f}")

# %%
# A small (alpha, xi) heatmap with shorter orbits.
alphas, grid = [2.0, 3.0, 4.0, 5.0], [0.05, 0.2, 1.0, 2.0]
small = McConfig(orbits=64, length=2000, seed=1)
table = heatmap_sweep(alphas, grid, 1.0, "periodic", small, threads=4)
print("alpha \\ xi " + "".join(f"{x:>9}" for x in grid))
for a, row in zip(alphas, table):
    print(f"{a:<10} " + "".join(f"{e.mean:+9.3f}" for e in row))
