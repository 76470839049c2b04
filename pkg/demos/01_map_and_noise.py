"""
The map family and its noise
============================

``T(x) = 2 beta |x|**alpha - 1`` on [-1, 1], perturbed by additive noise of
amplitude ``xi`` and folded back into the interval.
"""
import numpy as np

from nio import BoundaryCondition, MapSpec, NoiseKernel, PiecewisePolynomialMother, fold

# %%
# Both endpoints map to 1 when beta = 1, and 1 is a fixed point. The critical
# point 0 goes to -1.
T = MapSpec(alpha=5.0, beta=1.0)
x = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
print("T(x)        ", T.evaluate(x))
print("log|T'(x)|  ", T.log_abs_derivative(x))

# %%
# Each half of the interval is one monotone branch with an explicit inverse.
for br in T.branches():
    print(f"branch [{br.lo:+.0f}, {br.hi:+.0f}] increasing={br.increasing} "
          f"preimage of 0: {br.inverse(0.0):+.6f}")

# %%
# A point pushed out of [-1, 1] by the noise comes back by wrapping around
# (periodic) or bouncing off the wall (reflecting).
y = np.array([-1.3, 0.2, 1.25, 3.1])
for bc in BoundaryCondition:
    print(f"{bc.value:10s}", fold(bc, y))

# %%
# Noise kernels are a mother density on [-1, 1] scaled to [-xi, xi]. The BV
# norm (variation plus mass) drives every regularity bound later on.
for kernel in (NoiseKernel.uniform(0.5), NoiseKernel(PiecewisePolynomialMother.tent(), 0.5)):
    print(f"{type(kernel.mother).__name__:28s} variation={kernel.variation():.3f} "
          f"bv_norm={kernel.bv_norm():.3f}")

rng = np.random.default_rng(0)
w = NoiseKernel.uniform(0.5).sample(rng.random(100_000))
print("uniform noise samples: min %.4f  max %.4f  mean %+.4f" % (w.min(), w.max(), w.mean()))
