"""Stationary densities, Lyapunov exponents and noise-induced order for
noisy unimodal maps ``T(x) = 2 beta |x|**alpha - 1``."""
from .dynamics import BoundaryCondition, MapSpec, MonotoneBranch, Side, fold, map_sup_distance
from .lyapunov import (CurveSample, LyapunovCurve, NioCertificate, detect_nio, find_alpha_tilde,
                       lyapunov_curve, lyapunov_from_density, parameter_continuity_bound,
                       tilde_lambda)
from .montecarlo import McConfig, McEstimate, finite_time_lyapunov, heatmap_sweep, simulate_orbit
from .noise import NoiseKernel, PiecewisePolynomialMother, UniformMother
from .spectral import (CoarseFineCertificate, ContractionReport, NonConvergence, bv_norm,
                       coarse_fine_certificate, coupling_time, stationary_density,
                       v0_contraction_norm, variation, wasserstein1)
from .ulam import Partition, annealed_matrix, deterministic_matrix, noise_matrix, project

__version__ = "0.1.0"
