"""Numerical integral geometry of normed function spaces.

Banach unit-sphere measures, Crofton densities via the cosine transform,
zonoid symmetrization, mixed volumes of cotangent body fields, and
Monte-Carlo averages of solution counts of random equation systems.
"""
from .banach import (NormSpec, NaturalSampler, SymmetrizedNorm, banach_sphere,
                     dual_norm, natural_sampler, sphere_density, symmetrize)
from .crofton import (ZonoidReport, cosine_transform, crofton_density_for,
                      invert_cosine_transform, zonoid_check)
from .errors import (InvalidArgument, InvalidBody, NonConvergence,
                     PreconditionError, UnsupportedMode)
from .fspace import (BBodyField, FunctionSpaceOnX, ManifoldChart, bbody_field,
                     pullback_body_support, theta_map)
from .grassmann import GrassmannDensity
from .mixedvol import (FiberBodySet, body_volume, finsler_mixed_volume,
                       mixed_volume, product_crofton_density)
from .scenario import Scenario, builtin_scenarios, get_scenario, load_scenario
from .solver import (EstimateReport, SystemSample, count_solutions,
                     estimate_average, verify_bkk)

__version__ = "0.1.0"
