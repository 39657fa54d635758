"""Local times and zero-energy functionals of linear processes.

Simulation of linear processes in the domain of attraction of a stable
law, kernel local-time estimates, martingale decompositions of additive
functionals, bracketing covers of function classes, Nadaraya-Watson
regression on integrated covariates, and a reproducible Monte Carlo
harness.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .function_space import (  # noqa: E402
    KERNELS,
    FiniteClass,
    ParametricClass,
    RealFunction,
    SmoothBall,
    beta_moment,
    beta_norm,
    bracket_cover,
    kernel,
    location_family,
    shifted_diff,
)
from .innovations import InnovationModel, NormingSequence, sample_innovations  # noqa: E402
from .linear_process import PathBundle, ProcessSpec, partial_sums, simulate_lfsm  # noqa: E402
from .local_time import (  # noqa: E402
    LocalTimeEstimator,
    LocalTimeField,
    SupportSet,
    beta_bar,
    local_time_field,
    support_set,
)
from .regression import NadarayaWatson, make_sample, nadaraya_watson, uniform_error  # noqa: E402
from .zero_energy import (  # noqa: E402
    conditional_expectation,
    delta_n,
    martingale_decomposition,
    quadratic_variation,
    sum_zero_energy,
)
