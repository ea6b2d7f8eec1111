"""Random processes with immigration at renewal epochs.

Construct the transient superposition ``Y(t) = sum_k X_{k+1}(t - S_k)``,
its stationary counterpart built on the two-sided stationary renewal point
process, and statistically verify the convergence-to-stationarity and
integrability claims at desk scale.
"""

from .distributions import (
    Exponential,
    FiniteDiscrete,
    Gamma,
    LogNormal,
    Pareto,
    PointMass,
    Uniform,
    integrated_tail_cdf,
    is_lattice,
    law_from_config,
    law_to_config,
    mean,
    sample,
    sample_size_biased,
    sample_stationary_delay,
)
from .errors import ConfigError, KernelError, LawError, NonAbsorbedPathError, TruncationError
from .kernels import (
    BirthDeath,
    DeterministicTable,
    Indicator,
    ScaledExpDecay,
    ScaledTable,
    SpikeTrain,
    absorption_time,
    eval_path,
    kernel_from_config,
    kernel_to_config,
    sample_path,
    sup_over_interval,
)
from .process import FddSample, ProcessSample, eval_stationary, eval_transient, fdd_sample
from .renewal import (
    RenewalRealization,
    StationaryWindow,
    build_stationary_window,
    shift_window,
    simulate_forward,
    window_to_csv,
)
from .stats import TestResult, chisq_gof_counts, energy_distance, ks_one_sample, ks_two_sample
from .streams import stream

__version__ = "0.1.0"
