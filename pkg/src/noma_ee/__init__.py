"""NOMA downlink rates, ergodic capacity and energy-efficiency optimization."""

__version__ = "0.1.0"

from ._accel import BACKEND
from .channel import (ChannelRealization, EffectiveGain, Placement, SystemConfig, make_rng,
                      path_loss, sample_channel, sample_gains, sample_placement,
                      sample_realization)
from .ee import (AntennaBudget, EeSolution, GradientForm, PowerModel, check_constraints,
                 dinkelbach_value, ee_gradient, ee_objective, ee_second_derivative,
                 maximize_ee, rate_model)
from .ergodic import (GcqCoefficients, MonteCarloEstimate, asymptotic_rate,
                      ergodic_sum_rate_gcq, ergodic_sum_rate_mc, gain_cdf, gain_pdf,
                      gcq_coefficients)
from .errors import (ConfigError, DomainError, InfeasibleError, InvariantError, NomaError,
                     NonConvergenceError)
from .rates import PowerAllocation, RateReport, order_users, sic_rate, sum_rate
