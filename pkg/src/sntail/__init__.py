"""Lower-tail dependence asymptotics of the bivariate skew-normal copula."""

from .classify import CaseTag, DerivedQuantities, LimitClass, Parameters, derive, limit_classes, thm3_case
from .conditional import CondQuery, cond_prob_asym, cond_prob_exact, log_dcdu_exact
from .errors import (ContractViolation, ConvergenceError, DomainError, InternalConsistencyError,
                     NumericalError, SnTailError, UnsupportedParameters)
from .integral_asym import Theorem1Input, exact_integral, theorem1_asym
from .sn_special import LogValue, log_norm_cdf, log_norm_pdf, owen_t, sn_log_cdf, sn_quantile
from .tail_order import RvForm, TailOrderResult, dcopula_rv, empirical_exponent_fit, tail_dependence_asym

__version__ = "0.1.0"
