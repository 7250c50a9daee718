"""Trajectory-free sampling of extreme first-passage statistics.

Samples the ordered arrival times of the first k among n diffusing
particles at small absorbing targets from short-time survival
asymptotics, with multi-target selection, exponential killing,
time-dependent emission, and a brute-force Brownian oracle for
validation.
"""

from .emission import (EmissionProfile, RegimeEstimate, classify_regime,
                       effective_exit_cdf, mfat_emission_numerical,
                       mfat_fast_asymptotic, mfat_intermediate_asymptotic,
                       mfat_slow_asymptotic, sample_first_k_emission)
from .errors import BracketError, DomainError, ExtremeFptError, ValidityError
from .geometry import Geometry, Target, ValidityWindow
from .lambertw import lambert_w0, lambert_wm1
from .oracle import (ComparisonReport, OracleSpec, compare_distributions,
                     ks_statistic, run_oracle, run_oracle_campaign)
from .order_stats import (joint_density_consecutive, order_statistic_density,
                          order_statistic_mean)
from .rng import RngStream
from .sampling import (ArrivalRecord, KillingSpec, SamplerState, next_arrival,
                       sample_first_k, sample_first_k_with_killing, select_target)
from .splitting import splitting_asymptotic, splitting_integral, transition_band_width
from .survival import (MfatEstimate, exit_cdf, exit_pdf, fastest_survival,
                       invert_exit_cdf, mfat_instantaneous, survival_single,
                       time_horizon)

__version__ = "0.1.0"

__all__ = [
    "ArrivalRecord", "BracketError", "ComparisonReport", "DomainError",
    "EmissionProfile", "ExtremeFptError", "Geometry", "KillingSpec",
    "MfatEstimate", "OracleSpec", "RegimeEstimate", "RngStream", "SamplerState",
    "Target", "ValidityError", "ValidityWindow", "classify_regime",
    "compare_distributions", "effective_exit_cdf", "exit_cdf", "exit_pdf",
    "fastest_survival", "invert_exit_cdf", "joint_density_consecutive",
    "ks_statistic", "lambert_w0", "lambert_wm1", "mfat_emission_numerical",
    "mfat_fast_asymptotic", "mfat_instantaneous", "mfat_intermediate_asymptotic",
    "mfat_slow_asymptotic", "next_arrival", "order_statistic_density",
    "order_statistic_mean", "run_oracle", "run_oracle_campaign",
    "sample_first_k", "sample_first_k_emission", "sample_first_k_with_killing",
    "select_target", "splitting_asymptotic", "splitting_integral",
    "survival_single", "time_horizon", "transition_band_width",
]
