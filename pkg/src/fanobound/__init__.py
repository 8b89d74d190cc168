"""Interactive Fano-type lower bounds for finite decision-making instances.

The package computes information-theoretic bounds on bounded functionals of
the loss (tail probabilities, transform means, hinge excesses, CVaR) of an
algorithm run against a prior over models, and checks each bound against the
exact value obtained by enumerating the finite instance.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    Theorem,
    Verdict,
    cvar_lower_bound,
    cvar_lower_bound_kl_pinsker,
    hinge_lower_bound,
    one_sided_transform_bound,
    quantile_fano_bound,
    tail_to_expectation,
    two_sided_transform_bound,
)
from .divergences import (
    CHI2,
    HELLINGER,
    KL,
    TV,
    DivergenceSpec,
    bernoulli_divergence,
    f_divergence,
    pushforward,
)
from .errors import FanoBoundError, InstanceFormatError, TranscriptCapError, ValidationError
from .inversion import BernoulliBall, calibration_threshold, invert_ball, threshold_for_quantile
from .isdm import (
    BanditInstanceSpec,
    FiniteISDM,
    budget,
    compile_bandit,
    mixture_reference,
    mutual_information,
    prior_predictive_loss,
    reference_loss,
)
from .oracles import FiniteLossDistribution, exact_cvar, exact_tail
from .transforms import Direction, TransformSpec, expected_transform, parse_transform
from .verify import FuzzConfig, McSettings, fuzz_soundness, mc_transform_estimate

__all__ = [
    "BoundReport", "Theorem", "Verdict",
    "two_sided_transform_bound", "one_sided_transform_bound", "quantile_fano_bound",
    "tail_to_expectation", "hinge_lower_bound", "cvar_lower_bound", "cvar_lower_bound_kl_pinsker",
    "DivergenceSpec", "KL", "TV", "CHI2", "HELLINGER", "f_divergence", "bernoulli_divergence", "pushforward",
    "FanoBoundError", "InstanceFormatError", "ValidationError", "TranscriptCapError",
    "BernoulliBall", "invert_ball", "calibration_threshold", "threshold_for_quantile",
    "FiniteISDM", "BanditInstanceSpec", "compile_bandit", "budget", "mixture_reference",
    "mutual_information", "prior_predictive_loss", "reference_loss",
    "FiniteLossDistribution", "exact_cvar", "exact_tail",
    "TransformSpec", "Direction", "expected_transform", "parse_transform",
    "McSettings", "mc_transform_estimate", "FuzzConfig", "fuzz_soundness",
]
