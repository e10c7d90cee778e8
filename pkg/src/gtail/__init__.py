"""gtail: estimation and theory for the pair-imbalance tail statistic g(d).

g(d) = E[ |X1 - X2| / (X1 + X2) | X1 + X2 > d ] is constant in d exactly
when the observations follow a gamma law, which makes its tail plot a
diagnostic for gamma-type tails.  The package provides the U-statistic
ratio estimator with six variance estimators and confidence bands, the
closed-form gamma theory (including the inverse map from a g value to the
implied shape), and a reproducible Monte Carlo harness.
"""

from .core import (GEstimate, GTilde, PairSummary, Sample, accumulate,
                   as_sample, g_hat, g_hat_curve, g_tilde, g_tilde_from_pairs,
                   kernel_pair)
from .errors import (AllResamplesDegenerate, ConvergenceError,
                     DegenerateLeaveOneOut, DomainError, EmptyAfterFilter,
                     GtailError, NegativeVariance, NoExceedance, OutOfRange,
                     QuadratureError, SampleTooSmall)
from .sampling import sample_gamma
from .seeding import derive_seed, substream, validate_seed
from .simulate import (MethodStats, SimConfig, SimResult, empirical_are,
                       run_coverage_study, run_variance_study, true_variance)
from .special import (beta_fn, hyp2f1_at_minus1, log_gamma, normal_quantile,
                      reg_gamma_q)
from .theory import (AsympVariances, GammaParams, are, asymp_sigma_sq,
                     c_alpha, invert_c, moment_abs_ratio, moment_sq_ratio,
                     nu_d, sigma_tilde_sq)
from .variance import (ALL_METHODS, JACKKNIFE, LARGE_SAMPLE, NOETHER,
                       NOETHER_MOD, UNBIASED, CovMatrix2, GInterval,
                       VarianceMethod, bootstrap_method, confidence_interval,
                       cov_large_sample, cov_noether, cov_unbiased,
                       jackknife_values, parse_method, var_bootstrap,
                       var_g_hat, var_jackknife)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
