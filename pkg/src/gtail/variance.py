"""Variance estimators for the U-statistic ratio estimate of g(d).

Six routes to Var(g_hat(d)):

  unbiased      minimum-variance unbiased estimate of the 2x2 covariance of
                (U1, U2) from the C1^2 / C2^2 pair statistics
  noether       Noether's simple plug-in estimate (can be negative)
  noether-mod   Noether rescaled by n(n-1) / ((n-2)(n-3))
  large-sample  plug-in estimate of the asymptotic projection covariance
  bootstrap     M with-replacement resamples, g recomputed per resample
  jackknife     leave-one-out, with the U-statistics rescaled exactly from
                row sums (no re-accumulation)

The first four feed a common delta-method combination
(v11 - 2 g v12 + g^2 v22) / U2^2; the resampling estimators measure the
spread of g directly.  Negative outcomes raise NegativeVariance instead of
being clamped.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import GEstimate, _u_pair_batch, as_sample
from .errors import (AllResamplesDegenerate, DegenerateLeaveOneOut,
                     DomainError, NegativeVariance, NoExceedance,
                     SampleTooSmall)
from .seeding import substream
from .special import normal_quantile

_KINDS = ("unbiased", "noether", "noether-mod", "large-sample",
          "bootstrap", "jackknife")


@dataclass(frozen=True)
class VarianceMethod:
    """Tagged choice of variance estimator (bootstrap carries its M)."""

    kind: str
    boot_m: int = 999

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown variance method {self.kind!r}")
        if self.kind == "bootstrap" and self.boot_m < 2:
            raise DomainError("bootstrap needs at least 2 resamples")

    def __str__(self):
        if self.kind == "bootstrap":
            return f"bootstrap({self.boot_m})"
        return self.kind


UNBIASED = VarianceMethod("unbiased")
NOETHER = VarianceMethod("noether")
NOETHER_MOD = VarianceMethod("noether-mod")
LARGE_SAMPLE = VarianceMethod("large-sample")
JACKKNIFE = VarianceMethod("jackknife")


def bootstrap_method(m=999):
    return VarianceMethod("bootstrap", boot_m=int(m))


ALL_METHODS = (UNBIASED, NOETHER, NOETHER_MOD, LARGE_SAMPLE,
               bootstrap_method(), JACKKNIFE)


def parse_method(name, boot_m=999):
    """Parse a CLI-style method name."""
    name = name.strip().lower()
    if name == "bootstrap":
        return bootstrap_method(boot_m)
    return VarianceMethod(name)


@dataclass(frozen=True)
class CovMatrix2:
    """Symmetric 2x2 covariance estimate for (U1, U2).

    Not necessarily positive semidefinite: Noether-type estimates can have
    negative diagonal entries, flagged in `negative_diagonal`.
    """

    entries: np.ndarray
    negative_diagonal: bool = False


@dataclass(frozen=True)
class GInterval:
    """Normal-quantile confidence interval for g(d), clamped to [0, 1]."""

    level: float
    lower: float
    upper: float
    se: float
    method: VarianceMethod


def cov_unbiased(summary):
    """Minimum-variance unbiased estimate of Cov(U1, U2).

    (4 C1^2 - 2 C2^2) / n_(4) - (4n - 6) / ((n-2)(n-3)) * U U^T, with
    n_(4) the falling factorial n(n-1)(n-2)(n-3).
    """
    n = summary.n
    if n < 4:
        raise SampleTooSmall(f"unbiased covariance needs n >= 4, got {n}")
    n4 = float(n * (n - 1) * (n - 2) * (n - 3))
    uut = np.outer(summary.u, summary.u)
    ent = (4.0 * summary.c1sq - 2.0 * summary.c2sq) / n4 \
        - (4.0 * n - 6.0) / ((n - 2.0) * (n - 3.0)) * uut
    return CovMatrix2(entries=ent)


def cov_noether(summary, modified=False):
    """Noether's plug-in estimate of Cov(U1, U2) (optionally modified).

    Entry (a, b) is binom^-2 C1^2[a,b] - binom^-1 {(2n-3) U_a U_b + 1}: the
    scalar formula with squares replaced by the matching cross products and
    the additive constant kept in every entry.  (Replacing the constant by
    its bilinear polarization -1/2 instead drives the combined estimate
    negative almost surely at moderate sample sizes, which contradicts the
    reported behaviour of this estimator; the all-entries constant
    reproduces it.)
    """
    n = summary.n
    if n < 2 or (modified and n < 4):
        raise SampleTooSmall(
            f"noether covariance needs n >= {4 if modified else 2}, got {n}"
        )
    binom = 0.5 * n * (n - 1)
    const = np.ones((2, 2))
    uut = np.outer(summary.u, summary.u)
    ent = summary.c1sq / binom**2 - ((2.0 * n - 3.0) * uut + const) / binom
    if modified:
        ent = ent * (n * (n - 1.0)) / ((n - 2.0) * (n - 3.0))
    return CovMatrix2(entries=ent,
                      negative_diagonal=bool(np.any(np.diag(ent) < 0.0)))


def cov_large_sample(summary):
    """Plug-in estimate of the projection covariance matrix.

    Entries zeta1_hat - U U^T with zeta1_hat = (C1^2 - C2^2) / n_(3); this
    estimates the asymptotic Sigma of sqrt(n)(U - theta) -> N(0, 4 Sigma),
    so it must be scaled by 4/n before use as a covariance of (U1, U2).
    """
    n = summary.n
    if n < 3:
        raise SampleTooSmall(f"large-sample covariance needs n >= 3, got {n}")
    n3 = float(n * (n - 1) * (n - 2))
    zeta1 = (summary.c1sq - summary.c2sq) / n3
    return CovMatrix2(entries=zeta1 - np.outer(summary.u, summary.u))


def _combine(cov, g, u2, method):
    """Delta-method combination (v11 - 2 g v12 + g^2 v22) / u2^2."""
    m = cov.entries
    value = (m[0, 0] - 2.0 * g * m[0, 1] + g * g * m[1, 1]) / (u2 * u2)
    if value < 0.0:
        raise NegativeVariance(value, method=method)
    return value


def var_bootstrap(sample, d, m=999, seed=0):
    """Bootstrap estimate of Var(g_hat(d)) from m resamples.

    Resamples draw n observations with replacement from the sample; each
    resample's g is recomputed by a full pairwise pass.  Resamples with no
    exceeding pair are skipped (and reported via a warning).
    """
    sample = as_sample(sample)
    n = sample.n
    if n < 2:
        raise SampleTooSmall(f"bootstrap needs n >= 2, got {n}")
    if m < 2:
        raise DomainError("bootstrap needs at least 2 resamples")
    rng = substream(seed)
    idx = rng.integers(0, n, size=(int(m), n))
    u1, u2 = _u_pair_batch(sample.values[idx], float(d))
    valid = u2 > 0.0
    n_valid = int(np.count_nonzero(valid))
    if n_valid < 2:
        raise AllResamplesDegenerate(
            f"{m - n_valid} of {m} resamples had no exceeding pair"
        )
    if n_valid < m:
        warnings.warn(
            f"dropped {m - n_valid} of {m} degenerate bootstrap resamples",
            stacklevel=2,
        )
    g = u1[valid] / u2[valid]
    return float(np.var(g, ddof=1))


def jackknife_values(estimate):
    """Leave-one-out estimates g^(-j), via exact row-sum rescaling.

    binom(n,2) U - S_j is the pair total without observation j; dividing by
    binom(n-1,2) is never actually needed because the ratio cancels it.
    """
    summary = estimate.summary
    n = summary.n
    if n < 3:
        raise SampleTooSmall(f"jackknife needs n >= 3, got {n}")
    totals = 0.5 * np.array([math.fsum(summary.row_sums[:, 0]),
                             math.fsum(summary.row_sums[:, 1])])
    num = totals[0] - summary.row_sums[:, 0]
    den = totals[1] - summary.row_sums[:, 1]
    if np.any(den == 0.0):
        raise DegenerateLeaveOneOut(
            "a leave-one-out subsample has no exceeding pair"
        )
    return num / den


def var_jackknife(estimate):
    """Jackknife estimate of Var(g_hat(d)): (n-1)/n sum (g_-j - mean)^2."""
    g_loo = jackknife_values(estimate)
    n = g_loo.size
    centered = g_loo - g_loo.mean()
    return float((n - 1.0) / n * np.dot(centered, centered))


def var_g_hat(estimate, method, seed=0):
    """Estimate Var(g_hat(d)) by the chosen method.

    Covariance-based methods feed the delta-method combination; bootstrap
    and jackknife measure the spread of g directly.  A negative outcome
    raises NegativeVariance rather than being silently zeroed.
    """
    if not isinstance(estimate, GEstimate):
        raise DomainError("estimate must be a GEstimate")
    summary = estimate.summary
    u2 = summary.u[1]
    if u2 <= 0.0:
        raise NoExceedance("estimate has no exceeding pair")
    kind = method.kind
    if kind == "unbiased":
        return _combine(cov_unbiased(summary), estimate.g_hat, u2, method)
    if kind == "noether":
        return _combine(cov_noether(summary), estimate.g_hat, u2, method)
    if kind == "noether-mod":
        return _combine(cov_noether(summary, modified=True),
                        estimate.g_hat, u2, method)
    if kind == "large-sample":
        cov = cov_large_sample(summary)
        scaled = CovMatrix2(entries=cov.entries * (4.0 / summary.n))
        return _combine(scaled, estimate.g_hat, u2, method)
    if kind == "bootstrap":
        return var_bootstrap(estimate.sample, estimate.d, method.boot_m, seed)
    if kind == "jackknife":
        return var_jackknife(estimate)
    raise DomainError(f"unknown variance method {kind!r}")


def confidence_interval(estimate, method, level=0.95, seed=0):
    """Normal-quantile confidence interval for g(d), clamped to [0, 1]."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level!r}")
    var = var_g_hat(estimate, method, seed=seed)
    se = math.sqrt(var)
    half = normal_quantile(0.5 * (1.0 + level)) * se
    return GInterval(level=level,
                     lower=max(estimate.g_hat - half, 0.0),
                     upper=min(estimate.g_hat + half, 1.0),
                     se=se, method=method)
