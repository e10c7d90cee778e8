"""Monte Carlo studies of the estimators' finite-sample behaviour.

Protocol.  For a gamma law and threshold d, the total sample size n is
ceil(n_eff / nu_d), so that n * nu_d hits the requested effective sample
size.  The "true" variance of sqrt(n nu_d) g_hat(d) is approximated by a
dedicated Monte Carlo run; the study replications then compare each
variance estimate (scaled by n * U2, the empirical counterpart of n nu_d)
against that truth via the average relative value and the RMSE, or build
confidence intervals and count coverage of the known constant g = c(alpha).

Negative variance estimates (Noether family, occasionally others) are
counted and excluded from the averages, matching the "-" convention used
when reporting; replications without an exceeding pair are dropped and
counted.

Determinism.  All randomness flows through the substream registry in
`seeding`, keyed by (master seed, stream tag, replication or chunk index),
so results are reproducible and independent of thread count.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import Sample, _u_pair_batch, g_hat, g_tilde_from_pairs
from .errors import (DegenerateLeaveOneOut, DomainError, GtailError,
                     NegativeVariance, NoExceedance, SampleTooSmall)
from .sampling import draw_gamma
from .seeding import (TAG_ARE_PAIRING, TAG_ARE_SAMPLE, TAG_STUDY_BOOT,
                      TAG_STUDY_SAMPLE, TAG_TRUTH, derive_seed, substream,
                      validate_seed)
from .theory import GammaParams, c_alpha, nu_d
from .variance import UNBIASED, confidence_interval, var_g_hat

_TRUTH_CHUNK = 4096


@dataclass(frozen=True)
class SimConfig:
    """One simulation design point."""

    params: GammaParams
    d: float
    n_eff: float
    reps: int = 2000
    methods: tuple = (UNBIASED,)
    level: float = 0.95
    seed: int = 0
    truth_reps: int = 100_000

    def __post_init__(self):
        if not (self.n_eff > 0 and math.isfinite(self.n_eff)):
            raise DomainError(f"n_eff must be positive, got {self.n_eff!r}")
        if self.reps < 1 or self.truth_reps < 2:
            raise DomainError("reps must be >= 1 and truth_reps >= 2")
        if not 0.0 < self.level < 1.0:
            raise DomainError(f"level must lie in (0, 1): {self.level!r}")
        validate_seed(self.seed)
        object.__setattr__(self, "methods", tuple(self.methods))

    @property
    def nu(self):
        return nu_d(self.params, self.d)

    @property
    def n(self):
        n = math.ceil(self.n_eff / self.nu)
        if n < 4:
            raise DomainError(
                f"derived sample size {n} < 4; increase n_eff or lower d"
            )
        return n


@dataclass(frozen=True)
class MethodStats:
    """Aggregated study outcome for one variance method."""

    method: object
    ave_relative: float = math.nan
    rmse: float = math.nan
    negative_fraction: float = 0.0
    failed_fraction: float = 0.0
    coverage: float = math.nan


@dataclass(frozen=True)
class SimResult:
    """Per-method statistics plus the shared truth for one design point."""

    config: SimConfig
    n_used: int
    true_variance: float
    stats: tuple
    dropped_reps: int = 0

    def by_method(self):
        return {s.method: s for s in self.stats}


def true_variance(config, sampler=None):
    """MC approximation of Var(sqrt(n nu_d) g_hat(d)).

    Samples are drawn in fixed-size chunks with per-chunk substreams; the
    `sampler` hook (rng, size) -> array overrides the gamma draw for
    degenerate-distribution tests.  Replications with no exceeding pair are
    dropped.
    """
    n = config.n
    nu = config.nu
    scale = n * nu
    values = np.empty(config.truth_reps)
    n_valid = 0
    done = 0
    chunk_idx = 0
    while done < config.truth_reps:
        m = min(_TRUTH_CHUNK, config.truth_reps - done)
        rng = substream(config.seed, TAG_TRUTH, chunk_idx)
        if sampler is None:
            vals = draw_gamma(rng, config.params.shape, config.params.rate,
                              (m, n))
        else:
            vals = np.asarray(sampler(rng, (m, n)), dtype=np.float64)
        u1, u2 = _u_pair_batch(vals, float(config.d))
        ok = u2 > 0.0
        k = int(np.count_nonzero(ok))
        values[n_valid:n_valid + k] = u1[ok] / u2[ok]
        n_valid += k
        done += m
        chunk_idx += 1
    if n_valid < 2:
        raise NoExceedance("almost every truth replication was degenerate")
    g = values[:n_valid]
    return float(np.var(g, ddof=1) * scale)


def _study_loop(config, per_rep):
    """Shared replication loop: draw, estimate, hand off to `per_rep`."""
    n = config.n
    dropped = 0
    for rep in range(config.reps):
        rng = substream(config.seed, TAG_STUDY_SAMPLE, rep)
        sample = Sample(draw_gamma(rng, config.params.shape,
                                   config.params.rate, n))
        try:
            est = g_hat(sample, config.d)
        except NoExceedance:
            dropped += 1
            continue
        per_rep(rep, est)
    return dropped


def run_variance_study(config, true_var=None):
    """Relative average and RMSE of each variance estimator against truth.

    Estimates are scaled by n * U2 so they target Var(sqrt(n nu_d) g_hat);
    for the covariance-combination methods this reproduces the canonical
    normalized form exactly.
    """
    truth = true_variance(config) if true_var is None else float(true_var)
    n = config.n
    methods = config.methods
    scaled = {m: [] for m in methods}
    negatives = {m: 0 for m in methods}
    failures = {m: 0 for m in methods}

    def per_rep(rep, est):
        boot_seed = derive_seed(config.seed, TAG_STUDY_BOOT, rep)
        for m in methods:
            try:
                v = var_g_hat(est, m, seed=boot_seed)
            except NegativeVariance:
                negatives[m] += 1
                continue
            except (SampleTooSmall, DegenerateLeaveOneOut, GtailError):
                failures[m] += 1
                continue
            scaled[m].append(v * n * est.summary.u[1])

    dropped = _study_loop(config, per_rep)
    used = config.reps - dropped
    stats = []
    for m in methods:
        vals = np.asarray(scaled[m])
        if vals.size:
            ave = float(np.mean(vals / truth))
            rmse = float(np.sqrt(np.mean((vals - truth) ** 2)))
        else:
            ave = math.nan
            rmse = math.nan
        stats.append(MethodStats(
            method=m, ave_relative=ave, rmse=rmse,
            negative_fraction=negatives[m] / used if used else math.nan,
            failed_fraction=failures[m] / used if used else math.nan,
        ))
    return SimResult(config=config, n_used=n, true_variance=truth,
                     stats=tuple(stats), dropped_reps=dropped)


def run_coverage_study(config):
    """Empirical coverage of the normal-quantile interval for g(d).

    The target is the constant c(alpha); failed intervals (negative
    variance, degenerate resampling) are counted separately and excluded
    from the coverage denominator.
    """
    true_g = c_alpha(config.params.shape)
    methods = config.methods
    covered = {m: 0 for m in methods}
    succeeded = {m: 0 for m in methods}
    negatives = {m: 0 for m in methods}
    failures = {m: 0 for m in methods}

    def per_rep(rep, est):
        boot_seed = derive_seed(config.seed, TAG_STUDY_BOOT, rep)
        for m in methods:
            try:
                ci = confidence_interval(est, m, level=config.level,
                                         seed=boot_seed)
            except NegativeVariance:
                negatives[m] += 1
                continue
            except (SampleTooSmall, DegenerateLeaveOneOut, GtailError):
                failures[m] += 1
                continue
            succeeded[m] += 1
            if ci.lower <= true_g <= ci.upper:
                covered[m] += 1

    dropped = _study_loop(config, per_rep)
    used = config.reps - dropped
    stats = []
    for m in methods:
        ok = succeeded[m]
        stats.append(MethodStats(
            method=m,
            coverage=covered[m] / ok if ok else math.nan,
            negative_fraction=negatives[m] / used if used else math.nan,
            failed_fraction=failures[m] / used if used else math.nan,
        ))
    return SimResult(config=config, n_used=config.n, true_variance=math.nan,
                     stats=tuple(stats), dropped_reps=dropped)


def empirical_are(params, d, n, reps, seed=0):
    """MC efficiency of the random-pairing estimator vs the U-statistic ratio.

    Both estimators are evaluated on the same simulated samples (common
    random numbers) with m = n/2 pairs; returns Var(g_hat) / Var(g_tilde).
    """
    if n % 2 or n < 4:
        raise DomainError(f"n must be even and >= 4, got {n!r}")
    validate_seed(seed)
    g_u = np.empty(reps)
    g_t = np.empty(reps)
    n_valid = 0
    done = 0
    chunk_idx = 0
    chunk = max(1, min(256, reps))
    while done < reps:
        m = min(chunk, reps - done)
        rng = substream(seed, TAG_ARE_SAMPLE, chunk_idx)
        vals = draw_gamma(rng, params.shape, params.rate, (m, n))
        u1, u2 = _u_pair_batch(vals, float(d))
        for i in range(m):
            if u2[i] == 0.0:
                continue
            rng_pair = substream(seed, TAG_ARE_PAIRING, done + i)
            perm = rng_pair.permutation(n)
            row = vals[i, perm]
            try:
                gt = g_tilde_from_pairs(row[0::2], row[1::2], d)
            except NoExceedance:
                continue
            g_u[n_valid] = u1[i] / u2[i]
            g_t[n_valid] = gt
            n_valid += 1
        done += m
        chunk_idx += 1
    if n_valid < 2:
        raise NoExceedance("almost every replication was degenerate")
    var_u = float(np.var(g_u[:n_valid], ddof=1))
    var_t = float(np.var(g_t[:n_valid], ddof=1))
    if var_t == 0.0:
        raise DomainError("paired estimator variance is zero; ratio undefined")
    return var_u / var_t
