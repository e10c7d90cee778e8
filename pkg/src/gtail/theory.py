"""Closed-form and quadrature-based theory for gamma laws.

Under a gamma law with shape alpha the tail statistic is constant in d,
g(d) = c(alpha) = 1 / (2^(2 alpha - 1) alpha B(alpha, alpha)), and the
conditional second moment is g2 = 1 / (2 alpha + 1).  This module exposes
those closed forms, the mixed-shape moments of |X-Y|/(X+Y), the pair-sum
exceedance probability nu_d, the asymptotic variances of both estimators,
and their efficiency ratio.

The asymptotic variance of the U-statistic ratio needs the projection
second moments

    eta1   = E[ psi1_1(X)^2 ],   psi1_1(x) = E[h1(x, X2; d)] - mu_d
    eta2   = E[ psi1_2(X)^2 ],   psi1_2(x) = E[h2(x, X2; d)] - nu_d
    eta12  = E[ psi1_1(X) psi1_2(X) ]

which are computed by nested adaptive quadrature.  The inner conditional
expectation reduces, after writing |x-y|/(x+y) = +-(1 - 2x/(x+y)), to
incomplete-gamma terms plus integrals of f(y)/(x+y), which are smooth on
each side of the kink y = x.  The outer integral runs over [0, x_hi] with
x_hi chosen so the neglected tail mass is below 1e-14, split at x = d/2
and x = d; for shape < 1 the substitution w = (rate * x)^shape removes the
x^(shape-1) endpoint singularity.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, OutOfRange, QuadratureError
from .special import hyp2f1_at_minus1, log_gamma, reg_gamma_q

LN2 = math.log(2.0)

#: below this exceedance probability the conditional law is numerically void
NU_FLOOR = 1e-12

_INVERT_BRACKET = (1e-4, 1e4)


@dataclass(frozen=True)
class GammaParams:
    """Shape/rate parameterization of a gamma law (mean = shape / rate)."""

    shape: float
    rate: float = 1.0

    def __post_init__(self):
        for v, name in ((self.shape, "shape"), (self.rate, "rate")):
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a finite positive real: {v!r}")
        object.__setattr__(self, "shape", float(self.shape))
        object.__setattr__(self, "rate", float(self.rate))


@dataclass(frozen=True)
class AsympVariances:
    """Asymptotic variance report for one gamma law and threshold."""

    d: float
    nu_d: float
    g_d: float
    g2_d: float
    sigma_tilde_sq: float
    sigma_sq: float
    eta1: float
    eta2: float
    eta12: float


def _check_alpha(alpha, name="alpha"):
    if not (isinstance(alpha, (int, float)) and math.isfinite(alpha) and alpha > 0):
        raise DomainError(f"{name} must be a finite positive real: {alpha!r}")
    return float(alpha)


def c_alpha(alpha):
    """Constant value of g under a gamma law with the given shape.

    c(alpha) = (2^(2 alpha - 1) * alpha * B(alpha, alpha))^(-1), evaluated
    in log space; equals 1/2 at alpha = 1 and is strictly decreasing.
    """
    alpha = _check_alpha(alpha)
    log_b = 2.0 * log_gamma(alpha) - log_gamma(2.0 * alpha)
    return math.exp((1.0 - 2.0 * alpha) * LN2 - math.log(alpha) - log_b)


def invert_c(g_value):
    """Shape parameter alpha with c(alpha) = g_value, by bisection.

    The bracket [1e-4, 1e4] covers every empirically plausible readout;
    values outside its image raise OutOfRange rather than extrapolating.
    """
    if not (isinstance(g_value, (int, float)) and 0.0 < g_value < 1.0):
        raise DomainError(f"g_value must lie in (0, 1), got {g_value!r}")
    lo, hi = _INVERT_BRACKET
    c_lo = c_alpha(lo)  # near 1
    c_hi = c_alpha(hi)  # near 0
    if not (c_hi < g_value < c_lo):
        raise OutOfRange(
            f"g_value {g_value!r} outside invertible range ({c_hi:.3g}, {c_lo:.6g})"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if c_alpha(mid) > g_value:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-8:
            break
    return 0.5 * (lo + hi)


def moment_abs_ratio(a1, a2):
    """E[|X-Y| / (X+Y)] for independent X ~ Gamma(a1), Y ~ Gamma(a2).

    Common rate cancels.  Hypergeometric representation; reduces exactly to
    c_alpha(a) when a1 == a2 == a.
    """
    a1 = _check_alpha(a1, "a1")
    a2 = _check_alpha(a2, "a2")
    log_pref = -((a1 + a2) * LN2 + math.log(a1) + math.log(a2)
                 + log_gamma(a1) + log_gamma(a2) - log_gamma(a1 + a2))
    bracket = a1 + a2
    if a1 != a2:
        diff = (hyp2f1_at_minus1(1.0, -a1, a2 + 1.0)
                - hyp2f1_at_minus1(1.0, -a2, a1 + 1.0))
        bracket += (a1 - a2) * diff
    return math.exp(log_pref) * bracket


def moment_sq_ratio(a1, a2):
    """E[((X-Y) / (X+Y))^2] for independent gamma variables.

    Equals ((a1-a2)^2 + a1 + a2) * Gamma(s) / Gamma(s+2) with s = a1 + a2;
    the gamma ratio is simplified to 1 / (s (s+1)).
    """
    a1 = _check_alpha(a1, "a1")
    a2 = _check_alpha(a2, "a2")
    s = a1 + a2
    return ((a1 - a2) ** 2 + s) / (s * (s + 1.0))


def nu_d(params, d):
    """P(X1 + X2 > d): gamma(2 shape, rate) survival at d."""
    if not (isinstance(d, (int, float)) and math.isfinite(d) and d >= 0):
        raise DomainError(f"d must be a finite nonnegative real: {d!r}")
    return reg_gamma_q(2.0 * params.shape, params.rate * float(d))


def sigma_tilde_sq(params):
    """Asymptotic variance of the paired estimator: g2 - g^2 (d-free)."""
    a = params.shape
    return moment_sq_ratio(a, a) - c_alpha(a) ** 2


def _tail_cutoff(params, tail_mass=1e-14):
    """Smallest x with Q(shape, rate x) <= tail_mass, by bracketed bisection."""
    a, b = params.shape, params.rate
    hi = (a + 40.0 * math.sqrt(a) + 40.0) / b
    while reg_gamma_q(a, b * hi) > tail_mass:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if reg_gamma_q(a, b * mid) > tail_mass:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return hi


class _GammaKernelMoments:
    """Inner conditional expectations for one gamma law and threshold."""

    def __init__(self, params, d):
        self.a = params.shape
        self.b = params.rate
        self.d = d
        self.log_norm = self.a * math.log(self.b) - log_gamma(self.a)
        self.y_top = _tail_cutoff(params, tail_mass=1e-15)

    def _pdf(self, y):
        return math.exp(self.log_norm + (self.a - 1.0) * math.log(y)
                        - self.b * y)

    def _k_integral(self, x, lo, hi):
        """Integral of 2x f(y) / (x + y) over [lo, hi].

        The integrand is bounded by 2 f(y), so truncating at y_top (tail
        mass 1e-15) is harmless.  For shape < 1 the substitution
        w = (b y)^shape removes the y^(shape-1) singularity at lo = 0.
        """
        a, b = self.a, self.b
        hi = min(hi, self.y_top)
        if hi <= lo or x == 0.0:
            return 0.0
        if a < 1.0:
            scale = 2.0 * x / (a * math.exp(log_gamma(a)))
            inv_a = 1.0 / a

            def integrand(w):
                y = w ** inv_a / b
                return scale * math.exp(-b * y) / (x + y)

            val, _ = integrate.quad(integrand, (b * lo) ** a, (b * hi) ** a,
                                    epsabs=1e-12, epsrel=1e-12, limit=200)
            return val
        val, _ = integrate.quad(lambda y: 2.0 * x * self._pdf(y) / (x + y),
                                lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200)
        return val

    def mean_ratio_above(self, x):
        """E[ |x - Y| / (x + Y) * 1{x + Y > d} ] for Y ~ Gamma(a, b).

        Uses |x-y|/(x+y) = +-(1 - 2x/(x+y)) on each side of y = x, leaving
        incomplete-gamma terms plus smooth integrals of 2x f(y)/(x+y).
        """
        a, b, d = self.a, self.b, self.d
        lo = max(0.0, d - x)
        q_lo = reg_gamma_q(a, b * lo) if lo > 0.0 else 1.0
        if lo >= x:
            # every contributing y exceeds x
            return q_lo - self._k_integral(x, lo, math.inf)
        q_x = reg_gamma_q(a, b * x)
        k_below = self._k_integral(x, lo, x)
        k_above = self._k_integral(x, x, math.inf)
        return k_below - k_above + 2.0 * q_x - q_lo


def asymp_sigma_sq(params, d, *, eta_tol=1e-8):
    """Projection moments and asymptotic variance of the U-statistic ratio.

    sigma_d^2 = (4 / nu_d) (eta1 - 2 g eta12 + g^2 eta2).  The conditional
    mean mu_d is taken as c(alpha) * nu_d (exact for gamma laws, where pair
    ratio and pair sum are independent).
    """
    d = float(d)
    if not (math.isfinite(d) and d >= 0):
        raise DomainError(f"d must be a finite nonnegative real: {d!r}")
    nud = nu_d(params, d)
    if nud <= NU_FLOOR:
        raise DomainError(
            f"nu_d = {nud!r} at d = {d!r} is below the {NU_FLOOR} floor"
        )
    a, b = params.shape, params.rate
    g = c_alpha(a)
    g2v = moment_sq_ratio(a, a)
    mu = g * nud
    kern = _GammaKernelMoments(params, d)

    def psi_pair(x):
        p1 = kern.mean_ratio_above(x) - mu
        if x >= d:
            p2 = 1.0 - nud
        else:
            p2 = reg_gamma_q(a, b * (d - x)) - nud
        return p1, p2

    x_hi = _tail_cutoff(params)
    breaks = sorted({0.5 * d, d})

    if a < 1.0:
        # outer substitution w = (b x)^alpha, weight e^(-b x) / (alpha Gamma(a))
        scale = 1.0 / (a * math.exp(log_gamma(a)))

        def outer(w):
            x = w ** (1.0 / a) / b
            p1, p2 = psi_pair(x)
            wgt = scale * math.exp(-b * x)
            return np.array([p1 * p1, p1 * p2, p2 * p2]) * wgt

        upper = (b * x_hi) ** a
        pts = [(b * t) ** a for t in breaks if 0.0 < t < x_hi]
    else:

        def outer(x):
            p1, p2 = psi_pair(x)
            wgt = kern._pdf(x)
            return np.array([p1 * p1, p1 * p2, p2 * p2]) * wgt

        upper = x_hi
        pts = [t for t in breaks if 0.0 < t < x_hi]

    res, err = integrate.quad_vec(outer, 0.0, upper, points=pts or None,
                                  epsabs=1e-10, epsrel=1e-10)
    if err > eta_tol:
        raise QuadratureError(
            f"projection-moment quadrature reached only {err:.3g}", achieved=err
        )
    eta1, eta12, eta2 = (float(v) for v in res)
    sig_sq = 4.0 / nud * (eta1 - 2.0 * g * eta12 + g * g * eta2)
    return AsympVariances(d=d, nu_d=nud, g_d=g, g2_d=g2v,
                          sigma_tilde_sq=g2v - g * g, sigma_sq=sig_sq,
                          eta1=eta1, eta2=eta2, eta12=eta12)


def are(params, d):
    """Asymptotic efficiency of the paired estimator relative to the
    U-statistic ratio at matched total sample size: sigma_d^2 / (2 sigma~^2)."""
    av = asymp_sigma_sq(params, d)
    return av.sigma_sq / (2.0 * av.sigma_tilde_sq)
