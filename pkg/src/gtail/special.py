"""Scalar special functions used throughout the package.

Self-contained double-precision kernels: log-gamma (Lanczos), beta, the
regularized upper incomplete gamma Q(a, x) (series / continued fraction),
the Gauss hypergeometric 2F1 evaluated at z = -1 (alternating series with
Euler acceleration), and the standard normal quantile (rational
approximation polished by one Newton step on erfc).

All functions are pure and thread-safe.
"""

import math

from .errors import ConvergenceError, DomainError

_SQRT_2PI_LOG = 0.5 * math.log(2.0 * math.pi)

# Lanczos approximation, g = 7, 9 coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_EPS = 2.220446049250313e-16
_FPMIN = 1e-300
_MAX_ITER = 1_000_000


def _require_finite_positive(x, name):
    if not (isinstance(x, (int, float)) and math.isfinite(x) and x > 0):
        raise DomainError(f"{name} must be a finite positive real, got {x!r}")


def log_gamma(x):
    """Natural log of the gamma function for x > 0.

    Lanczos approximation with reflection below 0.5; exact at the zeros
    x = 1 and x = 2.
    """
    _require_finite_positive(x, "x")
    x = float(x)
    if x == 1.0 or x == 2.0:
        return 0.0
    if x < 0.5:
        # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    z = x - 1.0
    ser = _LANCZOS_COEF[0]
    for k in range(1, 9):
        ser += _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _SQRT_2PI_LOG + (z + 0.5) * math.log(t) - t + math.log(ser)


def beta_fn(p, q):
    """Beta function B(p, q) for p, q > 0, via log-gamma."""
    _require_finite_positive(p, "p")
    _require_finite_positive(q, "q")
    return math.exp(log_gamma(p) + log_gamma(q) - log_gamma(p + q))


def _gamma_p_series(a, x):
    """Lower regularized P(a, x) by its power series; best for x < a + 1."""
    if x == 0.0:
        return 0.0
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + a * math.log(x) - log_gamma(a))
    raise ConvergenceError(
        f"incomplete gamma series failed for a={a}, x={x}",
        achieved=abs(term / total),
    )


def _gamma_q_contfrac(a, x):
    """Upper regularized Q(a, x) by continued fraction; best for x >= a + 1."""
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(-x + a * math.log(x) - log_gamma(a)) * h
    raise ConvergenceError(
        f"incomplete gamma continued fraction failed for a={a}, x={x}",
        achieved=abs(delta - 1.0),
    )


def reg_gamma_q(a, x):
    """Regularized upper incomplete gamma Q(a, x) = P(W > x), W ~ Gamma(a, 1).

    Series representation for x < a + 1, continued fraction otherwise.
    """
    _require_finite_positive(a, "a")
    if not (isinstance(x, (int, float)) and math.isfinite(x) and x >= 0):
        raise DomainError(f"x must be a finite nonnegative real, got {x!r}")
    a = float(a)
    x = float(x)
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_contfrac(a, x)


def _euler_sum(terms, tol, max_terms):
    """Sum an eventually alternating series by the Euler transformation.

    `terms` yields the signed terms t_k in order.  Classic rolling-average
    workspace (Numerical-Recipes eulsum); stops once the update to the sum
    drops below `tol` in absolute value.
    """
    wksp = [0.0]
    total = 0.0
    nterm = 0
    for j, term in enumerate(terms):
        if j >= max_terms:
            raise ConvergenceError(
                "alternating series failed to converge", achieved=abs(term)
            )
        if j == 0:
            nterm = 1
            wksp.append(term)
            total = 0.5 * term
            delta = total
        else:
            tmp = wksp[1]
            wksp[1] = term
            for k in range(1, nterm):
                tmp, wksp[k + 1] = wksp[k + 1], 0.5 * (wksp[k] + tmp)
            val = 0.5 * (wksp[nterm] + tmp)
            if len(wksp) == nterm + 1:
                wksp.append(val)
            else:
                wksp[nterm + 1] = val
            if abs(val) <= abs(wksp[nterm]):
                nterm += 1
                delta = 0.5 * val
            else:
                delta = val
            total += delta
        if j >= 3 and abs(delta) <= tol:
            return total
    return total


def _is_nonpositive_integer(v):
    return v <= 0.0 and v == math.floor(v)


def hyp2f1_at_minus1(a, b, c, tol=1e-12):
    """Gauss hypergeometric 2F1(a, b; c; -1).

    Sums the defining series at z = -1.  Terminating series (a or b a
    nonpositive integer) are summed exactly.  Otherwise the finitely many
    terms of irregular sign (from negative a or b) are added directly and
    the strictly alternating tail is accelerated by an Euler transformation.

    Requires c > 0 and c - a - b > -1 for convergence at z = -1.
    """
    for v, name in ((a, "a"), (b, "b"), (c, "c")):
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            raise DomainError(f"{name} must be finite, got {v!r}")
    if c <= 0:
        raise DomainError(f"c must be positive, got {c!r}")
    if c - a - b <= -1.0:
        raise DomainError(
            f"series at z=-1 diverges: need c-a-b > -1, got {c - a - b!r}"
        )
    a = float(a)
    b = float(b)
    c = float(c)

    # term recurrence: t_0 = 1, t_{k+1} = -t_k (a+k)(b+k) / ((c+k)(k+1))
    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        n_terms = int(min(-a if _is_nonpositive_integer(a) else math.inf,
                          -b if _is_nonpositive_integer(b) else math.inf)) + 1
        total = 0.0
        t = 1.0
        for k in range(n_terms):
            total += t
            t *= -(a + k) * (b + k) / ((c + k) * (k + 1.0))
        return total

    # signs are irregular while a+k or b+k is negative
    k_head = 0
    if a < 0:
        k_head = max(k_head, int(math.ceil(-a)))
    if b < 0:
        k_head = max(k_head, int(math.ceil(-b)))

    head = 0.0
    t = 1.0
    k = 0
    while k < k_head:
        head += t
        t *= -(a + k) * (b + k) / ((c + k) * (k + 1.0))
        k += 1

    def tail_terms():
        nonlocal t, k
        while True:
            yield t
            t *= -(a + k) * (b + k) / ((c + k) * (k + 1.0))
            k += 1

    tail = _euler_sum(tail_terms(), tol=tol * 0.1, max_terms=_MAX_ITER)
    return head + tail


# Acklam's rational approximation to the standard normal quantile.
_ACKLAM_A = (-3.969683028665376e+01, 2.209460984245205e+02,
             -2.759285104469687e+02, 1.383577518672690e+02,
             -3.066479806614716e+01, 2.506628277459239e+00)
_ACKLAM_B = (-5.447609879822406e+01, 1.615858368580409e+02,
             -1.556989798598866e+02, 6.680131188771972e+01,
             -1.328068155288572e+01)
_ACKLAM_C = (-7.784894002430293e-03, -3.223964580411365e-01,
             -2.400758277161838e+00, -2.549732539343734e+00,
             4.374664141464968e+00, 2.938163982698783e+00)
_ACKLAM_D = (7.784695709041462e-03, 3.224671290700398e-01,
             2.445134137142996e+00, 3.754408661907416e+00)
_ACKLAM_P_LOW = 0.02425


def _acklam(p):
    if p < _ACKLAM_P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return ((((((_ACKLAM_C[0] * q + _ACKLAM_C[1]) * q + _ACKLAM_C[2]) * q
                   + _ACKLAM_C[3]) * q + _ACKLAM_C[4]) * q + _ACKLAM_C[5])
                / ((((_ACKLAM_D[0] * q + _ACKLAM_D[1]) * q + _ACKLAM_D[2]) * q
                    + _ACKLAM_D[3]) * q + 1.0))
    if p > 1.0 - _ACKLAM_P_LOW:
        return -_acklam(1.0 - p)
    q = p - 0.5
    r = q * q
    return ((((((_ACKLAM_A[0] * r + _ACKLAM_A[1]) * r + _ACKLAM_A[2]) * r
               + _ACKLAM_A[3]) * r + _ACKLAM_A[4]) * r + _ACKLAM_A[5]) * q
            / (((((_ACKLAM_B[0] * r + _ACKLAM_B[1]) * r + _ACKLAM_B[2]) * r
                 + _ACKLAM_B[3]) * r + _ACKLAM_B[4]) * r + 1.0))


def _norm_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _norm_pdf(x):
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def normal_quantile(p):
    """Standard normal quantile Phi^{-1}(p) for p in (0, 1)."""
    if not (isinstance(p, (int, float)) and math.isfinite(p) and 0.0 < p < 1.0):
        raise DomainError(f"p must lie strictly inside (0, 1), got {p!r}")
    p = float(p)
    if p == 0.5:
        return 0.0
    x = _acklam(p)
    # one Newton polish; skipped deep in the tails where the density underflows
    for _ in range(2):
        pdf = _norm_pdf(x)
        if pdf < 1e-290:
            break
        x -= (_norm_cdf(x) - p) / pdf
    return x
