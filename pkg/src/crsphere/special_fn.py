"""Special-function kernels evaluated in a numerically safe way.

Gamma quotients are always formed in the log domain, the digamma difference
is summed as a telescoping series with an Euler-Maclaurin tail, and Jacobi
polynomials use the three-term recurrence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AccuracySpec",
    "ConvergenceError",
    "log_gamma",
    "gamma_ratio",
    "log_gamma_ratio",
    "poch_ratio",
    "digamma_diff",
    "jacobi_poly",
]

# largest x with exp(x) finite in double precision
_LOG_MAX = math.log(np.finfo(float).max)

# 2 zeta(6) / (2 pi)^6: Euler-Maclaurin remainder constant after the B6 term
_EM_REMAINDER = 2.0 * (math.pi**6 / 945.0) / (2.0 * math.pi) ** 6


class ConvergenceError(RuntimeError):
    """A series did not reach its tolerance within the allowed number of terms."""


@dataclass(frozen=True)
class AccuracySpec:
    series_tolerance: float = 1e-15
    max_terms: int = 100_000

    def __post_init__(self):
        if not self.series_tolerance > 0:
            raise ValueError("series_tolerance must be positive")
        if int(self.max_terms) < 1:
            raise ValueError("max_terms must be at least 1")


DEFAULT_ACCURACY = AccuracySpec()


def _check_positive(name, x):
    if not (x > 0) or not math.isfinite(x):
        raise ValueError(f"{name} must be a positive finite real, got {x!r}")


def log_gamma(x: float) -> float:
    """Return ln Γ(x) for x > 0."""
    _check_positive("x", x)
    return math.lgamma(x)


def log_gamma_ratio(a: float, b: float) -> float:
    """ln(Γ(a)/Γ(b)) for positive a, b."""
    _check_positive("a", a)
    _check_positive("b", b)
    if a == b:
        return 0.0
    return math.lgamma(a) - math.lgamma(b)


def gamma_ratio(a: float, b: float) -> float:
    """Γ(a)/Γ(b) without ever forming Γ itself.

    Raises OverflowError if the quotient is not representable.
    """
    lr = log_gamma_ratio(a, b)
    if lr > _LOG_MAX:
        raise OverflowError(f"Γ({a})/Γ({b}) exceeds the double range")
    return math.exp(lr)


def poch_ratio(a: float, b: float, j: int) -> float:
    """(a)_j / (b)_j for b > 0 and a > -1.

    Handles a in (-1, 0] where Γ(a) changes sign or has a pole; the
    Pochhammer symbol (0)_j vanishes for j ≥ 1.
    """
    j = int(j)
    if j < 0:
        raise ValueError("j must be non-negative")
    if j == 0:
        return 1.0
    _check_positive("b", b)
    if a > 0:
        return math.exp(log_gamma_ratio(a + j, a) - log_gamma_ratio(b + j, b))
    if a <= -1:
        raise ValueError("a must exceed -1")
    if a == 0:
        return 0.0
    # (a)_j = a (a+1)_{j-1}, with a+1 > 0
    return a / b * poch_ratio(a + 1.0, b + 1.0, j - 1)


def _tail(a: float, b: float, L: float) -> float:
    """Euler-Maclaurin estimate of sum_{l>=L} [1/(b+l) - 1/(a+l)]."""
    xa = a + L
    xb = b + L
    f0 = 1.0 / xb - 1.0 / xa
    f1 = -1.0 / xb**2 + 1.0 / xa**2
    f3 = -6.0 / xb**4 + 6.0 / xa**4
    f5 = -120.0 / xb**6 + 120.0 / xa**6
    integral = math.log1p((a - b) / xb)
    return integral + 0.5 * f0 - f1 / 12.0 + f3 / 720.0 - f5 / 30240.0


def _tail_bound(a: float, b: float, L: float) -> float:
    # remainder after the B6 term; decreasing in L
    return _EM_REMAINDER * abs(120.0 / (b + L) ** 6 - 120.0 / (a + L) ** 6)


def _cutoff(a: float, b: float, tol: float, max_terms: int) -> int:
    """Smallest L with tail bound <= tol (exponential search, then bisection)."""
    if _tail_bound(a, b, 0.0) <= tol:
        return 0
    hi = 1
    while _tail_bound(a, b, float(hi)) > tol:
        hi *= 2
        if hi > max_terms:
            if _tail_bound(a, b, float(max_terms)) > tol:
                return -1
            hi = max_terms
            break
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _tail_bound(a, b, float(mid)) <= tol:
            hi = mid
        else:
            lo = mid
    return hi


def digamma_diff(a: float, b: float, acc: AccuracySpec = DEFAULT_ACCURACY) -> float:
    """ψ(a) − ψ(b) as the series Σ_l [1/(b+l) − 1/(a+l)].

    Terms decay like 1/l², so the series is summed directly only up to the
    first index where an Euler-Maclaurin tail (with a rigorous remainder
    bound) closes it to within ``acc.series_tolerance``.
    """
    _check_positive("a", a)
    _check_positive("b", b)
    if a == b:
        return 0.0
    L = _cutoff(a, b, acc.series_tolerance, int(acc.max_terms))
    if L < 0:
        raise ConvergenceError(
            f"digamma_diff({a}, {b}) did not converge in {acc.max_terms} terms"
        )
    partial = 0.0
    comp = 0.0
    for l in range(L):
        term = (a - b) / ((a + l) * (b + l))
        # Kahan summation keeps the partial sum at the tolerance level
        y = term - comp
        t = partial + y
        comp = (t - partial) - y
        partial = t
    return (partial - comp) + _tail(a, b, float(L))


def jacobi_poly(m: int, alpha: float, beta: float, t):
    """Jacobi polynomial P_m^{(alpha, beta)}(t), standard normalization.

    ``t`` may be a scalar or an array; the result has the same shape.
    """
    m = int(m)
    if m < 0:
        raise ValueError("degree m must be non-negative")
    if not (alpha > -1 and beta > -1):
        raise ValueError("alpha and beta must exceed -1")
    x = np.asarray(t, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise ValueError("t must lie in [-1, 1]")
    p_prev = np.ones_like(x)
    if m == 0:
        return p_prev if x.ndim else float(p_prev)
    ab = alpha + beta
    p = (alpha + 1.0) + (ab + 2.0) * (x - 1.0) / 2.0
    for k in range(2, m + 1):
        c = 2.0 * k + ab
        a1 = 2.0 * k * (k + ab) * (c - 2.0)
        a2 = (c - 1.0) * (alpha * alpha - beta * beta)
        a3 = (c - 1.0) * c * (c - 2.0)
        a4 = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * c
        p, p_prev = ((a2 + a3 * x) * p - a4 * p_prev) / a1, p
    return p if x.ndim else float(p)
