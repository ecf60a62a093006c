"""Grid certification of the spectral inequalities behind the Sobolev bounds.

The subcritical Sobolev inequality reduces, bidegree by bidegree, to

    λ_j(d1) λ_k(d1) / λ_0(d1)²  ≤  1 + B(d, q) (λ_j(d) λ_k(d) - λ_0(d)²)

with d1 = Q(1 - 2/q). The functions below evaluate both sides on finite
boxes of (j, k), compare their k-derivatives together with the Γ-ratio and
termwise facts used to prove the derivative bound, compare the HLS
eigenvalue ratios γ^λ for two values of λ, track the d → Q⁻ limit, and
check the duality identity γ^{Q-d} λ_j λ_k = λ_0². All of it is
floating-point evaluation, not interval arithmetic; each report carries its
slack so the distance from the noise floor is visible.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .reports import IneqReport, make_report
from .special_fn import DEFAULT_ACCURACY, AccuracySpec, digamma_diff, log_gamma_ratio
from .spectrum import (
    SphereGeometry,
    _check_d,
    _index,
    _log_lambda,
    conditional_lambda,
    hls_gamma,
    hls_gamma_table,
    lambda_j,
    lambda_table,
)

__all__ = [
    "CertGrid",
    "critical_exponent",
    "chebyshev_q",
    "spectral_ineq_sides",
    "certify_spectral_ineq",
    "certify_derivative_comparison",
    "certify_kernel_comparison",
    "certify_limit_dQ",
    "certify_duality_identity",
    "duality_residuals",
    "default_sweep",
]

EQUALITY_TOL = 1e-10
STRICT_MARGIN = 1e-12
DUALITY_TOL = 1e-11
# d closer than this to Q loses digits in Q - d
CANCELLATION_GAP = 1e-8


def critical_exponent(geom: SphereGeometry, d: float) -> float:
    return 2.0 * geom.Q / (geom.Q - d)


@dataclass(frozen=True)
class CertGrid:
    geom: SphereGeometry
    d: float
    q: float
    j_max: int = 30
    k_max: int = 30
    equality_tol: float = EQUALITY_TOL
    strict_margin: float = STRICT_MARGIN

    def __post_init__(self):
        _check_d(self.geom, self.d)
        qc = critical_exponent(self.geom, self.d)
        if not (2.0 < self.q < qc):
            raise ValueError(f"q must lie in (2, {qc}), got {self.q!r}")
        if self.j_max < 1 or self.k_max < 1:
            raise ValueError("j_max and k_max must be at least 1")
        if not (self.equality_tol > 0 and self.strict_margin > 0):
            raise ValueError("tolerances must be positive")

    @property
    def params(self) -> dict:
        return {"n": self.geom.n, "d": self.d, "q": self.q}


def chebyshev_q(geom: SphereGeometry, d: float, count: int = 5) -> list[float]:
    """Chebyshev points of (2, 2Q/(Q-d)); they cluster near both endpoints."""
    qc = critical_exponent(geom, d)
    return [
        2.0 + (qc - 2.0) * 0.5 * (1.0 - math.cos((2 * i - 1) * math.pi / (2 * count)))
        for i in range(1, count + 1)
    ]


def default_sweep(ns=(1, 2, 3), d_fractions=(0.125, 0.25, 0.5, 0.75, 0.875), q_count=5):
    """(n, d, q) triples: d = fraction·Q, q at Chebyshev points."""
    out = []
    for n in ns:
        geom = SphereGeometry(n)
        for frac in d_fractions:
            d = frac * geom.Q
            for q in chebyshev_q(geom, d, q_count):
                out.append((n, d, q))
    return out


def _exponents(grid: CertGrid):
    Q, q, d = grid.geom.Q, grid.q, grid.d
    qp = q / (q - 1.0)
    return Q / (2 * qp), Q / (2 * q), (Q + d) / 4, (Q - d) / 4


def _bracket_coefficient(grid: CertGrid) -> float:
    """B(d,q)·λ_0(d)², with B = 8(q-2)/(d(Q-d)) · Γ²((Q-d)/4+1)/Γ²((Q+d)/4)."""
    Q, d, q = grid.geom.Q, grid.d, grid.q
    log_b = math.log(8.0 * (q - 2.0) / (d * (Q - d))) + 2.0 * log_gamma_ratio(
        (Q - d) / 4 + 1, (Q + d) / 4
    )
    return math.exp(log_b + 2.0 * _log_lambda(grid.geom, d, 0))


def spectral_ineq_sides(grid: CertGrid, idx) -> tuple[float, float]:
    """Both sides of the bidegree inequality, evaluated in the log domain."""
    j, k = _index(idx)
    ap, a, _, _ = _exponents(grid)
    log_lhs = (
        log_gamma_ratio(j + ap, j + a) + log_gamma_ratio(k + ap, k + a)
        - 2.0 * log_gamma_ratio(ap, a)
    )
    geom, d = grid.geom, grid.d
    log_ratio = _log_lambda(geom, d, j) + _log_lambda(geom, d, k) - 2.0 * _log_lambda(geom, d, 0)
    # λ_jλ_k - λ_0² = λ_0² · expm1(log(λ_jλ_k/λ_0²)) keeps small brackets accurate
    rhs = 1.0 + _bracket_coefficient(grid) * math.expm1(log_ratio)
    return math.exp(log_lhs), rhs


def _cell_tolerance(grid, lhs, rhs):
    return grid.equality_tol * max(1.0, abs(lhs), abs(rhs))


def certify_spectral_ineq(grid: CertGrid, *, rhs_scale: float = 1.0) -> list[IneqReport]:
    """One report per (j, k) in the box; violations are returned, not raised.

    ``rhs_scale`` multiplies the right-hand side and exists only to exercise
    the failure path.
    """
    out = []
    for j in range(grid.j_max + 1):
        for k in range(grid.k_max + 1):
            lhs, rhs = spectral_ineq_sides(grid, (j, k))
            rhs *= rhs_scale
            out.append(
                make_report(
                    "spectral-ineq",
                    {**grid.params, "j": j, "k": k},
                    lhs, rhs, _cell_tolerance(grid, lhs, rhs),
                    strict_margin=grid.strict_margin,
                )
            )
    return out


def _log_G(x, j, k):
    # Γ(j+x)Γ(k+x)/Γ(x)²
    return log_gamma_ratio(j + x, x) + log_gamma_ratio(k + x, x)


def certify_derivative_comparison(
    grid: CertGrid, idx, acc: AccuracySpec = DEFAULT_ACCURACY, *, axis: str = "k"
) -> IneqReport:
    """Compare the ``axis``-derivatives of both sides at a cell with j + k ≥ 1.

    Each derivative is written as a Γ-ratio factor times a digamma series:

        ∂LHS = G(Q/2q') / H(Q/2q) · Σ_l (q-2) / ((l+k)² + Q(l+k)/2 + (Q/2)²/(qq'))
        ∂RHS = G((Q+d)/4) / H((Q-d)/4) · Σ_l (q-2) / ((l+k)² + Q(l+k)/2 + (Q-d)(Q+d)/16)

    with G(x) = Γ(j+x)Γ(k+x)/Γ(x)² and H(x) = G(x)/x. The report's parts
    check G(Q/2q') ≤ G((Q+d)/4), H((Q-d)/4) ≤ H(Q/2q) and the termwise
    bound at l = k = 0.
    """
    j, k = _index(idx)
    if j + k < 1:
        raise ValueError("the derivative comparison needs j + k >= 1")
    if axis == "j":
        j, k = k, j
    elif axis != "k":
        raise ValueError("axis must be 'j' or 'k'")
    Q, q, d = grid.geom.Q, grid.q, grid.d
    ap, a, bp, b = _exponents(grid)
    qp = q / (q - 1.0)

    G_lhs, G_rhs = math.exp(_log_G(ap, j, k)), math.exp(_log_G(bp, j, k))
    H_lhs = math.exp(_log_G(a, j, k)) / a
    H_rhs = math.exp(_log_G(b, j, k)) / b
    # Σ (q-2)/((k+l+x)(k+l+y)) = (q-2)/(y-x) · (ψ(k+y) - ψ(k+x))
    series_lhs = (q - 2.0) / (ap - a) * digamma_diff(k + ap, k + a, acc)
    series_rhs = (q - 2.0) / (bp - b) * digamma_diff(k + bp, k + b, acc)
    d_lhs = G_lhs / H_lhs * series_lhs
    d_rhs = G_rhs / H_rhs * series_rhs

    params = {**grid.params, "j": _index(idx).j, "k": _index(idx).k, "axis": axis}
    tol = lambda x, y: grid.equality_tol * max(1.0, abs(x), abs(y))  # noqa: E731
    parts = [
        make_report("gamma-ratio-upper", params, G_lhs, G_rhs, tol(G_lhs, G_rhs)),
        make_report("gamma-ratio-lower", params, H_rhs, H_lhs, tol(H_rhs, H_lhs)),
        make_report(
            "termwise-bound", params,
            (q - 2.0) / ((Q / 2) ** 2 / (q * qp)),
            (q - 2.0) / (((Q - d) / 4) * ((Q + d) / 4)),
            0.0,
        ),
    ]
    return make_report(
        "derivative-comparison", params, d_lhs, d_rhs, tol(d_lhs, d_rhs),
        parts=parts, strict_margin=grid.strict_margin,
    )


def certify_kernel_comparison(
    geom: SphereGeometry,
    lambda1: float,
    lambda2: float,
    idx,
    *,
    equality_tol: float = EQUALITY_TOL,
    strict_margin: float = STRICT_MARGIN,
) -> IneqReport:
    """γ_{jk}^{λ1} ≤ γ_{jk}^{λ2} for λ1 < λ2, with relative tolerance.

    A strict verdict whose slack is below ``strict_margin`` carries a
    near-equality diagnostic.
    """
    if not (0 < lambda1 < lambda2 < geom.Q):
        raise ValueError("need 0 < lambda1 < lambda2 < Q")
    j, k = _index(idx)
    lhs, rhs = hls_gamma(geom, lambda1, (j, k)), hls_gamma(geom, lambda2, (j, k))
    return make_report(
        "kernel-comparison",
        {"n": geom.n, "lambda1": lambda1, "lambda2": lambda2, "j": j, "k": k},
        lhs, rhs, equality_tol * max(abs(lhs), abs(rhs)),
        strict_margin=strict_margin,
    )


def _scaled_limit_value(geom, d, q, j):
    """B(d,q) λ_j(d) λ_0(d) = (q-2)(Q-d)/(2d) · ((Q+d)/4)_j / ((Q-d)/4)_j.

    For j ≥ 1 the factor (Q-d)/4 cancels against the first Pochhammer term,
    leaving 2(q-2)/d · Π_{i<j}((Q+d)/4 + i) / Π_{0<i<j}((Q-d)/4 + i), which
    is free of cancellation as d → Q.
    """
    Q = geom.Q
    if j == 0:
        return (q - 2.0) * (Q - d) / (2.0 * d)
    v = 2.0 * (q - 2.0) / d * ((Q + d) / 4)
    for i in range(1, j):
        v *= ((Q + d) / 4 + i) / ((Q - d) / 4 + i)
    return v


def certify_limit_dQ(geom: SphereGeometry, q: float, j: int, d_sequence) -> list[IneqReport]:
    """Distance of the scaled eigenvalue to (q-2)/(n+1)! · j(j+1)···(j+n) along d → Q.

    The distance is |value - target| / max(|target|, 1) (absolute for the
    j = 0 target 0). Each report asserts that the distance does not exceed
    the previous one; the first is compared against 1.
    """
    j = _index((j, 0)).j
    ds = [float(d) for d in d_sequence]
    if not ds:
        raise ValueError("empty d sequence")
    if any(b <= a for a, b in zip(ds, ds[1:])):
        raise ValueError("d sequence must be strictly increasing")
    Q = geom.Q
    target = (q - 2.0) / math.factorial(geom.n + 1) * conditional_lambda(geom, j)
    out = []
    prev = 1.0
    for d in ds:
        if not (0 < d < Q):
            raise ValueError(f"d must lie in (0, {Q})")
        diags = []
        if d > Q - CANCELLATION_GAP:
            warnings.warn(f"d={d!r} is within {CANCELLATION_GAP} of Q; Q-d has few digits",
                          RuntimeWarning, stacklevel=2)
            diags.append("cancellation: Q - d below 1e-8")
        value = _scaled_limit_value(geom, d, q, j)
        dist = abs(value - target) / max(abs(target), 1.0)
        out.append(
            make_report(
                "limit-dQ",
                {"n": geom.n, "q": q, "j": j, "d": d, "value": value, "target": target},
                dist, prev, 0.0, diagnostics=diags,
            )
        )
        prev = dist
    return out


def certify_duality_identity(geom: SphereGeometry, d: float, idx,
                             *, tol: float = DUALITY_TOL) -> IneqReport:
    """γ_{jk}^{Q-d} λ_j(d) λ_k(d) = λ_0(d)², to ``tol`` relative."""
    j, k = _index(idx)
    lhs = hls_gamma(geom, geom.Q - d, (j, k)) * lambda_j(geom, d, j) * lambda_j(geom, d, k)
    rhs = lambda_j(geom, d, 0) ** 2
    return make_report(
        "duality-identity", {"n": geom.n, "d": d, "j": j, "k": k},
        lhs, rhs, tol * abs(rhs),
    )


def duality_residuals(geom: SphereGeometry, d: float, jmax: int, kmax: int):
    """Relative residuals |γ_{jk}^{Q-d} λ_j λ_k - λ_0²| / λ_0² on a whole box.

    Same identity as :func:`certify_duality_identity`, evaluated from the
    1-D factor tables so that large boxes stay cheap.
    """
    lam = lambda_table(geom, d, max(jmax, kmax))
    rhs = lam[0] ** 2
    lhs = hls_gamma_table(geom, geom.Q - d, jmax, kmax) * np.outer(lam[: jmax + 1], lam[: kmax + 1])
    return abs(lhs - rhs) / rhs
