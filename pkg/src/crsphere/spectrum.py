"""Closed-form spectral data of zonal operators on S^(2n+1).

Everything is diagonal on the bidegree spaces H_{jk}; the functions here
return the eigenvalue on H_{jk} for the intertwining operators A_d, the
conditional intertwinor A'_Q, and the kernels |1 - ξ·η̄|^(-2α) and
|ξ·η̄|² |1 - ξ·η̄|^(-2α).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .special_fn import gamma_ratio, log_gamma_ratio, poch_ratio

__all__ = [
    "SphereGeometry",
    "SpectralIndex",
    "Intertwining",
    "ConditionalQ",
    "HLSKernel",
    "WeightedHLSKernel",
    "OperatorKind",
    "lambda_j",
    "conditional_lambda",
    "intertwine_eig",
    "hls_gamma",
    "hls_constant",
    "lambda_table",
    "hls_gamma_table",
    "fh_eigenvalue_closed",
    "fh_eigenvalue_weighted",
    "subcritical_constant",
]

# half-width of the removable-singularity branches in the weighted formula
LIMIT_BRANCH_WIDTH = 1e-9
# closest approach of d to Q accepted by lambda_j
D_MAX_GAP = 1e-8


@dataclass(frozen=True)
class SphereGeometry:
    """The sphere S^(2n+1) in C^(n+1)."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def Q(self) -> int:
        return 2 * self.n + 2

    @property
    def dim(self) -> int:
        """Number of complex coordinates, n + 1."""
        return self.n + 1

    @property
    def surface_area(self) -> float:
        return 2.0 * math.pi ** (self.n + 1) / math.factorial(self.n)


class SpectralIndex(NamedTuple):
    j: int
    k: int


def _index(idx) -> SpectralIndex:
    j, k = idx
    if int(j) != j or int(k) != k or j < 0 or k < 0:
        raise ValueError(f"spectral index must be a pair of non-negative integers, got {idx!r}")
    return SpectralIndex(int(j), int(k))


@dataclass(frozen=True)
class Intertwining:
    d: float


@dataclass(frozen=True)
class ConditionalQ:
    pass


@dataclass(frozen=True)
class HLSKernel:
    lam: float


@dataclass(frozen=True)
class WeightedHLSKernel:
    alpha: float


OperatorKind = Union[Intertwining, ConditionalQ, HLSKernel, WeightedHLSKernel]


def _check_d(geom: SphereGeometry, d: float):
    if not (0 < d < geom.Q):
        raise ValueError(f"d must lie in (0, Q={geom.Q}), got {d!r}")
    if d > geom.Q - D_MAX_GAP:
        raise ValueError(
            f"d={d!r} is closer than {D_MAX_GAP} to Q; use conditional_lambda for the endpoint"
        )


def _check_lambda(geom: SphereGeometry, lam: float):
    if not (0 < lam < geom.Q):
        raise ValueError(f"lambda must lie in (0, Q={geom.Q}), got {lam!r}")


def _check_alpha(geom: SphereGeometry, alpha: float):
    if not (-1 < alpha < (geom.n + 1) / 2):
        raise ValueError(
            f"alpha must lie in (-1, {(geom.n + 1) / 2}), got {alpha!r}"
        )


def lambda_j(geom: SphereGeometry, d: float, j: int) -> float:
    """λ_j(d) = Γ((Q+d)/4 + j) / Γ((Q-d)/4 + j)."""
    _check_d(geom, d)
    Q = geom.Q
    return gamma_ratio((Q + d) / 4 + j, (Q - d) / 4 + j)


def _log_lambda(geom, d, j):
    Q = geom.Q
    return log_gamma_ratio((Q + d) / 4 + j, (Q - d) / 4 + j)


def conditional_lambda(geom: SphereGeometry, j: int) -> float:
    """j (j+1) ... (j+n), the eigenvalue of A'_Q on H_{j0} and H_{0j}."""
    if int(j) != j or j < 0:
        raise ValueError("j must be a non-negative integer")
    return float(math.prod(range(int(j), int(j) + geom.n + 1)))


def hls_gamma(geom: SphereGeometry, lam: float, idx) -> float:
    """Normalized eigenvalue of the kernel |1 - ξ·η̄|^(-λ/2) on H_{jk}.

    Equals 1 on constants and lies in (0, 1) for every other bidegree.
    """
    _check_lambda(geom, lam)
    j, k = _index(idx)
    a = lam / 4
    b = (2 * geom.Q - lam) / 4
    return poch_ratio(a, b, j) * poch_ratio(a, b, k)


def lambda_table(geom: SphereGeometry, d: float, jmax: int) -> np.ndarray:
    """λ_j(d) for j = 0..jmax as an array."""
    return np.array([lambda_j(geom, d, j) for j in range(int(jmax) + 1)])


def hls_gamma_table(geom: SphereGeometry, lam: float, jmax: int, kmax: int) -> np.ndarray:
    """γ_{jk}^λ on the box [0, jmax] × [0, kmax].

    γ_{jk} factors as a j-part times a k-part, so only the 1-D factors are
    evaluated; entry [j, k] equals ``hls_gamma(geom, lam, (j, k))``.
    """
    _check_lambda(geom, lam)
    a = lam / 4
    b = (2 * geom.Q - lam) / 4
    f = np.array([poch_ratio(a, b, i) for i in range(max(int(jmax), int(kmax)) + 1)])
    return np.outer(f[: int(jmax) + 1], f[: int(kmax) + 1])


def hls_constant(geom: SphereGeometry, lam: float) -> float:
    """C_{λ,n} = ∫ |1 - ξ·η̄|^(-λ/2) dη = Γ(Q/2) Γ((Q-λ)/2) / Γ²((2Q-λ)/4)."""
    _check_lambda(geom, lam)
    Q = geom.Q
    b = (2 * Q - lam) / 4
    return math.exp(log_gamma_ratio(Q / 2, b) + log_gamma_ratio((Q - lam) / 2, b))


def _power_prefactor(geom: SphereGeometry, alpha: float) -> float:
    # 2π^{n+1}/|S| · Γ(n+1-2α)/Γ²(n+1-α), the (0,0) eigenvalue
    n = geom.n
    c = n + 1 - alpha
    return math.factorial(n) * math.exp(
        log_gamma_ratio(n + 1 - 2 * alpha, c) - math.lgamma(c)
    )


def fh_eigenvalue_closed(geom: SphereGeometry, alpha: float, idx) -> float:
    """Eigenvalue of the kernel |1 - ξ·η̄|^(-2α) on H_{jk}.

    Written with Pochhammer ratios Γ(j+α)/Γ(α) = (α)_j so that α = 0 (and
    negative α) need no special handling: at α = 0 the constant kernel
    gives 1 on (0,0) and 0 elsewhere.
    """
    _check_alpha(geom, alpha)
    j, k = _index(idx)
    c = geom.n + 1 - alpha
    return _power_prefactor(geom, alpha) * poch_ratio(alpha, c, j) * poch_ratio(alpha, c, k)


def _shifted_poch(alpha: float, j: int) -> float:
    """(α)_j / (α + j - 1), i.e. (α)_{j-1} for j ≥ 1 and 1/(α-1) for j = 0."""
    if j == 0:
        return 1.0 / (alpha - 1.0)
    p = 1.0
    for i in range(j - 1):
        p *= alpha + i
    return p


def _weighted_correction_product(geom, alpha, j, k):
    """(α-1)(n+1-2α)·[2jk + n(j+k-1+α)] · φ_j φ_k, with the α = 1 limit."""
    n = geom.n
    if abs(alpha - 1.0) < LIMIT_BRANCH_WIDTH:
        # removable singularity: (α-1) cancels 1/(α-1) factors from j=0 or k=0
        if j == 0 and k == 0:
            # numerator n(α-1) supplies the second cancelling factor
            return (n + 1 - 2.0) * n
        if j == 0:
            return (n + 1 - 2.0) * (2 * j * k + n * k) * _shifted_poch(1.0, k)
        if k == 0:
            return (n + 1 - 2.0) * (2 * j * k + n * j) * _shifted_poch(1.0, j)
        return 0.0
    num = 2 * j * k + n * (j + k - 1 + alpha)
    return (
        (alpha - 1.0) * (n + 1 - 2 * alpha) * num
        * _shifted_poch(alpha, j) * _shifted_poch(alpha, k)
    )


def fh_eigenvalue_weighted(geom: SphereGeometry, alpha: float, idx) -> float:
    """Eigenvalue of the kernel |ξ·η̄|² |1 - ξ·η̄|^(-2α) on H_{jk}.

    E_{jk} · (1 - (α-1)(n+1-2α)(2jk + n(j+k-1+α)) /
    ((j-1+α)(j+n+1-α)(k-1+α)(k+n+1-α))), rearranged so the factors that
    vanish at α = 0 and α = 1 cancel analytically.
    """
    _check_alpha(geom, alpha)
    j, k = _index(idx)
    c = geom.n + 1 - alpha
    pref = _power_prefactor(geom, alpha)
    base = pref * poch_ratio(alpha, c, j) * poch_ratio(alpha, c, k)
    # (n+1-α)_{j+1} = (n+1-α)_j (j+n+1-α)
    den = math.exp(
        log_gamma_ratio(c + j + 1, c) + log_gamma_ratio(c + k + 1, c)
    )
    corr = pref * _weighted_correction_product(geom, alpha, j, k) / den
    return base - corr


def intertwine_eig(geom: SphereGeometry, kind: OperatorKind, idx) -> float:
    """Eigenvalue of the operator ``kind`` on H_{jk}."""
    j, k = _index(idx)
    if isinstance(kind, Intertwining):
        _check_d(geom, kind.d)
        return math.exp(_log_lambda(geom, kind.d, j) + _log_lambda(geom, kind.d, k))
    if isinstance(kind, ConditionalQ):
        if j > 0 and k > 0:
            raise ValueError(
                "the conditional intertwinor is defined only on bidegrees (j,0) and (0,k)"
            )
        return conditional_lambda(geom, max(j, k))
    if isinstance(kind, HLSKernel):
        return fh_eigenvalue_closed(geom, kind.lam / 4, (j, k))
    if isinstance(kind, WeightedHLSKernel):
        return fh_eigenvalue_weighted(geom, kind.alpha, (j, k))
    raise TypeError(f"unknown operator kind {kind!r}")


def subcritical_constant(geom: SphereGeometry, d: float, q: float) -> float:
    """8(q-2)/(d(Q-d)) · Γ²((Q-d)/4 + 1) / Γ²((Q+d)/4)."""
    _check_d(geom, d)
    Q = geom.Q
    return 8.0 * (q - 2.0) / (d * (Q - d)) * math.exp(
        2.0 * log_gamma_ratio((Q - d) / 4 + 1, (Q + d) / 4)
    )
