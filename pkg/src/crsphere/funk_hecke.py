"""Numerical Funk-Hecke eigenvalues of zonal kernels K(ξ·η̄).

On H_{jk} the kernel acts by the scalar

    π^n m! / (|S^{2n+1}| 2^{n+s/2} (m+n-1)!)
      ∫_{-1}^{1} (1-t)^{n-1} (1+t)^{s/2} P_m^{(n-1,s)}(t)
      ∫_{-π}^{π} K(e^{-iφ} sqrt((1+t)/2)) e^{i(j-k)φ} dφ dt

with m = min(j,k), s = |j-k| and standard Jacobi normalization. This is
evaluated independently of the closed forms in :mod:`crsphere.spectrum`
and serves as their oracle.

Smooth kernels use Gauss-Legendre in t and the trapezoid rule in φ. The
power kernels |1-z|^(-2α) with α > 0 are singular at (t, φ) = (1, 0) in
both variables, so they use tanh-sinh (double exponential) rules in t on
[-1, 1] and in φ on [0, π] (the integrand is even in φ); the quantities
that vanish at the singularity are formed without cancellation.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from .special_fn import jacobi_poly, log_gamma
from .spectrum import SphereGeometry, _index, fh_eigenvalue_closed, fh_eigenvalue_weighted

__all__ = [
    "PowerKernel",
    "WeightedPowerKernel",
    "ConstantKernel",
    "Custom",
    "KernelSpec",
    "QuadratureSpec",
    "QuadratureConvergenceWarning",
    "fh_eigenvalue_quadrature",
    "closed_form",
    "compare_closed_form",
]

# relative change under node doubling above which a warning is raised
CONVERGENCE_TOL = 1e-6
ZERO_FLOOR = 1e-8
# half-width of the tanh-sinh parameter interval; nodes beyond it are below
# double-precision resolution of the endpoints
DE_HALF_WIDTH = 4.0


@dataclass(frozen=True)
class PowerKernel:
    """|1 - z|^(-2α)."""

    alpha: float


@dataclass(frozen=True)
class WeightedPowerKernel:
    """|z|² |1 - z|^(-2α)."""

    alpha: float


@dataclass(frozen=True)
class ConstantKernel:
    """K ≡ 1."""


@dataclass(frozen=True, eq=False)
class Custom:
    """Any kernel given as a vectorized function of z on the closed unit disc."""

    func: Callable[[np.ndarray], np.ndarray]


KernelSpec = Union[PowerKernel, WeightedPowerKernel, ConstantKernel, Custom]


class QuadratureConvergenceWarning(RuntimeWarning):
    """Doubling the nodes moved the result by more than the tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    nodes_t: int = 256
    nodes_phi: int = 512

    def __post_init__(self):
        if int(self.nodes_t) < 8:
            raise ValueError("nodes_t must be at least 8")
        if int(self.nodes_phi) < 16:
            raise ValueError("nodes_phi must be at least 16")

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(2 * self.nodes_t, 2 * self.nodes_phi)


def _is_singular(kernel) -> bool:
    return isinstance(kernel, (PowerKernel, WeightedPowerKernel)) and kernel.alpha > 0


def _check_kernel(geom: SphereGeometry, kernel):
    if isinstance(kernel, (PowerKernel, WeightedPowerKernel)):
        if not kernel.alpha < (geom.n + 1) / 2:
            raise ValueError(
                f"kernel is not integrable: alpha must be below {(geom.n + 1) / 2}"
            )
    elif not isinstance(kernel, (ConstantKernel, Custom)):
        raise TypeError(f"unknown kernel {kernel!r}")


@lru_cache(maxsize=32)
def _de_rule(N: int):
    """tanh-sinh nodes on [-1, 1]: (x, 1-x, 1+x, weights)."""
    tau = np.linspace(-DE_HALF_WIDTH, DE_HALF_WIDTH, N)
    h = tau[1] - tau[0]
    u = 0.5 * math.pi * np.sinh(tau)
    x = np.tanh(u)
    one_minus = 2.0 / (1.0 + np.exp(2.0 * u))
    one_plus = 2.0 / (1.0 + np.exp(-2.0 * u))
    w = h * 0.5 * math.pi * np.cosh(tau) / np.cosh(u) ** 2
    return x, one_minus, one_plus, w


@lru_cache(maxsize=32)
def _gl_rule(N: int):
    x, w = np.polynomial.legendre.leggauss(N)
    return x, 1.0 - x, 1.0 + x, w


def _t_rule(N, singular):
    return _de_rule(N) if singular else _gl_rule(N)


def _phi_rule(N, singular):
    """Nodes and weights for ∫_0^π (singular) or the full period [-π, π)."""
    if singular:
        _, _, opx, wx = _de_rule(N)
        return 0.5 * math.pi * opx, 0.5 * math.pi * wx
    phi = -math.pi + 2.0 * math.pi * np.arange(N) / N
    return phi, np.full(N, 2.0 * math.pi / N)


def _radial_kernel(kernel, r2, mod2):
    """K as a function of |z|² and |1-z|² for the built-in kernels."""
    if isinstance(kernel, ConstantKernel):
        return np.ones(np.broadcast(r2, mod2).shape)
    k = mod2 ** (-kernel.alpha)
    if isinstance(kernel, WeightedPowerKernel):
        k = k * r2
    return k


@lru_cache(maxsize=64)
def _inner_integrals(kernel, s: int, sign: int, nodes_t: int, nodes_phi: int):
    """∫ K(e^{-iφ} r(t)) e^{i·sign·s·φ} dφ at every t node."""
    singular = _is_singular(kernel)
    _, omt, opt, _ = _t_rule(nodes_t, singular)
    phi, wphi = _phi_rule(nodes_phi, singular)
    r2 = 0.5 * opt
    r = np.sqrt(r2)
    R = r[:, None]
    PH = phi[None, :]
    if isinstance(kernel, Custom):
        z = R * np.exp(-1j * PH)
        vals = np.asarray(kernel.func(z), dtype=complex) * np.exp(1j * sign * s * PH)
        return vals @ wphi
    # 1 - r without cancellation near t = 1
    omr = (0.5 * omt) / (1.0 + r)
    mod2 = omr[:, None] ** 2 + 4.0 * R * np.sin(0.5 * PH) ** 2
    vals = _radial_kernel(kernel, r2[:, None], mod2) * np.cos(s * PH)
    inner = vals @ wphi
    # the DE rule covers [0, π]; the integrand is even in φ
    return 2.0 * inner if singular else inner


def _prefactor(geom, m, s):
    n = geom.n
    log_p = (
        n * math.log(math.pi)
        + log_gamma(m + 1)
        - log_gamma(m + n)
        - (n + 0.5 * s) * math.log(2.0)
    )
    return math.exp(log_p) / geom.surface_area


def _quadrature(geom, kernel, j, k, quad):
    n = geom.n
    m, s = min(j, k), abs(j - k)
    singular = _is_singular(kernel)
    t, omt, opt, wt = _t_rule(quad.nodes_t, singular)
    sign = 1 if j >= k else -1
    inner = _inner_integrals(kernel, s, sign, quad.nodes_t, quad.nodes_phi)
    weight = omt ** (n - 1) * opt ** (0.5 * s) * jacobi_poly(m, n - 1, s, t)
    val = _prefactor(geom, m, s) * np.dot(wt * weight, inner)
    return complex(val) if isinstance(kernel, Custom) else float(val)


def fh_eigenvalue_quadrature(
    geom: SphereGeometry,
    kernel: KernelSpec,
    idx,
    quad: QuadratureSpec = QuadratureSpec(),
    *,
    check_convergence: bool = True,
):
    """Eigenvalue of the zonal kernel on H_{jk} by double quadrature.

    With ``check_convergence`` the computation is repeated with doubled
    nodes and a QuadratureConvergenceWarning is issued if the two results
    differ by more than 1e-6 relative.
    """
    _check_kernel(geom, kernel)
    j, k = _index(idx)
    val = _quadrature(geom, kernel, j, k, quad)
    if check_convergence:
        fine = _quadrature(geom, kernel, j, k, quad.doubled())
        # eigenvalues that vanish exactly are compared on an absolute scale
        scale = max(abs(fine), ZERO_FLOOR)
        if abs(fine - val) > CONVERGENCE_TOL * scale:
            warnings.warn(
                f"quadrature for {kernel} at {(j, k)} changed by "
                f"{abs(fine - val) / scale:.2e} relative under node doubling",
                QuadratureConvergenceWarning,
                stacklevel=2,
            )
    return val


def closed_form(geom: SphereGeometry, kernel: KernelSpec, idx) -> float:
    """Closed-form eigenvalue for the built-in kernels."""
    j, k = _index(idx)
    if isinstance(kernel, PowerKernel):
        return fh_eigenvalue_closed(geom, kernel.alpha, (j, k))
    if isinstance(kernel, WeightedPowerKernel):
        return fh_eigenvalue_weighted(geom, kernel.alpha, (j, k))
    if isinstance(kernel, ConstantKernel):
        return 1.0 if j == k == 0 else 0.0
    raise TypeError("no closed form for custom kernels")


def compare_closed_form(
    geom: SphereGeometry,
    kernel: KernelSpec,
    jmax: int,
    kmax: int,
    quad: QuadratureSpec = QuadratureSpec(),
    *,
    check_convergence: bool = False,
):
    """Rows (j, k, quadrature, closed form, difference) over the index box.

    The difference is relative to the closed form, or absolute where the
    closed form vanishes (constant kernel off (0,0)).
    """
    rows = []
    for j in range(jmax + 1):
        for k in range(kmax + 1):
            qv = fh_eigenvalue_quadrature(geom, kernel, (j, k), quad,
                                          check_convergence=check_convergence)
            cv = closed_form(geom, kernel, (j, k))
            diff = abs(qv - cv) / abs(cv) if cv != 0 else abs(qv)
            rows.append((j, k, qv, cv, diff))
    return rows
