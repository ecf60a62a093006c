"""Concrete functions on S^(2n+1) and Monte Carlo integration over it.

Functions are finite sums of the monomials ξ_a^j conj(ξ_b)^k (a ≠ b when
both exponents are positive), which are exact elements of H_{jk}. Norms and
quadratic forms of diagonal operators are exact Parseval sums; L^q norms,
kernel integrals and exponential integrals are Monte Carlo estimates.

Sampling uses Philox (counter-based) generators keyed by (seed, purpose,
stream). Each stream is processed in fixed-size chunks and the per-stream
moment accumulators are merged in stream order, so results do not depend on
thread scheduling.
"""
from __future__ import annotations

import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .spectrum import ConditionalQ, OperatorKind, SphereGeometry, hls_constant, intertwine_eig

__all__ = [
    "SampleSpec",
    "McEstimate",
    "HarmonicTerm",
    "HarmonicExpansion",
    "NonOrthogonalTermsError",
    "sphere_point",
    "sample_uniform",
    "moment_exact",
    "evaluate",
    "l2_norm_exact",
    "lq_norm_mc",
    "quadratic_form",
    "kernel_apply_mc",
    "hls_double_integral_mc",
    "exp_integral_mc",
    "mc_threads",
]

CHUNK = 1 << 15

# generator purposes: independent families of streams for the same seed
_UNIFORM, _PAIRS, _KERNEL, _PROBE = 0, 1, 2, 3

# share of proposal draws taken from the uniform law of ξ·η̄
DEFENSIVE_EPS = 0.2
# phase rotations of the complement direction averaged per kernel sample
DEFAULT_PHASES = 4


class NonOrthogonalTermsError(ValueError):
    """Two terms of an expansion are not guaranteed to be orthogonal."""


@dataclass(frozen=True)
class SampleSpec:
    seed: int = 0
    count: int = 100_000
    streams: int = 4

    def __post_init__(self):
        if int(self.count) < 1:
            raise ValueError("count must be at least 1")
        if int(self.streams) < 1:
            raise ValueError("streams must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "count", int(self.count))
        object.__setattr__(self, "streams", int(self.streams))
        object.__setattr__(self, "seed", int(self.seed))

    def stream_counts(self) -> list[int]:
        base, extra = divmod(self.count, self.streams)
        return [base + (1 if s < extra else 0) for s in range(self.streams)]


@dataclass(frozen=True)
class McEstimate:
    value: complex | float
    stderr: float
    count: int


# -- functions ---------------------------------------------------------------


@dataclass(frozen=True)
class HarmonicTerm:
    """coefficient · ξ_{axis_z}^j · conj(ξ_{axis_zbar})^k, axes 1-based."""

    j: int
    k: int
    axis_z: int = 1
    axis_zbar: int = 2
    coefficient: complex = 1.0

    def __post_init__(self):
        j, k = int(self.j), int(self.k)
        if j != self.j or k != self.k or j < 0 or k < 0:
            raise ValueError("degrees must be non-negative integers")
        az, ab = int(self.axis_z), int(self.axis_zbar)
        if az < 1 or ab < 1:
            raise ValueError("axes are 1-based")
        # unused axes are canonicalized so equal monomials get equal keys
        if j == 0 and k == 0:
            az = ab = 1
        elif k == 0:
            ab = az
        elif j == 0:
            az = ab
        elif az == ab:
            raise ValueError(
                "ξ_a^j conj(ξ_a)^k with j, k > 0 is not harmonic; use distinct axes"
            )
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "axis_z", az)
        object.__setattr__(self, "axis_zbar", ab)
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @property
    def key(self):
        return (self.j, self.k, self.axis_z, self.axis_zbar)


def _parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "")
    if t.endswith("i"):
        t = t[:-1] + "j"
    return complex(t)


def _format_complex(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    return f"{c.real!r}{c.imag:+.17g}i"


_TERM_SPLIT = re.compile(r"\+(?=(?:const|mono):)")


@dataclass(frozen=True)
class HarmonicExpansion:
    """A finite sum of HarmonicTerms with distinct keys."""

    terms: tuple[HarmonicTerm, ...] = ()

    def __post_init__(self):
        terms = tuple(self.terms)
        seen = set()
        for t in terms:
            if t.key in seen:
                raise NonOrthogonalTermsError(
                    f"duplicate monomial {t.key}; merge the coefficients instead"
                )
            seen.add(t.key)
        object.__setattr__(self, "terms", terms)

    @classmethod
    def constant(cls, c: complex) -> "HarmonicExpansion":
        return cls((HarmonicTerm(0, 0, coefficient=c),))

    @classmethod
    def parse(cls, text: str) -> "HarmonicExpansion":
        """Parse ``const:<c>`` and ``mono:<coef>,<j>,<k>,<axis_z>,<axis_zbar>`` joined by ``+``."""
        terms = []
        for part in _TERM_SPLIT.split(text.strip()):
            kind, _, body = part.partition(":")
            kind = kind.strip()
            try:
                if kind == "const":
                    terms.append(HarmonicTerm(0, 0, coefficient=_parse_complex(body)))
                elif kind == "mono":
                    fields = body.split(",")
                    if len(fields) != 5:
                        raise ValueError("mono needs 5 fields")
                    c = _parse_complex(fields[0])
                    j, k, az, ab = (int(x) for x in fields[1:])
                    terms.append(HarmonicTerm(j, k, az, ab, c))
                else:
                    raise ValueError(f"unknown term kind {kind!r}")
            except ValueError as exc:
                raise ValueError(f"malformed function term {part!r}: {exc}") from None
        return cls(tuple(terms))

    def __str__(self):
        parts = []
        for t in self.terms:
            if t.j == 0 and t.k == 0:
                parts.append(f"const:{_format_complex(t.coefficient)}")
            else:
                parts.append(
                    f"mono:{_format_complex(t.coefficient)},{t.j},{t.k},{t.axis_z},{t.axis_zbar}"
                )
        return "+".join(parts) or "const:0"

    @property
    def mean(self) -> complex:
        """∫ f dξ: only the constant term survives."""
        return sum((t.coefficient for t in self.terms if t.j == 0 and t.k == 0), 0j)

    def check_geometry(self, geom: SphereGeometry):
        for t in self.terms:
            if max(t.axis_z, t.axis_zbar) > geom.dim:
                raise ValueError(f"term {t.key} uses an axis beyond n+1={geom.dim}")

    def values(self, pts):
        """Evaluate at an (N, n+1) array of points."""
        pts = np.ascontiguousarray(pts, dtype=complex)
        if not self.terms:
            return np.zeros(pts.shape[0], dtype=complex)
        coef = np.array([t.coefficient for t in self.terms], dtype=complex)
        jz = np.array([t.j for t in self.terms], dtype=np.int_)
        kz = np.array([t.k for t in self.terms], dtype=np.int_)
        az = np.array([t.axis_z - 1 for t in self.terms], dtype=np.int_)
        ab = np.array([t.axis_zbar - 1 for t in self.terms], dtype=np.int_)
        return kernels.eval_monomials(pts, coef, jz, kz, az, ab)

    def is_real(self, geom: SphereGeometry, probes: int = 16) -> bool:
        """Numerical realness test at ``probes`` fixed random points."""
        pts = sample_uniform(geom, SampleSpec(seed=0, count=probes, streams=1), _purpose=_PROBE)
        v = self.values(pts)
        return bool(np.max(np.abs(v.imag)) < 1e-12 * (1.0 + np.max(np.abs(v))))


def _values(f, pts) -> np.ndarray:
    if hasattr(f, "values"):
        return f.values(pts)
    return np.asarray(f(pts))


def _known_mean(f):
    return f.mean if isinstance(f, HarmonicExpansion) else None


def sphere_point(coords) -> np.ndarray:
    """Validate a point of the sphere (|ξ| = 1 within 1e-12)."""
    p = np.asarray(coords, dtype=complex).ravel()
    if abs(np.vdot(p, p).real - 1.0) > 1e-12:
        raise ValueError("point is not on the unit sphere")
    return p


def evaluate(f, p) -> complex:
    """f(p) at a single point."""
    return complex(_values(f, np.asarray(p, dtype=complex).reshape(1, -1))[0])


# -- exact integrals ---------------------------------------------------------


def moment_exact(geom: SphereGeometry, a: int, b: int) -> float:
    """∫ |ξ_1|^(2a) |ξ_2|^(2b) dξ = a! b! n! / (n+a+b)!."""
    if a < 0 or b < 0:
        raise ValueError("moment orders must be non-negative")
    n = geom.n
    return math.factorial(a) * math.factorial(b) * math.factorial(n) / math.factorial(n + a + b)


def _parseval_terms(geom, f: HarmonicExpansion):
    f.check_geometry(geom)
    # distinct canonical keys have distinct phase signatures j·e_a - k·e_b,
    # so the U(1)^(n+1) torus kills every cross term
    return [(t, abs(t.coefficient) ** 2 * moment_exact(geom, t.j, t.k)) for t in f.terms]


def l2_norm_exact(geom: SphereGeometry, f: HarmonicExpansion) -> float:
    return math.sqrt(sum(w for _, w in _parseval_terms(geom, f)))


def quadratic_form(geom: SphereGeometry, f: HarmonicExpansion, kind: OperatorKind) -> float:
    """∫ conj(f) A f dξ for an operator diagonal on the H_{jk}."""
    total = 0.0
    for t, w in _parseval_terms(geom, f):
        if isinstance(kind, ConditionalQ) and t.j > 0 and t.k > 0:
            raise ValueError("conditional intertwinor applied to a term outside (j,0)/(0,k)")
        total += intertwine_eig(geom, kind, (t.j, t.k)) * w
    return total


# -- Monte Carlo machinery ---------------------------------------------------


def mc_threads() -> int:
    try:
        return max(1, int(os.environ.get("CRS_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


def _generator(seed: int, purpose: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(purpose, stream))
    return np.random.Generator(np.random.Philox(ss))


class _Moments:
    """Running mean and co-moment matrix (Chan et al. pairwise merge)."""

    __slots__ = ("n", "mean", "comoment")

    def __init__(self, width):
        self.n = 0
        self.mean = np.zeros(width)
        self.comoment = np.zeros((width, width))

    def add_block(self, x):
        x = np.asarray(x, dtype=float)
        other = _Moments(x.shape[1])
        other.n = x.shape[0]
        other.mean = x.mean(axis=0)
        dx = x - other.mean
        other.comoment = dx.T @ dx
        self.merge(other)

    def merge(self, other):
        if other.n == 0:
            return
        if self.n == 0:
            self.n, self.mean, self.comoment = other.n, other.mean.copy(), other.comoment.copy()
            return
        n = self.n + other.n
        delta = other.mean - self.mean
        self.comoment = self.comoment + other.comoment + np.outer(delta, delta) * (self.n * other.n / n)
        self.mean = self.mean + delta * (other.n / n)
        self.n = n

    def covariance(self):
        if self.n < 2:
            return np.zeros_like(self.comoment)
        return self.comoment / (self.n - 1)


def _run_streams(spec: SampleSpec, purpose: int, width: int, chunk_fn) -> _Moments:
    """Apply ``chunk_fn(rng, size) -> (size, width)`` over all streams and merge in order."""

    def one_stream(args):
        stream, count = args
        rng = _generator(spec.seed, purpose, stream)
        acc = _Moments(width)
        done = 0
        while done < count:
            size = min(CHUNK, count - done)
            acc.add_block(chunk_fn(rng, size))
            done += size
        return acc

    jobs = list(enumerate(spec.stream_counts()))
    workers = min(mc_threads(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one_stream, jobs))
    else:
        parts = [one_stream(j) for j in jobs]
    total = _Moments(width)
    for part in parts:
        total.merge(part)
    return total


def _uniform_chunk(rng, size, m):
    return kernels.gaussian_to_sphere(rng.standard_normal((size, m, 2)))


def sample_uniform(geom: SphereGeometry, spec: SampleSpec, *, _purpose=_UNIFORM) -> np.ndarray:
    """spec.count i.i.d. uniform points as an (N, n+1) complex array, streams concatenated."""
    out = []
    for stream, count in enumerate(spec.stream_counts()):
        rng = _generator(spec.seed, _purpose, stream)
        done = 0
        while done < count:
            size = min(CHUNK, count - done)
            out.append(_uniform_chunk(rng, size, geom.dim))
            done += size
    return np.concatenate(out, axis=0)


def _uniform_moments(geom, spec, columns: Callable[[np.ndarray], np.ndarray], width):
    m = geom.dim
    return _run_streams(
        spec, _UNIFORM, width, lambda rng, size: columns(_uniform_chunk(rng, size, m))
    )


def _delta(mom: _Moments, value: float, grad) -> float:
    g = np.asarray(grad, dtype=float)
    var = float(g @ mom.covariance() @ g)
    return math.sqrt(max(var, 0.0) / mom.n)


def lq_norm_mc(geom: SphereGeometry, f, q: float, spec: SampleSpec) -> McEstimate:
    """(∫ |f|^q dξ)^(1/q) with a delta-method standard error."""
    if not q >= 1:
        raise ValueError("q must be at least 1")
    mom = _uniform_moments(geom, spec, lambda pts: (np.abs(_values(f, pts)) ** q)[:, None], 1)
    m = mom.mean[0]
    if m <= 0:
        return McEstimate(0.0, 0.0, mom.n)
    value = m ** (1.0 / q)
    return McEstimate(value, _delta(mom, value, [value / (q * m)]), mom.n)


def exp_integral_mc(geom: SphereGeometry, f, spec: SampleSpec) -> McEstimate:
    """∫ e^f dξ for real-valued f."""
    mom = _uniform_moments(geom, spec, lambda pts: np.exp(_values(f, pts).real)[:, None], 1)
    return McEstimate(float(mom.mean[0]), _delta(mom, 0.0, [1.0]), mom.n)


def onofri_terms_mc(geom: SphereGeometry, f, spec: SampleSpec) -> McEstimate:
    """∫ f dξ − log ∫ e^f dξ from one set of samples (errors are correlated)."""

    def cols(pts):
        v = _values(f, pts).real
        return np.stack([v, np.exp(v)], axis=1)

    mom = _uniform_moments(geom, spec, cols, 2)
    m1, m2 = mom.mean
    value = m1 - math.log(m2)
    return McEstimate(value, _delta(mom, value, [1.0, -1.0 / m2]), mom.n)


# -- zonal kernel integrals ----------------------------------------------------


def _check_lambda(geom, lam):
    if not (0 < lam < geom.Q):
        raise ValueError(f"lambda must lie in (0, Q={geom.Q}), got {lam!r}")


def _proposal_exponent(geom, lam):
    # makes K·p/h bounded near w = 1 while keeping the second moment finite
    return max(0.0, lam / 2 - geom.n + 1)


def _kernel_side(geom, lam, xi, rng, g, phases):
    """Sample w, lift to η around each ξ, return (weight, base, phase-averaged g(η))."""
    size, m = xi.shape
    u = rng.random((size, 5))
    z = rng.standard_normal((size, m, 2))
    w, rad, weight, base = kernels.zonal_proposal(
        u, geom.n, float(lam), _proposal_exponent(geom, lam), DEFENSIVE_EPS
    )
    centre, side = kernels.complement_lift(np.ascontiguousarray(xi), w, rad, z)
    gv = np.zeros(size, dtype=complex)
    for r in range(phases):
        gv += _values(g, centre + side * np.exp(2j * math.pi * r / phases))
    return weight, base, gv / phases


def _control_variate(mom: _Moments, known_mean):
    """Combine columns [Re Y, Im Y, Re X, Im X] into E[Y] using E[X] = known_mean.

    Returns (linear map rows for Re/Im of Y - βX, offset, beta).
    """
    cov = mom.covariance()
    if known_mean is None:
        return np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0]]), 0j, 0.0
    vx = cov[2, 2] + cov[3, 3]
    beta = (cov[0, 2] + cov[1, 3]) / vx if vx > 0 else 0.0
    rows = np.array([[1.0, 0, -beta, 0], [0, 1.0, 0, -beta]])
    return rows, beta * complex(known_mean), beta


def _complex_estimate(mom: _Moments, known_mean) -> McEstimate:
    rows, offset, _ = _control_variate(mom, known_mean)
    mu = rows @ mom.mean[:4]
    cov = rows @ mom.covariance()[:4, :4] @ rows.T
    value = complex(mu[0], mu[1]) + offset
    return McEstimate(value, math.sqrt(max(cov[0, 0] + cov[1, 1], 0.0) / mom.n), mom.n)


def kernel_apply_mc(
    geom: SphereGeometry, lam: float, f, p, spec: SampleSpec, *, phases: int = DEFAULT_PHASES
) -> McEstimate:
    """∫ |1 - p·η̄|^(-λ/2) f(η) dη by importance sampling in w = p·η̄.

    η is written as w̄ p + sqrt(1-|w|²) v with v uniform on the complement
    of p; w is drawn from a defensive mixture concentrated near w = 1 and
    v is averaged over ``phases`` rotations. For HarmonicExpansion inputs
    the exactly known mean of f is used as a control variate.
    """
    _check_lambda(geom, lam)
    p = sphere_point(p)
    if p.size != geom.dim:
        raise ValueError("point has the wrong dimension")

    def chunk(rng, size):
        xi = np.broadcast_to(p, (size, geom.dim))
        weight, base, fv = _kernel_side(geom, lam, xi, rng, f, phases)
        y = weight * fv
        x = base * fv
        return np.stack([y.real, y.imag, x.real, x.imag], axis=1)

    mom = _run_streams(spec, _KERNEL, 4, chunk)
    return _complex_estimate(mom, _known_mean(f))


def _pair_moments(geom, lam, f, g, spec, phases, extra=None):
    m = geom.dim

    def chunk(rng, size):
        xi = _uniform_chunk(rng, size, m)
        weight, base, gv = _kernel_side(geom, lam, xi, rng, g, phases)
        fv = np.conj(_values(f, xi))
        y = fv * weight * gv
        x = fv * base * gv
        cols = [y.real, y.imag, x.real, x.imag]
        if extra is not None:
            cols.append(extra(xi))
        return np.stack(cols, axis=1)

    return _run_streams(spec, _PAIRS, 4 if extra is None else 5, chunk)


def _pair_known_mean(f, g):
    mf, mg = _known_mean(f), _known_mean(g)
    if mf is None or mg is None:
        return None
    return np.conj(mf) * mg


def hls_double_integral_mc(
    geom: SphereGeometry, lam: float, f, g, spec: SampleSpec, *, phases: int = DEFAULT_PHASES
) -> McEstimate:
    """∫∫ conj(f(ξ)) g(η) |1 - ξ·η̄|^(-λ/2) dξ dη over independent pairs."""
    _check_lambda(geom, lam)
    mom = _pair_moments(geom, lam, f, g, spec, phases)
    return _complex_estimate(mom, _pair_known_mean(f, g))


def hls_ratio_mc(
    geom: SphereGeometry, lam: float, f, p: float, spec: SampleSpec, *, phases: int = DEFAULT_PHASES
) -> McEstimate:
    """|∫∫ conj(f) f K| / (C_{λ,n} ‖f‖_p²) from one joint sample.

    The double integral and ∫|f|^p share the ξ draws; the standard error
    comes from the delta method on the joint covariance.
    """
    _check_lambda(geom, lam)
    mom = _pair_moments(geom, lam, f, f, spec, phases,
                        extra=lambda xi: np.abs(_values(f, xi)) ** p)
    rows, offset, _ = _control_variate(mom, _pair_known_mean(f, f))
    lin = np.zeros((3, 5))
    lin[:2, :4] = rows
    lin[2, 4] = 1.0
    mu = lin @ mom.mean
    zr, zi = mu[0] + offset.real, mu[1] + offset.imag
    a = mu[2]
    C = hls_constant(geom, lam)
    mod = math.hypot(zr, zi)
    denom = C * a ** (2.0 / p)
    value = float(mod / denom)
    grad = np.array([zr / mod / denom, zi / mod / denom, -(2.0 / p) * value / a])
    cov = lin @ mom.covariance() @ lin.T
    stderr = math.sqrt(max(float(grad @ cov @ grad), 0.0) / mom.n)
    return McEstimate(value, stderr, mom.n)
