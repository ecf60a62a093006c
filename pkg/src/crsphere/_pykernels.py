"""Pure numpy implementations of the Monte Carlo inner loops.

Same signatures and semantics as the compiled ``_ckernels`` module; used
when the extension is unavailable or ``CRS_BACKEND=python`` is set.
"""
import numpy as np


def gaussian_to_sphere(z):
    """Map an (N, m, 2) array of standard normals to N uniform points of S^(2m-1)."""
    pts = z[..., 0] + 1j * z[..., 1]
    norm = np.sqrt(np.sum(z * z, axis=(1, 2)))
    return pts / norm[:, None]


def zonal_proposal(u, n, lam, s, eps):
    """Draw w = ξ·η̄ from the defensive mixture eps·p + (1-eps)·h.

    p is the law of ξ·η̄ for uniform η, h has a ρ^(-s) profile in
    ρ = |1-w|. ``u`` is (N, 5) uniforms: [pick, radius, angle, theta, rho].
    Returns (w, rad, weight, base) with rad = sqrt(1-|w|²),
    weight = K(w) p(w)/g(w), base = p(w)/g(w), K(w) = |1-w|^(-lam/2).
    Densities are combined in the log domain because ρ may underflow.
    """
    pick = u[:, 0] < eps
    # p: |w|^2 ~ Beta(1, n), uniform phase
    log_omr2_p = np.log1p(-u[:, 1]) / n
    wp = np.sqrt(-np.expm1(log_omr2_p)) * np.exp(2j * np.pi * u[:, 2])
    om_p = 1.0 - wp
    rho_p = np.abs(om_p)
    # h: 1 - w = rho e^{i theta}; 1-u lies in (0, 1] so log rho is finite
    th = np.pi * (u[:, 3] - 0.5)
    cth_h = np.cos(th)
    log_rho_h = np.log(2.0 * cth_h) + np.log1p(-u[:, 4]) / (2.0 - s)
    rho_h = np.exp(log_rho_h)
    om_h = rho_h * np.exp(1j * th)

    with np.errstate(divide="ignore"):
        log_rho = np.where(pick, np.log(rho_p), log_rho_h)
        cth = np.where(pick, om_p.real / rho_p, cth_h)
        log_omr2 = np.where(
            pick, log_omr2_p, log_rho_h + np.log(np.maximum(2.0 * cth_h - rho_h, 0.0))
        )
    om = np.where(pick, om_p, om_h)
    w = 1.0 - om
    rad = np.exp(0.5 * log_omr2)

    log_p = np.log(n / np.pi) + ((n - 1) * log_omr2 if n > 1 else 0.0)
    log_h = np.log((2.0 - s) / np.pi) - (2.0 - s) * np.log(2.0 * cth) - s * log_rho
    with np.errstate(invalid="ignore", over="ignore"):
        delta = log_h - log_p
        log_base = np.where(
            delta > 0,
            -(delta + np.log((1.0 - eps) + eps * np.exp(-delta))),
            -np.log(eps + (1.0 - eps) * np.exp(np.minimum(delta, 0.0))),
        )
    base = np.exp(log_base)
    weight = np.exp(log_base - 0.5 * lam * log_rho)
    return w, rad, weight, base


def complement_lift(xi, w, rad, z):
    """Split η = w̄ ξ + rad·v into (w̄ ξ, rad·v), rad = sqrt(1-|w|²).

    v is uniform on the unit sphere of the complex orthogonal complement of
    ξ, built from the (N, m, 2) normals ``z``.
    """
    g = z[..., 0] + 1j * z[..., 1]
    g = g - np.sum(g * np.conj(xi), axis=1)[:, None] * xi
    gn = np.sqrt(np.sum(g.real**2 + g.imag**2, axis=1))
    return np.conj(w)[:, None] * xi, (rad / gn)[:, None] * g


def eval_monomials(pts, coef, jz, kz, az, ab):
    """Σ_t coef_t ξ_{az_t}^{jz_t} conj(ξ_{ab_t})^{kz_t}, axes 0-based."""
    out = np.zeros(pts.shape[0], dtype=complex)
    for c, j, k, a, b in zip(coef, jz, kz, az, ab):
        term = np.full(pts.shape[0], c, dtype=complex)
        if j:
            term = term * pts[:, a] ** int(j)
        if k:
            term = term * np.conj(pts[:, b]) ** int(k)
        out += term
    return out


def abs_power(pts, zc, expo):
    """|1 - Σ_i zc_i ξ_i|^expo."""
    return np.abs(1.0 - pts @ zc) ** expo
