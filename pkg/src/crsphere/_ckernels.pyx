# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo inner loops; see _pykernels for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, log, exp, log1p, expm1, M_PI, INFINITY

cnp.import_array()


def gaussian_to_sphere(const double[:, :, ::1] z):
    cdef Py_ssize_t N = z.shape[0], m = z.shape[1], i, a
    cdef double s
    out = np.empty((N, m), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    with nogil:
        for i in range(N):
            s = 0.0
            for a in range(m):
                s = s + z[i, a, 0] * z[i, a, 0] + z[i, a, 1] * z[i, a, 1]
            s = sqrt(s)
            for a in range(m):
                o[i, a] = (z[i, a, 0] / s) + 1j * (z[i, a, 1] / s)
    return out


def zonal_proposal(const double[:, ::1] u, int n, double lam, double s, double eps):
    cdef Py_ssize_t N = u.shape[0], i
    cdef double log_omr2, wr, wi, omr, omi, rho, log_rho, cth, th, ang, r
    cdef double log_p, log_h, delta, log_base, t
    w_out = np.empty(N, dtype=np.complex128)
    rad_out = np.empty(N, dtype=np.float64)
    weight_out = np.empty(N, dtype=np.float64)
    base_out = np.empty(N, dtype=np.float64)
    cdef double complex[::1] w = w_out
    cdef double[::1] rd = rad_out
    cdef double[::1] weight = weight_out
    cdef double[::1] bs = base_out
    cdef double inv = 1.0 / (2.0 - s)
    cdef double log_np = log(n / M_PI)
    cdef double log_hc = log((2.0 - s) / M_PI)
    with nogil:
        for i in range(N):
            if u[i, 0] < eps:
                log_omr2 = log1p(-u[i, 1]) / n
                r = sqrt(-expm1(log_omr2))
                ang = 2.0 * M_PI * u[i, 2]
                wr = r * cos(ang)
                wi = r * sin(ang)
                omr = 1.0 - wr
                omi = -wi
                rho = sqrt(omr * omr + omi * omi)
                log_rho = log(rho)
                cth = omr / rho
            else:
                th = M_PI * (u[i, 3] - 0.5)
                cth = cos(th)
                log_rho = log(2.0 * cth) + log1p(-u[i, 4]) * inv
                rho = exp(log_rho)
                omr = rho * cth
                omi = rho * sin(th)
                wr = 1.0 - omr
                wi = -omi
                t = 2.0 * cth - rho
                if t > 0.0:
                    log_omr2 = log_rho + log(t)
                else:
                    log_omr2 = -INFINITY
            w[i] = wr + 1j * wi
            rd[i] = exp(0.5 * log_omr2)
            if n > 1:
                log_p = log_np + (n - 1) * log_omr2
            else:
                log_p = log_np
            log_h = log_hc - (2.0 - s) * log(2.0 * cth) - s * log_rho
            delta = log_h - log_p
            if delta > 0:
                log_base = -(delta + log((1.0 - eps) + eps * exp(-delta)))
            else:
                log_base = -log(eps + (1.0 - eps) * exp(delta))
            bs[i] = exp(log_base)
            weight[i] = exp(log_base - 0.5 * lam * log_rho)
    return w_out, rad_out, weight_out, base_out


def complement_lift(const double complex[:, ::1] xi, const double complex[::1] w,
                    const double[::1] rad, const double[:, :, ::1] z):
    cdef Py_ssize_t N = xi.shape[0], m = xi.shape[1], i, a
    cdef double complex proj, ga, wc
    cdef double gn, scale
    centre_out = np.empty((N, m), dtype=np.complex128)
    side_out = np.empty((N, m), dtype=np.complex128)
    cdef double complex[:, ::1] c = centre_out
    cdef double complex[:, ::1] v = side_out
    with nogil:
        for i in range(N):
            proj = 0.0
            for a in range(m):
                ga = z[i, a, 0] + 1j * z[i, a, 1]
                proj = proj + ga * xi[i, a].conjugate()
            gn = 0.0
            for a in range(m):
                ga = z[i, a, 0] + 1j * z[i, a, 1] - proj * xi[i, a]
                v[i, a] = ga
                gn = gn + ga.real * ga.real + ga.imag * ga.imag
            scale = rad[i] / sqrt(gn)
            wc = w[i].conjugate()
            for a in range(m):
                c[i, a] = wc * xi[i, a]
                v[i, a] = v[i, a] * scale
    return centre_out, side_out


cdef inline double complex _ipow(double complex x, long e) noexcept nogil:
    cdef double complex r = 1.0
    while e > 0:
        if e & 1:
            r = r * x
        x = x * x
        e >>= 1
    return r


def eval_monomials(const double complex[:, ::1] pts, coef, jz, kz, az, ab):
    cdef Py_ssize_t N = pts.shape[0], T = len(coef), i, t
    cdef double complex[::1] c = np.ascontiguousarray(coef, dtype=np.complex128)
    cdef long[::1] j = np.ascontiguousarray(jz, dtype=np.int_)
    cdef long[::1] k = np.ascontiguousarray(kz, dtype=np.int_)
    cdef long[::1] a = np.ascontiguousarray(az, dtype=np.int_)
    cdef long[::1] b = np.ascontiguousarray(ab, dtype=np.int_)
    out = np.zeros(N, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef double complex term
    with nogil:
        for i in range(N):
            for t in range(T):
                term = c[t]
                if j[t]:
                    term = term * _ipow(pts[i, a[t]], j[t])
                if k[t]:
                    term = term * _ipow(pts[i, b[t]].conjugate(), k[t])
                o[i] = o[i] + term
    return out


def abs_power(const double complex[:, ::1] pts, zc, double expo):
    cdef Py_ssize_t N = pts.shape[0], m = pts.shape[1], i, a
    cdef double complex[::1] z = np.ascontiguousarray(zc, dtype=np.complex128)
    cdef double complex acc
    r2 = np.empty(N, dtype=np.float64)
    cdef double[::1] o = r2
    with nogil:
        for i in range(N):
            acc = 1.0
            for a in range(m):
                acc = acc - z[a] * pts[i, a]
            o[i] = acc.real * acc.real + acc.imag * acc.imag
    # numpy's vectorized pow outruns a scalar libm loop
    return np.power(r2, 0.5 * expo, out=r2)
