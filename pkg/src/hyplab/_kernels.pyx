# cython: language_level=3
"""Compiled modal kernels.

Same functions and signatures as ``hyplab._kernels_py``.  Each mode is
handled by a ``nogil`` routine working on stack buffers, so the outer loop
over modes runs under OpenMP ``prange``.

The real root of the characteristic cubic is found differently from the
numpy backend: it is bracketed in ``(-c2, 0)`` (``p(-c2) = -a^2 b`` and
``p(0) = c0 > 0``) and located by safeguarded Newton run to convergence.
Deflation then follows the same structured formulas as the numpy backend.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport sqrt, exp, pow, fabs, cos, sin, hypot, NAN, INFINITY, isfinite

cnp.import_array()

cdef double KAPPA_MAX = 1e8
cdef double EPS = 2.220446049250313e-16

WEIGHT_NONE = 0
WEIGHT_CONDITIONED = 1
WEIGHT_SMOOTHED = 2


cdef inline double cabs_(double complex z) noexcept nogil:
    return hypot(z.real, z.imag)


cdef inline double complex cdiv(double complex x, double complex y) noexcept nogil:
    # Smith's algorithm; the naive formula overflows for |y| > 1e154
    cdef double r, d
    if fabs(y.real) >= fabs(y.imag):
        r = y.imag / y.real
        d = y.real + y.imag * r
        return ((x.real + x.imag * r) / d) + 1j * ((x.imag - x.real * r) / d)
    r = y.real / y.imag
    d = y.imag + y.real * r
    return ((x.real * r + x.imag) / d) + 1j * ((x.imag * r - x.real) / d)


cdef inline double complex cexp_(double complex z) noexcept nogil:
    cdef double e = exp(z.real)
    if e == 0.0:
        return 0.0
    return e * cos(z.imag) + 1j * (e * sin(z.imag))


cdef void cubic_roots(double mu, double a, double b,
                      double c2, double c1, double c0, double complex* out) noexcept nogil:
    # real root: safeguarded Newton inside the bracket (-c2, 0)
    cdef double lo = -c2, hi = 0.0
    cdef double x = -c0 / c1
    cdef double px, dpx, xn
    cdef int it
    for it in range(400):
        px = ((x + c2) * x + c1) * x + c0
        if px == 0.0:
            break
        if px < 0.0:
            lo = x
        else:
            hi = x
        dpx = (3.0 * x + 2.0 * c2) * x + c1
        xn = x - px / dpx if dpx != 0.0 else lo
        if not (xn > lo and xn < hi):
            if hi < 0.0 and lo / hi > 4.0:
                xn = -sqrt(lo * hi)
            else:
                xn = 0.5 * (lo + hi)
        if fabs(xn - x) <= 2.0 * EPS * fabs(xn):
            x = xn
            break
        x = xn
    cdef double r = x

    # p(z) = (z - r)(z^2 + e1 z + e0); both coefficients are sums of
    # positive terms once expressed through the block entries
    cdef double e0 = c0 / (-r)
    cdef double e1 = (-r) * a * a / (mu + r * r)
    cdef double disc = e1 * e1 - 4.0 * e0
    cdef double q, sq
    cdef double complex roots[3]
    roots[0] = r
    if disc >= 0.0:
        q = -0.5 * (e1 + sqrt(disc))
        roots[1] = q
        roots[2] = e0 / q
    else:
        sq = 0.5 * sqrt(-disc)
        roots[1] = -0.5 * e1 - 1j * sq
        roots[2] = -0.5 * e1 + 1j * sq

    # sort by (modulus, imaginary part)
    cdef double complex tmp
    cdef int i, j
    for i in range(1, 3):
        j = i
        while j > 0 and (cabs_(roots[j]) < cabs_(roots[j - 1]) or
                         (cabs_(roots[j]) == cabs_(roots[j - 1]) and
                          roots[j].imag < roots[j - 1].imag)):
            tmp = roots[j]
            roots[j] = roots[j - 1]
            roots[j - 1] = tmp
            j -= 1
    for i in range(3):
        out[i] = roots[i]


cdef inline void coeffs(double mu, double alpha, double beta,
                        double* m, double* a, double* b,
                        double* c2, double* c1, double* c0) noexcept nogil:
    m[0] = sqrt(mu)
    a[0] = pow(mu, alpha)
    b[0] = pow(mu, beta)
    c2[0] = b[0]
    c1[0] = mu + a[0] * a[0]
    c0[0] = mu * b[0]


cdef void mode_eigs(double mu, double alpha, double beta, double complex* out) noexcept nogil:
    cdef double m, a, b, c2, c1, c0
    coeffs(mu, alpha, beta, &m, &a, &b, &c2, &c1, &c0)
    cubic_roots(mu, a, b, c2, c1, c0, out)


cdef double jacobi_max_eig(double* A, int n) noexcept nogil:
    # cyclic Jacobi on a symmetric n x n (row-major, overwritten); every
    # eigenvalue comes out with absolute error O(eps * ||A||), which the
    # closed-form trigonometric solution cannot guarantee near a double root
    cdef int sweep, p, q, k
    cdef double off, diag, apq, theta, t, c, sn, akp, akq, best
    for sweep in range(50):
        off = 0.0
        diag = 0.0
        for p in range(n):
            diag = diag + A[p * n + p] * A[p * n + p]
            for q in range(p + 1, n):
                off = off + A[p * n + q] * A[p * n + q]
        if off <= 1e-36 * diag or off == 0.0:
            break
        for p in range(n):
            for q in range(p + 1, n):
                apq = A[p * n + q]
                if apq == 0.0:
                    continue
                theta = (A[q * n + q] - A[p * n + p]) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                sn = t * c
                for k in range(n):
                    if k == p or k == q:
                        continue
                    akp = A[k * n + p]
                    akq = A[k * n + q]
                    A[k * n + p] = c * akp - sn * akq
                    A[p * n + k] = A[k * n + p]
                    A[k * n + q] = sn * akp + c * akq
                    A[q * n + k] = A[k * n + q]
                A[p * n + p] = A[p * n + p] - t * apq
                A[q * n + q] = A[q * n + q] + t * apq
                A[p * n + q] = 0.0
                A[q * n + p] = 0.0
    best = A[0]
    for p in range(1, n):
        if A[p * n + p] > best:
            best = A[p * n + p]
    return best


cdef double real_norm2(double* M) noexcept nogil:
    # scale to unit max entry first so that forming M^T M neither
    # underflows (values near 1e-162) nor overflows
    cdef double H[9]
    cdef double A[9]
    cdef int i, j, k
    cdef double s, scale = 0.0
    for i in range(9):
        if fabs(M[i]) > scale:
            scale = fabs(M[i])
    if scale == 0.0 or not isfinite(scale):
        return scale
    for i in range(9):
        A[i] = M[i] / scale
    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(3):
                s = s + A[3 * k + i] * A[3 * k + j]
            H[3 * i + j] = s
    s = jacobi_max_eig(H, 3)
    return scale * sqrt(s) if s > 0.0 else 0.0


cdef double complex_norm2(double complex* M) noexcept nogil:
    # M^H M = R + iS is embedded as the real symmetric [[R, -S], [S, R]],
    # whose spectrum is that of M^H M with every eigenvalue doubled
    cdef double G[36]
    cdef double complex A[9]
    cdef int i, j, k
    cdef double complex s
    cdef double scale = 0.0
    for i in range(9):
        if cabs_(M[i]) > scale:
            scale = cabs_(M[i])
    if scale == 0.0 or not isfinite(scale):
        return scale
    for i in range(9):
        A[i] = M[i] / scale
    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(3):
                s = s + A[3 * k + i].conjugate() * A[3 * k + j]
            G[6 * i + j] = s.real
            G[6 * (i + 3) + (j + 3)] = s.real
            G[6 * i + (j + 3)] = -s.imag
            G[6 * (i + 3) + j] = s.imag
    cdef double e = jacobi_max_eig(G, 6)
    return scale * sqrt(e) if e > 0.0 else 0.0


cdef int mode_projectors(double mu, double alpha, double beta,
                         double complex* L, double complex* P) noexcept nogil:
    """Fill L[3] and P[27] (P[9*k + 3*i + j]); return 1 if ill-conditioned."""
    cdef double m, a, b, c2, c1, c0
    coeffs(mu, alpha, beta, &m, &a, &b, &c2, &c1, &c0)
    cubic_roots(mu, a, b, c2, c1, c0, L)
    cdef int k, i, j, bad = 0
    cdef double complex lam, sq, shift, x3, den, dprime
    cdef double ra, rb, n2, kappa
    cdef double complex x[3]
    cdef double complex w[3]
    for k in range(3):
        lam = L[k]
        sq = lam * lam + m * m
        shift = b + lam
        ra = cabs_(sq) / (cabs_(lam) * cabs_(lam) + m * m)
        rb = cabs_(shift) / (b + cabs_(lam))
        if ra >= rb:
            x3 = sq / a
        else:
            x3 = cdiv(-a * lam, shift)
        x[0] = m
        x[1] = lam
        x[2] = x3
        w[0] = m
        w[1] = -lam
        w[2] = x3
        dprime = 1.0
        for j in range(3):
            if j != k:
                dprime = dprime * (lam - L[j])
        den = dprime * x3 / a
        n2 = m * m + cabs_(lam) * cabs_(lam) + cabs_(x3) * cabs_(x3)
        kappa = n2 / cabs_(den) if cabs_(den) > 0.0 else INFINITY
        if not (kappa <= KAPPA_MAX):
            bad = 1
        for i in range(3):
            for j in range(3):
                P[9 * k + 3 * i + j] = cdiv(x[i] * w[j], den)
    return bad


cdef void mode_semigroup(double mu, double alpha, double beta,
                         double* ts, Py_ssize_t nt, int weight,
                         double* out, Py_ssize_t col, Py_ssize_t n,
                         unsigned char* flag) noexcept nogil:
    cdef double complex L[3]
    cdef double complex P[27]
    cdef double complex f[3]
    cdef double M[9]
    cdef Py_ssize_t it
    cdef int k, i
    cdef double t
    if mode_projectors(mu, alpha, beta, L, P):
        flag[0] = 1
        for it in range(nt):
            out[it * n + col] = NAN
        return
    flag[0] = 0
    for it in range(nt):
        t = ts[it]
        if t == 0.0 and weight == 0:
            out[it * n + col] = 1.0
            continue
        for k in range(3):
            f[k] = cexp_(t * L[k])
            if weight == 1:
                f[k] = cdiv(f[k] * L[k], 1.0 - L[k])
            elif weight == 2:
                f[k] = cdiv(f[k], 1.0 - L[k])
        for i in range(9):
            M[i] = (f[0] * P[i] + f[1] * P[9 + i] + f[2] * P[18 + i]).real
        out[it * n + col] = real_norm2(M)


cdef double mode_resolvent(double s, double mu, double alpha, double beta) noexcept nogil:
    cdef double m, a, b, c2, c1, c0
    coeffs(mu, alpha, beta, &m, &a, &b, &c2, &c1, &c0)
    cdef double complex z = 1j * s
    cdef double complex zb = z + b
    cdef double complex det = (c0 - c2 * s * s) + 1j * (c1 * s - s * s * s)
    cdef double complex M[9]
    M[0] = z * zb + a * a
    M[1] = m * zb
    M[2] = m * a
    M[3] = -m * zb
    M[4] = z * zb
    M[5] = z * a
    M[6] = m * a
    M[7] = -z * a
    M[8] = z * z + mu
    cdef int i
    for i in range(9):
        M[i] = cdiv(M[i], det)
    return complex_norm2(M)


def _as_mus(mus):
    return np.ascontiguousarray(np.atleast_1d(np.asarray(mus, dtype=np.float64)))


def eigenvalues(mus, double alpha, double beta, int nthreads=1):
    """Roots of the characteristic cubic per mode, sorted by modulus."""
    cdef double[::1] mv = _as_mus(mus)
    cdef Py_ssize_t n = mv.shape[0], i
    out = np.empty((n, 3), dtype=np.complex128)
    cdef double complex[:, ::1] ov = out
    for i in prange(n, nogil=True, num_threads=max(nthreads, 1), schedule="static"):
        mode_eigs(mv[i], alpha, beta, &ov[i, 0])
    return out


def spectral_abscissa(mus, double alpha, double beta, int nthreads=1):
    L = eigenvalues(mus, alpha, beta, nthreads)
    return L.real.max(axis=1)


def spectral_projectors(mus, double alpha, double beta):
    cdef double[::1] mv = _as_mus(mus)
    cdef Py_ssize_t n = mv.shape[0], i
    L = np.empty((n, 3), dtype=np.complex128)
    P = np.empty((n, 3, 3, 3), dtype=np.complex128)
    cdef double complex[:, ::1] lv = L
    cdef double complex[:, :, :, ::1] pv = P
    for i in range(n):
        mode_projectors(mv[i], alpha, beta, &lv[i, 0], &pv[i, 0, 0, 0])
    return L, P


def semigroup_norms(ts, mus, double alpha, double beta, int weight, int nthreads=1):
    """Energy norms of ``exp(tB) g(B)`` per (t, mode); NaN where flagged."""
    cdef double[::1] tv = np.ascontiguousarray(np.atleast_1d(np.asarray(ts, dtype=np.float64)))
    cdef double[::1] mv = _as_mus(mus)
    cdef Py_ssize_t nt = tv.shape[0], n = mv.shape[0], i
    out = np.empty((nt, n), dtype=np.float64)
    flags = np.zeros(n, dtype=np.uint8)
    cdef double[:, ::1] ov = out
    cdef unsigned char[::1] fv = flags
    if n == 0 or nt == 0:
        return out, flags
    for i in prange(n, nogil=True, num_threads=max(nthreads, 1), schedule="static"):
        mode_semigroup(mv[i], alpha, beta, &tv[0], nt, weight, &ov[0, 0], i, n, &fv[i])
    return out, flags


def resolvent_norms(double s, mus, double alpha, double beta, int nthreads=1):
    """``||(i s - B)^-1||_2`` per mode from the closed-form adjugate."""
    cdef double[::1] mv = _as_mus(mus)
    cdef Py_ssize_t n = mv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    for i in prange(n, nogil=True, num_threads=max(nthreads, 1), schedule="static"):
        ov[i] = mode_resolvent(s, mv[i], alpha, beta)
    return out
