"""Pure numpy implementation of the batched modal kernels.

Every function takes an array of spectral points ``mus`` and evaluates one
3x3 block per point.  The compiled module ``hyplab._kernels`` exposes the
same functions with the same signatures; ``hyplab.kernels`` picks one at
import time.

A real root of the characteristic cubic is obtained from two scaled
companion matrices (the polynomial and its reversal), which keeps it
accurate to relative precision whether it is the largest or the smallest
root; the remaining pair comes from a deflation written in the block
entries, so roots differing by twenty orders of magnitude stay accurate.
"""
import numpy as np

WEIGHT_NONE = 0
WEIGHT_CONDITIONED = 1
WEIGHT_SMOOTHED = 2

# eigenvalue condition number above which the spectral-projector formula is
# abandoned for the mode (caller falls back to scaling-and-squaring)
KAPPA_MAX = 1e8


def block_params(mus, alpha, beta):
    mus = np.asarray(mus, dtype=float)
    return np.sqrt(mus), np.power(mus, alpha), np.power(mus, beta)


def char_coeffs(mus, alpha, beta):
    """Closed-form coefficients ``(c2, c1, c0)`` of the monic characteristic cubic."""
    mus = np.asarray(mus, dtype=float)
    a = np.power(mus, alpha)
    b = np.power(mus, beta)
    return b, mus + a * a, mus * b


def _companion_eigs(d2, d1, d0):
    n = d2.shape[0]
    C = np.zeros((n, 3, 3))
    C[:, 0, 0] = -d2
    C[:, 0, 1] = -d1
    C[:, 0, 2] = -d0
    C[:, 1, 0] = 1.0
    C[:, 2, 1] = 1.0
    return np.linalg.eigvals(C)


def _scaled_roots(c2, c1, c0):
    # substitute z = sigma * nu so every coefficient has modulus <= 1
    sigma = np.maximum(np.maximum(np.abs(c2), np.sqrt(np.abs(c1))), np.cbrt(np.abs(c0)))
    return sigma[:, None] * _companion_eigs(c2 / sigma, c1 / sigma**2, c0 / sigma**3)


def _real_root_estimate(L):
    # the cubic has real coefficients, so at least one root is real; LAPACK
    # returns real eigenvalues of a real matrix with imaginary part exactly 0
    k = np.argmin(np.abs(L.imag) / np.maximum(np.abs(L), np.finfo(float).tiny), axis=1)
    return L[np.arange(L.shape[0]), k].real


def _newton_step(r, c2, c1, c0):
    p = ((r + c2) * r + c1) * r + c0
    dp = (3.0 * r + 2.0 * c2) * r + c1
    with np.errstate(divide="ignore", invalid="ignore"):
        cand = r - p / dp
        pc = ((cand + c2) * cand + c1) * cand + c0
    ok = np.isfinite(cand) & (np.abs(pc) <= np.abs(p)) & (cand < 0.0)
    return np.where(ok, cand, r)


def _backward_error(r, c2, c1, c0):
    p = ((r + c2) * r + c1) * r + c0
    scale = np.abs(r) ** 3 + c2 * r * r + c1 * np.abs(r) + c0
    return np.abs(p) / scale


def _sort_roots(L):
    out = np.empty_like(L)
    for i in range(L.shape[0]):
        order = np.lexsort((L[i].imag, np.abs(L[i])))
        out[i] = L[i, order]
    return out


def eigenvalues(mus, alpha, beta, nthreads=1):
    """Roots of the characteristic cubic for each mode, sorted by modulus.

    A real root is taken from the QR eigenvalues of the scaled companion
    matrix of the cubic and of its reversal, each estimate gets one Newton
    polish, and the one with the smaller backward error is kept.  The
    complex pair follows from the deflated quadratic
    ``z^2 + e1 z + e0`` with ``e0 = c0/|r|`` and ``e1 = |r| a^2 / (mu + r^2)``,
    both free of cancellation.

    Returns
    -------
    ndarray, shape (n, 3), complex
        Column 0 holds the slow (smallest-modulus) eigenvalue.
    """
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    c2, c1, c0 = char_coeffs(mus, alpha, beta)
    a = np.power(mus, alpha)
    direct = _scaled_roots(c2, c1, c0)
    recip = 1.0 / _scaled_roots(c1 / c0, c2 / c0, 1.0 / c0)
    r1 = _newton_step(_real_root_estimate(direct), c2, c1, c0)
    r2 = _newton_step(_real_root_estimate(recip), c2, c1, c0)
    r = np.where(_backward_error(r1, c2, c1, c0) <= _backward_error(r2, c2, c1, c0), r1, r2)

    e0 = c0 / -r
    e1 = -r * a * a / (mus + r * r)
    disc = e1 * e1 - 4.0 * e0
    sq = np.sqrt(np.abs(disc))
    real_pair = disc >= 0.0
    q = -0.5 * (e1 + sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        z1 = np.where(real_pair, q, -0.5 * e1 - 0.5j * sq)
        z2 = np.where(real_pair, e0 / q, -0.5 * e1 + 0.5j * sq)
    L = np.stack([r.astype(complex), z1, z2], axis=1)
    return _sort_roots(L)


def spectral_abscissa(mus, alpha, beta, nthreads=1):
    return eigenvalues(mus, alpha, beta).real.max(axis=1)


def spectral_projectors(mus, alpha, beta):
    """Eigenvalues, rank-one spectral projectors and eigenvalue condition numbers.

    The right eigenvector of the block for a root ``lam`` is
    ``(m, lam, x3)`` and the left one is ``(m, -lam, x3)``, with
    ``x3 = (lam**2 + m**2) / a = -a*lam / (b + lam)``; whichever form
    suffers less cancellation is used.

    Returns
    -------
    L : ndarray (n, 3) complex
    P : ndarray (n, 3, 3, 3) complex, ``P[:, k]`` is the projector of root k
    kappa : ndarray (n, 3)
    """
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    L = eigenvalues(mus, alpha, beta)
    m, a, b = block_params(mus, alpha, beta)
    m = m[:, None]
    a = a[:, None]
    b = b[:, None]
    sq = L * L + m * m
    shift = b + L
    with np.errstate(divide="ignore", invalid="ignore"):
        ra = np.abs(sq) / (np.abs(L) ** 2 + m * m)
        rb = np.abs(shift) / (b + np.abs(L))
        x3 = np.where(ra >= rb, sq / a, -a * L / shift)
    X = np.stack([np.broadcast_to(m, L.shape).astype(complex), L, x3], axis=1)
    W = X * np.array([1.0, -1.0, 1.0])[None, :, None]
    dprime = np.stack(
        [
            (L[:, 0] - L[:, 1]) * (L[:, 0] - L[:, 2]),
            (L[:, 1] - L[:, 0]) * (L[:, 1] - L[:, 2]),
            (L[:, 2] - L[:, 0]) * (L[:, 2] - L[:, 1]),
        ],
        axis=1,
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        den = dprime * x3 / a
        kappa = np.sum(np.abs(X) ** 2, axis=1) / np.abs(den)
        P = np.einsum("nir,njr->nrij", X, W) / den[:, :, None, None]
    kappa = np.where(np.isfinite(kappa), kappa, np.inf)
    return L, P, kappa


def _weights(L, t, weight):
    f = np.exp(t * L)
    if weight == WEIGHT_CONDITIONED:
        f = f * L / (1.0 - L)
    elif weight == WEIGHT_SMOOTHED:
        f = f / (1.0 - L)
    return f


def semigroup_norms(ts, mus, alpha, beta, weight, nthreads=1):
    """Energy norms of ``exp(tB) g(B)`` for every (t, mode) pair.

    ``g`` is the identity, ``B (I-B)^-1`` or ``(I-B)^-1`` depending on
    ``weight``.  Modes whose eigenbasis is too ill-conditioned are returned
    as NaN and marked in ``flags``.

    Returns
    -------
    values : ndarray (len(ts), len(mus))
    flags : ndarray (len(mus),) of uint8
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    L, P, kappa = spectral_projectors(mus, alpha, beta)
    flags = (kappa.max(axis=1) > KAPPA_MAX).astype(np.uint8)
    out = np.empty((ts.shape[0], mus.shape[0]))
    for i, t in enumerate(ts):
        if t == 0.0 and weight == WEIGHT_NONE:
            out[i] = 1.0
            continue
        f = _weights(L, t, weight)
        # B is real, so any real-coefficient function of it is real
        M = np.einsum("nr,nrij->nij", f, P).real
        with np.errstate(invalid="ignore"):
            out[i] = np.linalg.norm(np.nan_to_num(M), ord=2, axis=(1, 2))
    out[:, flags.astype(bool)] = np.nan
    return out, flags


def resolvent_norms(s, mus, alpha, beta, nthreads=1):
    """``||(i s - B)^-1||_2`` for each mode via the closed-form adjugate.

    The inverse is assembled entrywise from the cofactors of ``i s - B`` and
    the characteristic polynomial evaluated at ``i s``; none of these
    expressions cancels catastrophically, unlike the smallest singular value
    of ``i s - B`` itself when the block norm is large.
    """
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    m, a, b = block_params(mus, alpha, beta)
    c2, c1, c0 = char_coeffs(mus, alpha, beta)
    z = 1j * float(s)
    zb = z + b
    n = mus.shape[0]
    M = np.empty((n, 3, 3), dtype=complex)
    M[:, 0, 0] = z * zb + a * a
    M[:, 0, 1] = m * zb
    M[:, 0, 2] = m * a
    M[:, 1, 0] = -m * zb
    M[:, 1, 1] = z * zb
    M[:, 1, 2] = z * a
    M[:, 2, 0] = m * a
    M[:, 2, 1] = -z * a
    M[:, 2, 2] = z * z + mus
    s = float(s)
    det = (c0 - c2 * s * s) + 1j * (c1 * s - s**3)
    return np.linalg.norm(M / det[:, None, None], ord=2, axis=(1, 2))
