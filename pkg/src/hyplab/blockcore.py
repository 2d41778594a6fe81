"""Single-mode algebra of the coupled hyperbolic-parabolic generator.

On an eigenvector of ``A`` with eigenvalue ``mu`` the generator acts on the
triple ``(mu^{1/2} u, u_t, w)`` through the 3x3 matrix

    [[ 0,         mu^{1/2},  0       ],
     [-mu^{1/2},  0,         mu^alpha],
     [ 0,        -mu^alpha, -mu^beta ]]

The first component carries the ``D(A^{1/2})`` weight, so the Euclidean
2-norm of any function of this matrix equals the energy norm of the same
function of the unscaled block.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _kernels_py as _np_kernels


class DomainError(ValueError):
    """Input outside the domain where the model is defined."""


@dataclass(frozen=True)
class ExponentPair:
    """Coupling exponent ``alpha`` and damping exponent ``beta``."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            try:
                v = float(v)
            except (TypeError, ValueError):
                raise DomainError(f"{name} must be a real number, got {v!r}") from None
            if not np.isfinite(v) or v < 0.0 or v > 1.0:
                raise DomainError(f"{name}={v} is outside [0, 1]")
            object.__setattr__(self, name, v)

    def __iter__(self):
        return iter((self.alpha, self.beta))


@dataclass(frozen=True, eq=False)
class ModalBlock:
    mu: float
    pair: ExponentPair
    entries: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class BlockSpectrum:
    eigenvalues: np.ndarray
    slow_eigenvalue: complex


def _check_mu(mu):
    try:
        mu = float(mu)
    except (TypeError, ValueError):
        raise DomainError(f"mu must be a real number, got {mu!r}") from None
    if not np.isfinite(mu) or mu <= 0.0:
        raise DomainError(f"mu={mu} is not a positive eigenvalue (A must be positive definite)")
    return mu


def build_block(mu, pair):
    """Energy-coordinate block of the generator at spectral point ``mu``.

    Parameters
    ----------
    mu : float
        Eigenvalue of ``A``; must be positive.
    pair : ExponentPair

    Returns
    -------
    ModalBlock
        ``entries`` is a read-only float array.
    """
    mu = _check_mu(mu)
    if not isinstance(pair, ExponentPair):
        pair = ExponentPair(*pair)
    m = np.sqrt(mu)
    a = mu**pair.alpha
    b = mu**pair.beta
    entries = np.array([[0.0, m, 0.0], [-m, 0.0, a], [0.0, -a, -b]])
    entries.setflags(write=False)
    return ModalBlock(mu, pair, entries)


def char_poly_coeffs(block):
    """Coefficients ``(c2, c1, c0)`` of ``det(lam I - B) = lam^3 + c2 lam^2 + c1 lam + c0``.

    Computed from the entries by expansion: ``c2 = -tr B``, ``c1`` is the sum
    of principal 2x2 minors and ``c0 = -det B``.
    """
    M = block.entries
    c2 = -(M[0, 0] + M[1, 1] + M[2, 2])
    c1 = (
        M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        + M[0, 0] * M[2, 2] - M[0, 2] * M[2, 0]
        + M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1]
    )
    det = (
        M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
        - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
        + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0])
    )
    return float(c2), float(c1), float(-det)


def closed_form_coeffs(mu, pair):
    """``(mu^beta, mu + mu^{2 alpha}, mu^{1+beta})``."""
    mu = _check_mu(mu)
    return mu**pair.beta, mu + mu ** (2.0 * pair.alpha), mu ** (1.0 + pair.beta)


def block_eigenvalues(block):
    L = _np_kernels.eigenvalues(np.array([block.mu]), block.pair.alpha, block.pair.beta)[0]
    return BlockSpectrum(eigenvalues=L, slow_eigenvalue=complex(L[0]))


def block_resolvent_norm(s, block, method="adjugate"):
    """``||(i s I - B)^{-1}||_2``.

    ``method="adjugate"`` inverts through the closed-form cofactors and the
    characteristic polynomial at ``i s``; it stays accurate when the block
    norm is huge and ``s`` is small.  ``method="svd"`` returns the
    reciprocal smallest singular value of ``i s I - B``, which is only
    reliable while ``||B|| / sigma_min`` stays well below ``1/eps``.
    """
    s = float(s)
    if method == "adjugate":
        return float(_np_kernels.resolvent_norms(s, [block.mu], block.pair.alpha, block.pair.beta)[0])
    if method == "svd":
        M = 1j * s * np.eye(3) - block.entries
        return float(1.0 / np.linalg.svd(M, compute_uv=False)[-1])
    raise ValueError(f"unknown method {method!r}")


def _projectors(block):
    L, P, kappa = _np_kernels.spectral_projectors([block.mu], block.pair.alpha, block.pair.beta)
    return L[0], P[0], float(kappa[0].max())


def block_exponential(t, block, method="auto"):
    """``exp(t B)`` as a real 3x3 array.

    The eigendecomposition route is used unless an eigenvalue condition
    number exceeds ``1e8`` (near-defective block), in which case
    ``scipy.linalg.expm`` (scaling and squaring with Pade) is used.
    """
    t = float(t)
    if t < 0.0:
        raise DomainError("t must be nonnegative")
    if t == 0.0:
        return np.eye(3)
    if method in ("auto", "eig"):
        L, P, kappa = _projectors(block)
        if method == "eig" or kappa <= _np_kernels.KAPPA_MAX:
            return np.einsum("r,rij->ij", np.exp(t * L), P).real
    elif method != "pade":
        raise ValueError(f"unknown method {method!r}")
    return scipy.linalg.expm(t * block.entries)


def _smoothing(block, weight):
    B = block.entries
    if weight == "none":
        return np.eye(3)
    inv = np.linalg.inv(np.eye(3) - B)
    if weight == "smoothed":
        return inv
    if weight == "conditioned":
        return B @ inv
    raise ValueError(f"unknown weight {weight!r}")


def block_conditioned_norm(t, block, weight="conditioned", method="auto"):
    """``||exp(tB) B (I-B)^{-1}||_2`` and its variants.

    ``weight="smoothed"`` drops the factor ``B``; ``weight="none"`` gives the
    plain contraction norm ``||exp(tB)||_2``.
    """
    t = float(t)
    if t < 0.0:
        raise DomainError("t must be nonnegative")
    if t == 0.0:
        if weight == "none":
            return 1.0
        return float(np.linalg.norm(_smoothing(block, weight), 2))
    if method in ("auto", "eig"):
        L, P, kappa = _projectors(block)
        if method == "eig" or kappa <= _np_kernels.KAPPA_MAX:
            code = {"none": 0, "conditioned": 1, "smoothed": 2}[weight]
            f = _np_kernels._weights(L, t, code)
            return float(np.linalg.norm(np.einsum("r,rij->ij", f, P).real, 2))
    elif method != "pade":
        raise ValueError(f"unknown method {method!r}")
    G = _smoothing(block, weight)
    return float(np.linalg.norm(scipy.linalg.expm(t * block.entries) @ G, 2))
