"""Backend selection for the batched modal kernels.

The compiled extension ``hyplab._kernels`` is used when it was built;
otherwise, or when ``HYPLAB_BACKEND=python`` is set, the numpy module
``hyplab._kernels_py`` is used.  Both expose the same functions.

Modes whose eigenbasis is too ill-conditioned for the spectral-projector
formula come back flagged from the backend; ``semigroup_norms`` below
recomputes them by scaling-and-squaring so callers always get finite values.
"""
import os

import numpy as np

from . import _kernels_py

WEIGHTS = {"none": 0, "conditioned": 1, "smoothed": 2}


def _load_compiled():
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = _load_compiled()

if os.environ.get("HYPLAB_BACKEND", "").lower() == "python" or _compiled is None:
    backend = _kernels_py
    BACKEND = "python"
else:
    backend = _compiled
    BACKEND = "cython"


def available_backends():
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


def get_backend(name=None):
    if name is None:
        return backend
    backends = available_backends()
    if name not in backends:
        raise ValueError(f"backend {name!r} not available (have {sorted(backends)})")
    return backends[name]


def threads():
    """Thread cap from ``HYPLAB_THREADS`` (default: all cores)."""
    raw = os.environ.get("HYPLAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"HYPLAB_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def weight_code(weight):
    if isinstance(weight, int):
        return weight
    try:
        return WEIGHTS[weight]
    except KeyError:
        raise ValueError(f"unknown weight {weight!r}; expected one of {sorted(WEIGHTS)}") from None


def eigenvalues(mus, alpha, beta, impl=None):
    return get_backend(impl).eigenvalues(mus, float(alpha), float(beta), threads())


def spectral_abscissa(mus, alpha, beta, impl=None):
    return get_backend(impl).spectral_abscissa(mus, float(alpha), float(beta), threads())


def resolvent_norms(s, mus, alpha, beta, impl=None):
    return get_backend(impl).resolvent_norms(float(s), mus, float(alpha), float(beta), threads())


def semigroup_norms(ts, mus, alpha, beta, weight, impl=None):
    """Matrix of block norms, shape ``(len(ts), len(mus))``, no NaNs."""
    from .blockcore import ExponentPair, build_block, block_conditioned_norm

    code = weight_code(weight)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    values, flags = get_backend(impl).semigroup_norms(
        ts, mus, float(alpha), float(beta), code, threads()
    )
    bad = np.flatnonzero(flags)
    if bad.size:
        pair = ExponentPair(alpha, beta)
        name = {v: k for k, v in WEIGHTS.items()}[code]
        for j in bad:
            block = build_block(mus[j], pair)
            for i, t in enumerate(ts):
                values[i, j] = block_conditioned_norm(t, block, weight=name, method="pade")
    return values
