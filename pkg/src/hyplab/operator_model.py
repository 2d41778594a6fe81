"""Generator assembled over a spectrum of ``A``.

Because ``A`` is self-adjoint the generator is block diagonal in an
orthonormal eigenbasis of ``A``, so every operator norm of a function of the
generator is the supremum of the corresponding block norms.  For discrete
spectra the supremum is an exact maximum over modes; for a continuum
``[mu_min, mu_max]`` it is found adaptively: a log-spaced scan plus
problem-specific seeds, with each local maximum refined by golden-section
search in ``log mu``.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .blockcore import DomainError, ExponentPair

_KINDS = ("power_law", "geometric", "explicit", "continuum")
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
# cap on len(ts) * len(modes) per kernel call, bounds peak memory
_CELL_BUDGET = 4_000_000


@dataclass(frozen=True)
class SpectrumSpec:
    """Description of the spectrum of ``A``.

    Use the constructors :meth:`power_law`, :meth:`geometric`,
    :meth:`explicit`, :meth:`continuum` or :meth:`parse`.
    """

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown spectrum kind {self.kind!r}")
        p = self.params
        if self.kind == "power_law":
            c, e, n = p
            if not (c > 0 and e > 0 and np.isfinite(c) and np.isfinite(e)):
                raise DomainError("power_law needs c > 0 and p > 0")
            _check_count(n)
        elif self.kind in ("geometric", "continuum"):
            lo, hi = p[0], p[1]
            if not (np.isfinite(lo) and np.isfinite(hi) and 0 < lo < hi):
                raise DomainError(f"{self.kind} needs 0 < mu_min < mu_max, got {lo}, {hi}")
            if self.kind == "geometric":
                _check_count(p[2])
        else:
            if len(p) == 0:
                raise DomainError("explicit spectrum is empty")
            vals = np.asarray(p, dtype=float)
            if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
                raise DomainError("explicit spectrum values must be positive and finite")

    @classmethod
    def power_law(cls, c=1.0, p=2.0, count=400):
        return cls("power_law", (float(c), float(p), _as_count(count)))

    @classmethod
    def geometric(cls, mu_min=1.0, mu_max=1e14, count=400):
        return cls("geometric", (float(mu_min), float(mu_max), _as_count(count)))

    @classmethod
    def explicit(cls, values):
        vals = np.asarray([float(v) for v in values])
        return cls("explicit", tuple(np.unique(vals).tolist()) if vals.size else ())

    @classmethod
    def continuum(cls, mu_min, mu_max):
        return cls("continuum", (float(mu_min), float(mu_max)))

    @classmethod
    def parse(cls, text):
        """Parse ``power:c,p,N``, ``geometric:lo,hi,N``, ``explicit:m1;m2;...`` or ``continuum:lo,hi``."""
        try:
            head, _, body = text.partition(":")
            head = head.strip().lower()
            if head in ("power", "power_law"):
                c, p, n = body.split(",")
                return cls.power_law(float(c), float(p), _as_count(float(n)))
            if head == "geometric":
                lo, hi, n = body.split(",")
                return cls.geometric(float(lo), float(hi), _as_count(float(n)))
            if head == "explicit":
                return cls.explicit(float(v) for v in body.split(";") if v.strip())
            if head == "continuum":
                lo, hi = body.split(",")
                return cls.continuum(float(lo), float(hi))
        except (ValueError, TypeError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"malformed spectrum {text!r}: {exc}") from None
        raise DomainError(f"malformed spectrum {text!r}")

    def to_string(self):
        p = self.params
        if self.kind == "power_law":
            return f"power:{p[0]!r},{p[1]!r},{p[2]}"
        if self.kind == "geometric":
            return f"geometric:{p[0]!r},{p[1]!r},{p[2]}"
        if self.kind == "continuum":
            return f"continuum:{p[0]!r},{p[1]!r}"
        return "explicit:" + ";".join(repr(v) for v in p)

    @property
    def is_continuum(self):
        return self.kind == "continuum"

    @property
    def bounds(self):
        if self.is_continuum:
            return self.params
        modes = spectrum_modes(self)
        return float(modes[0]), float(modes[-1])


def _as_count(n):
    if isinstance(n, float):
        if not n.is_integer():
            raise DomainError(f"mode count must be an integer, got {n}")
        n = int(n)
    return n


def _check_count(n):
    if not isinstance(n, (int, np.integer)) or n <= 0:
        raise DomainError(f"mode count must be a positive integer, got {n!r}")


@dataclass(frozen=True)
class OperatorModel:
    pair: ExponentPair
    spectrum: SpectrumSpec

    def __post_init__(self):
        if not isinstance(self.pair, ExponentPair):
            object.__setattr__(self, "pair", ExponentPair(*self.pair))


@dataclass(frozen=True)
class GapProfile:
    samples: list
    global_gap: float
    argmax_mu: float


def spectrum_modes(spec):
    """Sorted, de-duplicated eigenvalues of ``A`` for a discrete spectrum."""
    if spec.is_continuum:
        raise DomainError("continuum spectrum has no finite mode list; use adaptive sup operations")
    p = spec.params
    if spec.kind == "power_law":
        c, e, n = p
        modes = c * np.arange(1, n + 1, dtype=float) ** e
    elif spec.kind == "geometric":
        modes = np.geomspace(p[0], p[1], p[2])
    else:
        modes = np.asarray(p, dtype=float)
    modes = np.unique(modes)
    if not np.all(np.isfinite(modes)) or np.any(modes <= 0):
        raise DomainError("spectrum produced non-positive or non-finite modes")
    return modes


# --- continuum search ------------------------------------------------------

def _golden_max(f, lo, hi, f_lo, f_hi, rtol=1e-6, max_iter=200):
    """Maximize ``f(mu)`` over ``[lo, hi]`` by golden-section search in ``log mu``.

    Stops once the four bracketing values agree to ``rtol`` relative, i.e.
    further refinement cannot raise the maximum by more than about ``rtol``.
    """
    a, b = math.log(lo), math.log(hi)
    fa, fb = f_lo, f_hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(math.exp(c)), f(math.exp(d))
    best_x, best_v = (lo, fa) if fa >= fb else (hi, fb)
    for _ in range(max_iter):
        for x, v in ((c, fc), (d, fd)):
            if v > best_v:
                best_x, best_v = math.exp(x), v
        top = max(fa, fb, fc, fd)
        bottom = min(fa, fb, fc, fd)
        if top - bottom <= rtol * abs(top) or (b - a) <= 1e-14 * max(1.0, abs(a)):
            break
        if fc >= fd:
            b, fb = d, fd
            d, fd = c, fc
            c = b - _INVPHI * (b - a)
            fc = f(math.exp(c))
        else:
            a, fa = c, fc
            c, fc = d, fd
            d = a + _INVPHI * (b - a)
            fd = f(math.exp(d))
    return best_x, best_v


def adaptive_sup(fvec, lo, hi, seeds=(), n_grid=257, n_local=33, local_decades=0.25, top_k=6):
    """Supremum of a real function of ``mu`` over ``[lo, hi]``.

    Parameters
    ----------
    fvec : callable
        Vectorized in ``mu`` (1-D array in, 1-D array out).
    seeds : iterable of float
        Points where a narrow peak is expected; each gets a dense local scan.

    Returns
    -------
    (value, argmax_mu)
    """
    pts = [np.geomspace(lo, hi, n_grid)]
    for s in seeds:
        if not np.isfinite(s) or s <= 0:
            continue
        s = min(max(s, lo), hi)
        pts.append(np.array([s]))
        w = 10.0**local_decades
        pts.append(np.geomspace(max(lo, s / w), min(hi, s * w), n_local))
    mus = np.unique(np.concatenate(pts))
    # grids that meet at a shared point can differ by an ulp; a near-duplicate
    # would make a zero-width bracket around the peak
    mus = mus[np.concatenate([[True], np.diff(np.log(mus)) > 1e-12])]
    vals = np.asarray(fvec(mus), dtype=float)
    n = mus.size
    best_i = int(np.argmax(vals))
    best_v, best_mu = float(vals[best_i]), float(mus[best_i])

    left = np.concatenate([[-np.inf], vals[:-1]])
    right = np.concatenate([vals[1:], [-np.inf]])
    peaks = np.flatnonzero((vals >= left) & (vals >= right))
    peaks = peaks[np.argsort(-vals[peaks], kind="stable")][:top_k]

    def f(mu):
        return float(fvec(np.array([mu]))[0])

    for i in peaks:
        i0, i1 = max(i - 1, 0), min(i + 1, n - 1)
        if i1 == i0:
            continue
        mu, v = _golden_max(f, mus[i0], mus[i1], vals[i0], vals[i1])
        if v > best_v or (v == best_v and mu < best_mu):
            best_v, best_mu = v, mu
    return best_v, best_mu


def _solve_log(g, lo, hi):
    """Roots of ``g(mu)`` on ``[lo, hi]`` located on a log grid and polished by brentq."""
    grid = np.geomspace(lo, hi, 129)
    vals = np.array([g(m) for m in grid])
    roots = []
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        x = brentq(lambda y: g(math.exp(y)), math.log(grid[i]), math.log(grid[i + 1]), xtol=1e-12)
        roots.append(math.exp(x))
    return roots


def resonance_seeds(pair, s, lo, hi):
    """Where the oscillatory pair of a block is expected to resonate with frequency ``s``."""
    s = abs(float(s))
    seeds = []
    if s > 0 and pair.alpha > 0:
        log_seed = math.log(s) / pair.alpha
        if math.log(lo) <= log_seed <= math.log(hi):
            seeds.append(math.exp(log_seed))
    if s > 0:
        # natural frequency sqrt(mu + mu^{2 alpha}) equal to s
        seeds += _solve_log(lambda m: math.log(m + m ** (2 * pair.alpha)) - 2 * math.log(s), lo, hi)
    return seeds


def slow_mode_seeds(pair, t, lo, hi):
    """Points where ``t |slow eigenvalue(mu)| = 1``, the maximizer of ``x exp(-t x)``."""
    if t <= 0:
        return []
    grid = np.geomspace(lo, hi, 129)
    slow = np.abs(kernels.eigenvalues(grid, pair.alpha, pair.beta)[:, 0])
    h = np.log(t * slow)
    seeds = []
    for i in np.flatnonzero(np.sign(h[:-1]) * np.sign(h[1:]) < 0):
        def g(y):
            return math.log(t * abs(kernels.eigenvalues([math.exp(y)], pair.alpha, pair.beta)[0, 0]))
        seeds.append(math.exp(brentq(g, math.log(grid[i]), math.log(grid[i + 1]), xtol=1e-12)))
    return seeds


# --- global quantities -----------------------------------------------------

def global_resolvent_norm(model, s):
    """``sup_mu ||(i s - B(mu))^{-1}||`` and the maximizing ``mu``."""
    pair = model.pair
    s = float(s)
    if model.spectrum.is_continuum:
        if s == 0.0:
            raise DomainError("resolvent singular at accumulation point (s = 0 on a continuum spectrum)")
        lo, hi = model.spectrum.params
        return adaptive_sup(
            lambda mus: kernels.resolvent_norms(s, mus, pair.alpha, pair.beta),
            lo, hi, seeds=resonance_seeds(pair, s, lo, hi),
        )
    modes = spectrum_modes(model.spectrum)
    vals = kernels.resolvent_norms(s, modes, pair.alpha, pair.beta)
    i = int(np.argmax(vals))
    return float(vals[i]), float(modes[i])


def semigroup_sup_curve(model, ts, weight="conditioned"):
    """Vector of ``global_semigroup_norm`` over many times at once.

    Returns
    -------
    norms, argmax_mu : ndarray
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts < 0):
        raise DomainError("t must be nonnegative")
    kernels.weight_code(weight)
    pair = model.pair
    norms = np.empty(ts.size)
    arg = np.empty(ts.size)
    if model.spectrum.is_continuum:
        for i, t in enumerate(ts):
            norms[i], arg[i] = global_semigroup_norm(model, t, weight)
        return norms, arg
    modes = spectrum_modes(model.spectrum)
    chunk = max(1, _CELL_BUDGET // modes.size)
    for start in range(0, ts.size, chunk):
        sl = slice(start, start + chunk)
        vals = kernels.semigroup_norms(ts[sl], modes, pair.alpha, pair.beta, weight)
        idx = np.argmax(vals, axis=1)
        norms[sl] = vals[np.arange(idx.size), idx]
        arg[sl] = modes[idx]
    return norms, arg


def global_semigroup_norm(model, t, weight="conditioned"):
    """Supremum over modes of ``||exp(tB) g(B)||`` and the maximizing ``mu``.

    ``weight`` selects ``g``: ``"none"`` (identity), ``"conditioned"``
    (``B (I-B)^{-1}``) or ``"smoothed"`` (``(I-B)^{-1}``).
    """
    t = float(t)
    if t < 0:
        raise DomainError("t must be nonnegative")
    pair = model.pair
    if not model.spectrum.is_continuum:
        n, a = semigroup_sup_curve(model, [t], weight)
        return float(n[0]), float(a[0])
    lo, hi = model.spectrum.params
    if t == 0.0 and weight == "none":
        return 1.0, lo
    return adaptive_sup(
        lambda mus: kernels.semigroup_norms([t], mus, pair.alpha, pair.beta, weight)[0],
        lo, hi, seeds=slow_mode_seeds(pair, t, lo, hi),
    )


def gap_profile(model, n_samples=200):
    """Per-mode spectral abscissa and its supremum.

    For a continuum the samples are a log grid of ``n_samples`` points and
    the supremum is searched adaptively, endpoints included.
    """
    pair = model.pair
    if model.spectrum.is_continuum:
        lo, hi = model.spectrum.params
        mus = np.geomspace(lo, hi, n_samples)
        vals = kernels.spectral_abscissa(mus, pair.alpha, pair.beta)
        gap, arg = adaptive_sup(lambda m: kernels.spectral_abscissa(m, pair.alpha, pair.beta), lo, hi)
    else:
        mus = spectrum_modes(model.spectrum)
        vals = kernels.spectral_abscissa(mus, pair.alpha, pair.beta)
        i = int(np.argmax(vals))
        gap, arg = float(vals[i]), float(mus[i])
    samples = list(zip(mus.tolist(), vals.tolist()))
    return GapProfile(samples=samples, global_gap=float(gap), argmax_mu=float(arg))


def default_spectrum():
    """400 geometric modes on ``[1, 1e14]``: enough log coverage for the default fit windows."""
    return SpectrumSpec.geometric(1.0, 1e14, 400)
