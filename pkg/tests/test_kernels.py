import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyplab import kernels
from hyplab.blockcore import ExponentPair, block_conditioned_norm, build_block

BACKENDS = sorted(kernels.available_backends())
needs_compiled = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")

unit = st.floats(0.0, 1.0)
MUS = np.geomspace(1e-3, 1e14, 301)


@needs_compiled
def test_compiled_backend_is_default():
    if os.environ.get("HYPLAB_BACKEND", "").lower() != "python":
        assert kernels.BACKEND == "cython"


def test_python_backend_forced_by_environment():
    env = dict(os.environ, HYPLAB_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "from hyplab import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_thread_cap_parsing(monkeypatch):
    monkeypatch.setenv("HYPLAB_THREADS", "3")
    assert kernels.threads() == 3
    monkeypatch.setenv("HYPLAB_THREADS", "zero")
    with pytest.raises(ValueError):
        kernels.threads()


@needs_compiled
@given(unit, unit)
def test_backends_agree_on_eigenvalues(alpha, beta):
    a = kernels.eigenvalues(MUS, alpha, beta, impl="cython")
    b = kernels.eigenvalues(MUS, alpha, beta, impl="python")
    np.testing.assert_allclose(a, b, rtol=1e-11)
    np.testing.assert_allclose(a.real, b.real, rtol=1e-10)


@needs_compiled
@given(unit, unit, st.floats(-1e6, 1e6))
def test_backends_agree_on_resolvent(alpha, beta, s):
    a = kernels.resolvent_norms(s, MUS, alpha, beta, impl="cython")
    b = kernels.resolvent_norms(s, MUS, alpha, beta, impl="python")
    np.testing.assert_allclose(a, b, rtol=1e-11)


@needs_compiled
@pytest.mark.parametrize("weight", ["none", "conditioned", "smoothed"])
@given(alpha=unit, beta=unit)
def test_backends_agree_on_semigroup(weight, alpha, beta):
    ts = np.array([0.0, 0.5, 10.0, 1e3])
    mus = np.geomspace(1e-2, 1e12, 60)
    a = kernels.semigroup_norms(ts, mus, alpha, beta, weight, impl="cython")
    b = kernels.semigroup_norms(ts, mus, alpha, beta, weight, impl="python")
    scale = max(1.0, np.abs(b).max())
    np.testing.assert_allclose(a, b, rtol=1e-8, atol=1e-13 * scale)


@pytest.mark.parametrize("impl", BACKENDS)
def test_semigroup_matches_block_layer(impl, rng):
    mus = np.geomspace(0.1, 1e6, 25)
    for _ in range(5):
        alpha, beta = rng.uniform(0, 1, 2)
        pair = ExponentPair(alpha, beta)
        t = rng.uniform(0, 30)
        for weight in ("none", "conditioned", "smoothed"):
            vals = kernels.semigroup_norms([t], mus, alpha, beta, weight, impl=impl)[0]
            ref = [block_conditioned_norm(t, build_block(m, pair), weight, method="pade") for m in mus]
            np.testing.assert_allclose(vals, ref, rtol=1e-7, atol=1e-13)


def _double_root_mu(alpha, beta, lo, hi):
    """``mu`` where the characteristic cubic has a double root (zero discriminant)."""
    import mpmath
    from scipy.optimize import brentq

    def disc(lm):
        mpmath.mp.dps = 50
        mu = mpmath.mpf(10) ** lm
        c2, c1, c0 = mu**beta, mu + mu ** (2 * alpha), mu ** (1 + beta)
        d = 18 * c2 * c1 * c0 - 4 * c2**3 * c0 + c2**2 * c1**2 - 4 * c1**3 - 27 * c0**2
        return float(d / mu**3)

    return 10.0 ** brentq(disc, np.log10(lo), np.log10(hi), xtol=1e-15)


@pytest.mark.parametrize("impl", BACKENDS)
def test_near_defective_modes(impl):
    alpha, beta = 0.725, 0.875
    root = _double_root_mu(alpha, beta, 5e3, 8e3)
    # the double root only exists to a few ulps, so scan its neighbourhood
    mus = root * (1 + np.arange(-2000, 2000) * 4e-16)
    raw, flags = kernels.get_backend(impl).semigroup_norms(np.array([1.0]), mus, alpha, beta, 1, 1)
    assert flags.any()
    assert np.isnan(raw[0, flags.astype(bool)]).all()
    fixed = kernels.semigroup_norms([1.0], mus, alpha, beta, "conditioned", impl=impl)[0]
    pair = ExponentPair(alpha, beta)
    for j in list(np.flatnonzero(flags)) + [0, 1000, 1999, 3999]:
        ref = block_conditioned_norm(1.0, build_block(mus[j], pair), method="pade")
        assert fixed[j] == pytest.approx(ref, rel=1e-6)


@needs_compiled
def test_thread_count_does_not_change_results(monkeypatch):
    mus = np.geomspace(1, 1e14, 4001)
    out = []
    for n in ("1", "4"):
        monkeypatch.setenv("HYPLAB_THREADS", n)
        out.append((kernels.eigenvalues(mus, 0.9, 0.5), kernels.resolvent_norms(1e-3, mus, 0.9, 0.5),
                    kernels.semigroup_norms([1.0, 100.0], mus, 0.9, 0.5, "conditioned")))
    for a, b in zip(*out):
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("impl", BACKENDS)
def test_unit_time_zero_weight_none(impl):
    vals = kernels.semigroup_norms([0.0], MUS, 0.9, 0.5, "none", impl=impl)
    assert np.all(vals == 1.0)


@needs_compiled
def test_tiny_norms_do_not_underflow():
    # values near 1e-162 square to below the double range inside a Gram matrix
    mus = np.geomspace(1, 1e14, 100_000)
    ts = np.array([2000.0, 3162.0])
    a = kernels.semigroup_norms(ts, mus, 0.9, 0.5, "conditioned", impl="cython")
    b = kernels.semigroup_norms(ts, mus, 0.9, 0.5, "conditioned", impl="python")
    live = b > 1e-300
    assert np.any(live & (b < 1e-150))
    np.testing.assert_allclose(a[live], b[live], rtol=1e-9)
