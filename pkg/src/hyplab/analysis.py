"""Sweeps over frequency and time, exponent fits and region maps."""
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import operator_model as om
from .blockcore import DomainError, ExponentPair
from .regions import classify, require_s3

RESOLVENT_WINDOW = (1e-4, 1e-1)
DECAY_WINDOW = (10.0, 10**3.5)
SMALL_SPECTRUM = "spectrum too small for t_max; tail is exponential, not polynomial"


class PreconditionWarning(UserWarning):
    """A sweep ran outside the regime where its fitted exponent is meaningful."""


@dataclass(frozen=True)
class SweepResult:
    axis: np.ndarray
    values: np.ndarray
    argmax_mu: np.ndarray
    warning: str | None = None

    def __post_init__(self):
        for name in ("axis", "values", "argmax_mu"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.axis.size
        if self.values.size != n or self.argmax_mu.size != n:
            raise ValueError("axis, values and argmax_mu must have equal lengths")
        if n > 1 and np.any(np.diff(self.axis) <= 0):
            raise ValueError("sweep axis must be strictly increasing")


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    max_rel_residual: float
    window: tuple


@dataclass(frozen=True)
class BctReport:
    gamma_resolvent: float
    gamma_decay: float
    consistent: bool
    resolvent_fit: FitResult = field(repr=False)
    decay_fit: FitResult = field(repr=False)


def _window_points(points, window, need_positive_axis):
    axis, values = points.axis, points.values
    lo, hi = (axis[0], axis[-1]) if window is None else window
    # a hair of slack so window edges taken from the same grid are included
    sel = (axis >= lo * (1 - 1e-12)) & (axis <= hi * (1 + 1e-12))
    if need_positive_axis:
        sel &= axis > 0
    x, y = axis[sel], values[sel]
    if x.size < 5:
        raise DomainError(f"fit needs at least 5 points in window [{lo}, {hi}], got {x.size}")
    if np.any(~np.isfinite(y)) or np.any(y <= 0):
        raise DomainError("fit needs strictly positive finite values")
    return x, y, (float(lo), float(hi))


def _ols(x, y):
    # fsum over ascending-axis lists: deterministic and insensitive to order
    n = len(x)
    xm = math.fsum(x) / n
    ym = math.fsum(y) / n
    sxx = math.fsum((xi - xm) ** 2 for xi in x)
    sxy = math.fsum((xi - xm) * (yi - ym) for xi, yi in zip(x, y))
    slope = sxy / sxx
    intercept = ym - slope * xm
    resid = max(abs(yi - (intercept + slope * xi)) for xi, yi in zip(x, y))
    return slope, intercept, resid


def fit_loglog(points, window=None):
    """Least-squares line through ``(log axis, log value)`` restricted to ``window``.

    ``max_rel_residual`` is the largest ``|log value - log fit|``, which is
    the relative misfit to first order.  Logs are natural.
    """
    x, y, window = _window_points(points, window, need_positive_axis=True)
    slope, intercept, resid = _ols(np.log(x).tolist(), np.log(y).tolist())
    return FitResult(slope, intercept, resid, window)


def fit_semilog(points, window=None):
    """Least-squares line through ``(axis, log value)``; the slope is a rate."""
    x, y, window = _window_points(points, window, need_positive_axis=False)
    slope, intercept, resid = _ols(x.tolist(), np.log(y).tolist())
    return FitResult(slope, intercept, resid, window)


def resolvent_sweep(model, s_min, s_max, n_points=40):
    """``global_resolvent_norm`` on a log grid of frequencies."""
    if not 0 < s_min < s_max:
        raise DomainError("resolvent sweep needs 0 < s_min < s_max")
    if n_points < 10:
        raise DomainError("resolvent sweep needs at least 10 points")
    axis = np.geomspace(s_min, s_max, n_points)
    out = [om.global_resolvent_norm(model, s) for s in axis]
    return SweepResult(axis, [v for v, _ in out], [m for _, m in out])


def slow_timescale(model):
    """``mu_max^{2 alpha - 1 - beta}``, beyond which a finite S3 spectrum decays exponentially."""
    a, b = model.pair
    _, hi = model.spectrum.bounds
    return hi ** (2 * a - 1 - b)


def decay_sweep(model, t_min, t_max, n_points=40, weight="conditioned"):
    """``global_semigroup_norm`` on a log grid of times.

    With ``t_min == 0`` the grid is ``0`` followed by ``n_points - 1``
    log-spaced times from ``min(1, t_max / 10)`` to ``t_max``.  For S3 pairs
    a warning is attached (and emitted) when the largest mode is too small
    for a polynomial tail to persist up to ``t_max``.
    """
    if not 0 <= t_min < t_max:
        raise DomainError("decay sweep needs 0 <= t_min < t_max")
    if n_points < 2:
        raise DomainError("decay sweep needs at least 2 points")
    if t_min == 0:
        axis = np.concatenate([[0.0], np.geomspace(min(1.0, t_max / 10), t_max, n_points - 1)])
    else:
        axis = np.geomspace(t_min, t_max, n_points)
    warning = None
    if classify(model.pair).label == "S3" and slow_timescale(model) < t_max:
        warning = SMALL_SPECTRUM
        warnings.warn(SMALL_SPECTRUM, PreconditionWarning, stacklevel=2)
    values, arg = om.semigroup_sup_curve(model, axis, weight)
    return SweepResult(axis, values, arg, warning)


def bct_from_sweeps(resolvent, decay, s_window=None, t_window=None):
    """Compare the two sides of the resolvent/decay equivalence on given sweeps.

    A resolvent growing like ``|s|^-gamma`` near zero corresponds to
    conditioned decay like ``t^(-1/gamma)``.
    """
    rfit = fit_loglog(resolvent, s_window)
    dfit = fit_loglog(decay, t_window)
    g_res = -rfit.slope
    g_dec = -1.0 / dfit.slope if dfit.slope != 0 else math.inf
    consistent = abs(g_res - g_dec) <= 0.2 and abs(g_res - 1) <= 0.2 and abs(g_dec - 1) <= 0.2
    return BctReport(g_res, g_dec, bool(consistent), rfit, dfit)


def bct_crosscheck(model, s_window=RESOLVENT_WINDOW, t_window=DECAY_WINDOW, n_points=30):
    require_s3(model.pair)
    res = resolvent_sweep(model, *s_window, n_points)
    dec = decay_sweep(model, *t_window, n_points, weight="conditioned")
    return bct_from_sweeps(res, dec, s_window, t_window)


METRICS = ("label", "near_zero_slope", "decay_slope", "gap")


def decay_weight(label):
    """Weight whose decay exponent is compared with the region prediction, or None."""
    if label == "S3":
        return "conditioned"
    if label in ("S1", "S2", "S1_S2_overlap"):
        return "smoothed"
    return None


def _metric(name, model, label):
    if name == "gap":
        return om.gap_profile(model).global_gap, None
    if name == "near_zero_slope":
        sweep = resolvent_sweep(model, *RESOLVENT_WINDOW, 20)
        return fit_loglog(sweep).slope, None
    weight = decay_weight(label)
    if weight is None:
        return math.nan, "decay_slope: exponential region, no polynomial exponent"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PreconditionWarning)
        sweep = decay_sweep(model, *DECAY_WINDOW, 20, weight=weight)
    note = f"decay_slope: {SMALL_SPECTRUM}" if sweep.warning else None
    try:
        return fit_loglog(sweep).slope, note
    except DomainError as exc:
        return math.nan, "; ".join(filter(None, [note, f"decay_slope: {exc}"]))


def region_map(grid_n, metrics=("label",), spectrum=None, time_budget=10.0):
    """Evaluate ``metrics`` on a ``grid_n`` x ``grid_n`` grid of the unit square.

    Rows come in row-major order with ``alpha`` as the outer index.  A metric
    that fails, or that would start after the point has used up
    ``time_budget`` seconds, is recorded as NaN and explained in ``note``.

    Returns
    -------
    list of dict
        Keys ``alpha, beta, label, boundary, near_zero_slope, decay_slope,
        gap, note``.
    """
    if grid_n < 2:
        raise DomainError("region map needs grid_n >= 2")
    metrics = set(metrics)
    unknown = metrics - set(METRICS)
    if unknown:
        raise DomainError(f"unknown metrics {sorted(unknown)}")
    spectrum = spectrum or om.default_spectrum()
    grid = np.linspace(0.0, 1.0, grid_n)
    rows = []
    for a in grid:
        for b in grid:
            pair = ExponentPair(a, b)
            region = classify(pair)
            row = {
                "alpha": float(a), "beta": float(b),
                "label": region.label, "boundary": region.boundary,
                "near_zero_slope": math.nan, "decay_slope": math.nan, "gap": math.nan,
            }
            notes = []
            model = om.OperatorModel(pair, spectrum)
            start = time.perf_counter()
            for name in ("gap", "near_zero_slope", "decay_slope"):
                if name not in metrics:
                    continue
                if time.perf_counter() - start > time_budget:
                    notes.append(f"{name}: time budget exceeded")
                    continue
                try:
                    row[name], note = _metric(name, model, region.label)
                except (DomainError, ValueError, FloatingPointError) as exc:
                    note = f"{name}: {exc}"
                if note:
                    notes.append(note)
            row["note"] = "; ".join(notes)
            rows.append(row)
    return rows
