"""Stability regions of the exponent square and their predicted decay.

The four regions are defined by linear inequalities in ``(alpha, beta)``:

* ``S``:  ``max(1 - 2a, 2a - 1) <= b <= 2a``
* ``S1``: ``b - 2a > 0`` and ``1/2 <= b <= 1``
* ``S2``: ``b < 1 - 2a`` and ``0 <= b <= 1/2``
* ``S3``: ``b < 2a - 1``

``S1`` and ``S2`` as written share the segment ``b = 1/2, a < 1/4``, which
gets its own label.  Non-strict inequalities are tested with slack ``TOL``
and strict ones with margin ``TOL``, so the predicates stay disjoint apart
from that segment and cover the whole square.
"""
from dataclasses import dataclass

from .blockcore import DomainError, ExponentPair

TOL = 1e-12
LABELS = ("S", "S1", "S2", "S3", "S1_S2_overlap")


@dataclass(frozen=True)
class RegionLabel:
    label: str
    boundary: bool


@dataclass(frozen=True)
class StabilityPrediction:
    """Predicted long-time behaviour.

    ``kind`` is ``"exponential"``, ``"polynomial"`` or
    ``"conditioned_polynomial"``; ``order`` is ``None`` for exponential.
    """

    kind: str
    order: float | None
    notes: str

    def summary(self):
        if self.kind == "exponential":
            return "exponential"
        if self.kind == "conditioned_polynomial":
            return f"conditioned polynomial, order {self.order:g}, O(1/t) on Ran(A)"
        return f"polynomial, order {self.order:.6g}"


def _pair(pair):
    return pair if isinstance(pair, ExponentPair) else ExponentPair(*pair)


def _le(x, y):
    return x <= y + TOL


def _lt(x, y):
    return x < y - TOL


def _eq(x, y):
    return abs(x - y) <= TOL


def predicates(pair):
    """Membership of ``pair`` in each of S, S1, S2, S3 as a dict of booleans."""
    a, b = _pair(pair)
    return {
        "S": _le(max(1 - 2 * a, 2 * a - 1), b) and _le(b, 2 * a),
        "S1": _lt(0.0, b - 2 * a) and _le(0.5, b) and _le(b, 1.0),
        "S2": _lt(b, 1 - 2 * a) and _le(0.0, b) and _le(b, 0.5),
        "S3": _lt(b, 2 * a - 1),
    }


def on_boundary(pair):
    """True when ``pair`` lies on a line that actually separates two regions.

    ``b = 2a`` and ``b = 1 - 2a`` bound S only for ``a >= 1/4``; to the left
    of that the same lines run through the interior of S1 or S2.
    ``b = 2a - 1`` always separates S from S3, and ``b = 1/2`` with
    ``a <= 1/4`` is the shared edge of S1 and S2.  The edges of the unit
    square are not region boundaries.
    """
    a, b = _pair(pair)
    right = _le(0.25, a)
    return (
        (_eq(b, 2 * a) and right)
        or (_eq(b, 1 - 2 * a) and right)
        or _eq(b, 2 * a - 1)
        or (_eq(b, 0.5) and _le(a, 0.25))
    )


def classify(pair):
    """Region label with precedence S > S3 > S1 > S2, plus the overlap label."""
    pair = _pair(pair)
    p = predicates(pair)
    if p["S"]:
        label = "S"
    elif p["S3"]:
        label = "S3"
    elif p["S1"] and p["S2"]:
        label = "S1_S2_overlap"
    elif p["S1"]:
        label = "S1"
    elif p["S2"]:
        label = "S2"
    else:  # pragma: no cover - the predicates cover the square
        raise AssertionError(f"no region contains {pair}")
    return RegionLabel(label, on_boundary(pair))


_MEASURE = "order measured as the decay exponent of ||exp(tA)(I-A)^{-1}||"


def predict(pair):
    pair = _pair(pair)
    a, b = pair
    label = classify(pair).label
    if label == "S":
        return StabilityPrediction("exponential", None, "uniform spectral gap; exponential decay")
    if label == "S3":
        return StabilityPrediction(
            "conditioned_polynomial",
            1.0,
            "not asymptotically stable on the whole space; O(1/t) on Ran(A)",
        )
    if label == "S1":
        return StabilityPrediction("polynomial", 1.0 / (2.0 * (b - 2.0 * a)), _MEASURE)
    if label == "S2":
        return StabilityPrediction("polynomial", 1.0 / (2.0 - 2.0 * (b + 2.0 * a)), _MEASURE)
    return StabilityPrediction(
        "polynomial", 1.0 / (1.0 - 4.0 * a), _MEASURE + "; S1 and S2 formulas coincide here"
    )


def describe(pair):
    """One-line ``"<label>; prediction: <summary>"`` text."""
    return f"{classify(pair).label}; prediction: {predict(pair).summary()}"


def require_s3(pair):
    if classify(pair).label != "S3":
        raise DomainError("cross-check defined for S3 only")
