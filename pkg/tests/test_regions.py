import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyplab.blockcore import DomainError, ExponentPair
from hyplab.regions import TOL, classify, describe, on_boundary, predicates, predict

GRID = np.linspace(0.0, 1.0, 201)


@pytest.mark.parametrize(
    "pair, label, boundary",
    [
        ((0.9, 0.5), "S3", False),
        ((0.5, 0.5), "S", False),
        ((0.75, 0.5), "S", True),
        ((0.1, 0.8), "S1", False),
        ((0.1, 0.2), "S2", False),
        ((0.1, 0.5), "S1_S2_overlap", True),
        ((0.8, 0.55), "S3", False),
    ],
)
def test_classify_examples(pair, label, boundary):
    got = classify(ExponentPair(*pair))
    assert got.label == label
    assert got.boundary is boundary


def test_predict_examples():
    assert predict((0.1, 0.8)).kind == "polynomial"
    assert predict((0.1, 0.8)).order == pytest.approx(1 / 1.2, rel=1e-14)
    assert predict((0.1, 0.2)).order == pytest.approx(1 / 1.2, rel=1e-14)
    p = predict((0.9, 0.5))
    assert (p.kind, p.order) == ("conditioned_polynomial", 1.0)
    assert "O(1/t) on Ran(A)" in p.notes
    assert predict((0.5, 0.5)).kind == "exponential" and predict((0.5, 0.5)).order is None


def test_describe_line():
    assert describe((0.9, 0.5)) == "S3; prediction: conditioned polynomial, order 1, O(1/t) on Ran(A)"


@pytest.mark.parametrize("pair", [(1.1, 0.5), (0.5, -0.01)])
def test_outside_square(pair):
    with pytest.raises(DomainError):
        classify(pair)


def test_grid_coverage_and_disjointness():
    for a, b in itertools.product(GRID, GRID):
        p = predicates((a, b))
        assert any(p.values())
        for x, y in [("S", "S1"), ("S", "S2"), ("S", "S3"), ("S1", "S3"), ("S2", "S3")]:
            assert not (p[x] and p[y]), (a, b, x, y)
        if p["S1"] and p["S2"]:
            assert abs(b - 0.5) <= TOL and 2 * a < 0.5
            assert classify((a, b)).label == "S1_S2_overlap"


def test_overlap_segment_is_exact():
    hits = [(a, b) for a, b in itertools.product(GRID, GRID)
            if predicates((a, b))["S1"] and predicates((a, b))["S2"]]
    assert hits == [(a, 0.5) for a in GRID if a < 0.25 - TOL]


def test_overlap_orders_coincide():
    for a in GRID[GRID < 0.25]:
        b = 0.5
        s1 = 1 / (2 * (b - 2 * a))
        s2 = 1 / (2 - 2 * (b + 2 * a))
        assert s1 == pytest.approx(s2, rel=1e-12)
        assert predict((a, b)).order == pytest.approx(1 / (1 - 4 * a), rel=1e-12)
    assert predict((0.1, 0.5)).order == pytest.approx(1 / 0.6, rel=1e-14)


def test_precedence():
    for a, b in itertools.product(GRID, GRID):
        p = predicates((a, b))
        label = classify((a, b)).label
        if p["S"]:
            assert label == "S"
        elif p["S3"]:
            assert label == "S3"


@given(st.floats(0, 1), st.floats(0, 1))
def test_boundary_flag_iff_on_separating_line(a, b):
    flagged = on_boundary((a, b))
    lines = (
        (abs(b - 2 * a) <= TOL and a >= 0.25 - TOL)
        or (abs(b - 1 + 2 * a) <= TOL and a >= 0.25 - TOL)
        or abs(b - 2 * a + 1) <= TOL
        or (abs(b - 0.5) <= TOL and a <= 0.25 + TOL)
    )
    assert flagged == lines


@given(st.floats(0, 1), st.floats(0, 1))
def test_label_constant_off_boundary(a, b):
    # a point off every separating line has the same label as its close neighbours
    if on_boundary((a, b)):
        return
    h = 1e-9
    label = classify((a, b)).label
    for da, db in [(h, 0), (-h, 0), (0, h), (0, -h)]:
        na, nb = a + da, b + db
        if not (0 <= na <= 1 and 0 <= nb <= 1):
            continue
        lines = [nb - 2 * na, nb - 1 + 2 * na, nb - 2 * na + 1, nb - 0.5]
        if min(abs(x) for x in lines) < 1e-8:
            continue
        assert classify((na, nb)).label == label


def test_polynomial_orders_positive_and_finite():
    for a, b in itertools.product(GRID, GRID):
        pred = predict((a, b))
        if pred.kind == "polynomial":
            assert 0 < pred.order < np.inf
