import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from popaudit.metrics import (MetricError, UserMetricRow, gap, kl_miscalibration, mae,
                              popularity_lift)

# mpmath, 40 digits: 0.8 ln(0.8/0.5) + 0.2 ln(0.2/0.5)
KL_UNSMOOTHED = 0.19274475702175742988
# same with q~ = 0.99 q + 0.01 p
KL_SMOOTHED_001 = 0.18916271414483206210


def test_mae_examples():
    assert mae([(3, 4), (4, 4)]) == 0.5
    assert mae([(2, 2), (5, 5)]) == 0.0
    assert mae([(1, 5)]) == 4.0
    with pytest.raises(MetricError, match="no test ratings"):
        mae([])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=1, max_size=50),
       st.floats(-1000, 1000))
def test_mae_translation_invariant(pairs, shift):
    shifted = [(p + shift, a + shift) for p, a in pairs]
    assert mae(shifted) == pytest.approx(mae(pairs), rel=1e-9, abs=1e-9)


def test_kl_identity():
    p = {0: 0.3, 1: 0.7}
    assert kl_miscalibration(p, p) <= 1e-12


def test_kl_worked_value():
    p, q = {0: 0.8, 1: 0.2}, {0: 0.5, 1: 0.5}
    assert kl_miscalibration(p, q, alpha=1e-12) == pytest.approx(KL_UNSMOOTHED, abs=1e-6)
    assert kl_miscalibration(p, q, alpha=0.01) == pytest.approx(KL_SMOOTHED_001, abs=1e-12)


def test_kl_disjoint_support():
    assert kl_miscalibration({0: 1.0}, {1: 1.0}, 0.01) == pytest.approx(math.log(100), abs=1e-12)


def test_kl_errors():
    with pytest.raises(MetricError, match="no genre-tagged profile"):
        kl_miscalibration({}, {0: 1.0})
    with pytest.raises(MetricError):
        kl_miscalibration({0: 1.0}, {0: 1.0}, alpha=0)


def _random_dist(rng, n):
    support = rng.random(n) < 0.7
    w = rng.random(n) * support
    if w.sum() == 0:
        w[0] = 1.0
    return {c: float(v) for c, v in enumerate(w / w.sum()) if v > 0}


def test_kl_non_negative_fuzz():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(1, 12))
        p, q = _random_dist(rng, n), _random_dist(rng, n)
        assert kl_miscalibration(p, q, float(rng.uniform(1e-4, 0.99))) >= 0.0


def test_gap_examples():
    pop = np.array([0.2, 0.4, 0.1, 0.5, 1.0])
    assert gap([[0, 1]], pop) == pytest.approx(0.3)
    assert gap([[2], [3]], pop) == pytest.approx(0.3)
    assert gap([[4, 4], [4]], pop) == 1.0
    with pytest.raises(MetricError, match="user 7"):
        gap({3: [0], 7: []}, pop)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.integers(0, 9), min_size=1, max_size=8), min_size=1, max_size=6),
       st.integers(0, 5))
def test_gap_duplicate_list_invariant(lists, which):
    pop = np.linspace(0.05, 1.0, 10)
    which = which % len(lists)
    doubled = [l * 2 if j == which else l for j, l in enumerate(lists)]
    assert gap(doubled, pop) == pytest.approx(gap(lists, pop), rel=1e-12)


def test_lift_examples():
    assert popularity_lift(0.2, 0.3) == pytest.approx(0.5, abs=1e-15)
    assert popularity_lift(0.25, 0.375) == 0.5
    assert popularity_lift(0.4, 0.4) == 0.0
    assert popularity_lift(0.4, 0.0) == -1.0
    with pytest.raises(MetricError, match="undefined lift"):
        popularity_lift(0.0, 0.3)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 1.0), st.floats(0.0, 1.0))
def test_lift_bounds(gp, gq):
    pl = popularity_lift(gp, gq)
    assert pl >= -1.0
    assert (pl == 0.0) == (gq == gp)


def test_row_lift():
    assert UserMetricRow(0, "LowPop", None, None, 0.2, 0.3).lift == pytest.approx(0.5)
    assert UserMetricRow(0, "LowPop", None, None, 0.2, None).lift is None
