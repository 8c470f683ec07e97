import math
import random

import pytest
from hypothesis import given, strategies as st

from farf.core import UndefinedStatisticError
from farf.metrics import (
    ConfusionTracker, DiscTracker, GroupCounts, disc, disc_cells, kappa, reset, update_disc,
)


def batch_disc(events):
    # independent recomputation of the accumulated parity gap
    tot = {0: [0.0, 0.0], 1: [0.0, 0.0]}
    for g, o, w in events:
        tot[g][o] += w
    rate = [tot[g][1] / sum(tot[g]) if sum(tot[g]) > 0 else 0.0 for g in (0, 1)]
    return rate[0] - rate[1]


def test_disc_examples():
    assert disc(GroupCounts(u_pos=30, u_neg=70, p_pos=10, p_neg=90)) == pytest.approx(0.20)
    assert disc(GroupCounts(u_pos=5, u_neg=5, p_pos=50, p_neg=50)) == 0.0
    assert disc(GroupCounts(u_pos=0, u_neg=0, p_pos=3, p_neg=7)) == pytest.approx(-0.30)
    assert disc_cells(0, 0, 0, 0) == 0.0


def test_update_disc_examples():
    t = DiscTracker()
    update_disc(t, 1, 1, 1.0)
    assert t.counts.p_pos == 1.0
    assert t.value == -1.0
    update_disc(t, 0, 0, 2.5)
    assert t.counts.u_neg == 2.5
    with pytest.raises(ValueError):
        update_disc(t, 0, 1, -1)


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1),
                          st.floats(0, 10, allow_nan=False)), max_size=200))
def test_streaming_disc_matches_batch(events):
    t = DiscTracker()
    for g, o, w in events:
        t.update(g, o, w)
    assert t.value == pytest.approx(batch_disc(events), abs=1e-12)
    assert -1.0 <= t.value <= 1.0


def test_reset_semantics():
    t = DiscTracker()
    t.update(0, 1)
    reset(t)
    assert t.value == 0.0
    reset(t)
    assert t.value == 0.0
    t.update(1, 1)
    fresh = DiscTracker()
    fresh.update(1, 1)
    assert t.value == fresh.value
    c = ConfusionTracker()
    c.update(1, 1)
    reset(c)
    assert c.total == 0


def hand_kappa(tp, fp, tn, fn):
    n = tp + fp + tn + fn
    po = (tp + tn) / n
    pe = ((tp + fn) * (tp + fp) + (tn + fp) * (tn + fn)) / (n * n)
    return 0.0 if pe == 1 else (po - pe) / (1 - pe)


def _conf(tp, fp, tn, fn):
    c = ConfusionTracker()
    c.tp, c.fp, c.tn, c.fn = float(tp), float(fp), float(tn), float(fn)
    return c


def test_kappa_examples():
    assert kappa(_conf(50, 0, 50, 0)) == 1.0
    assert kappa(_conf(40, 10, 40, 10)) == pytest.approx(0.6)
    # always predicting the majority of a 90/10 stream
    c = ConfusionTracker()
    for i in range(100):
        c.update(1 if i < 10 else 0, 0)
    assert kappa(c) == 0.0
    assert c.accuracy == pytest.approx(0.9)


def test_kappa_random_matrices():
    rng = random.Random(0)
    for _ in range(1000):
        cells = [rng.randint(0, 50) for _ in range(4)]
        if sum(cells) == 0:
            continue
        assert kappa(_conf(*cells)) == pytest.approx(hand_kappa(*cells), abs=1e-12)


def test_confusion_updates_and_errors():
    c = ConfusionTracker()
    with pytest.raises(UndefinedStatisticError):
        c.accuracy
    for y, p in [(1, 1), (1, 0), (0, 1), (0, 0), (0, 0)]:
        c.update(y, p)
    assert (c.tp, c.fn, c.fp, c.tn) == (1, 1, 1, 2)
    assert c.accuracy == pytest.approx(0.6)
    assert kappa(c) == pytest.approx(hand_kappa(1, 1, 2, 1))
    with pytest.raises(ValueError):
        c.update(1, 1, -0.5)


def test_degenerate_kappa_is_zero():
    # every label and prediction identical: p_e = 1
    assert kappa(_conf(10, 0, 0, 0)) == 0.0
    assert math.isfinite(kappa(_conf(0, 5, 0, 0)))
