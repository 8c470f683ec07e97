import math
import random

import pytest

from farf.core import UndefinedStatisticError
from farf.drift import Adwin


def bernoulli(rng, p):
    return 1.0 if rng.random() < p else 0.0


def test_constant_input_never_cuts():
    d = Adwin()
    assert not any(d.add(0.5) for _ in range(5000))
    assert d.width == 5000
    assert d.mean == pytest.approx(0.5)


def test_mean_width_reset():
    d = Adwin()
    d.add(0.0)
    d.add(1.0)
    assert d.mean == 0.5 and d.width == 2
    d.reset()
    assert d.width == 0
    with pytest.raises(UndefinedStatisticError):
        d.mean


@pytest.mark.parametrize("bad", [-0.1, 1.5, math.nan])
def test_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        Adwin().add(bad)


def test_bucket_layout_invariants():
    d = Adwin(max_buckets=5)
    rng = random.Random(0)
    for _ in range(20_000):
        d.add(rng.random())
        assert all(len(level) <= 5 for level in d._sums)
    d._flush()
    assert sum(len(lv) * 2 ** i for i, lv in enumerate(d._sums)) == d.width
    assert len(d._sums) <= math.ceil(math.log2(d.width)) + 1


def test_window_mean_matches_retained_suffix():
    rng = random.Random(7)
    d = Adwin()
    seen = []
    for t in range(30_000):
        p = 0.2 if (t // 5000) % 2 == 0 else 0.7
        v = bernoulli(rng, p) if t % 3 else rng.random()
        seen.append(v)
        d.add(v)
        if t % 97 == 0:
            tail = seen[len(seen) - d.width:]
            assert d.mean == pytest.approx(sum(tail) / len(tail), abs=1e-9)
    assert d.n_detections >= 4


def run_shift(seed):
    rng = random.Random(seed)
    d = Adwin(delta=0.002)
    for _ in range(500):
        d.add(bernoulli(rng, 0.2))
    delay = None
    for i in range(500):
        if d.add(bernoulli(rng, 0.8)) and delay is None:
            delay = i + 1
    return delay, d.mean


def test_detects_shift_quickly():
    results = [run_shift(s) for s in range(100)]
    delays = [dl for dl, _ in results]
    assert sum(dl is not None and dl <= 120 for dl in delays) >= 99
    # after the post-shift stretch the retained window reflects the new regime
    assert sum(0.7 <= m <= 0.9 for _, m in results) >= 99
    shifts = []
    for s in range(10):
        rng = random.Random(s)
        d = Adwin()
        for _ in range(500):
            d.add(bernoulli(rng, 0.2))
        while not d.add(bernoulli(rng, 0.8)):
            pass
        shifts.append(d.last_shift)
    assert all(x > 0 for x in shifts)


def test_false_positive_rate():
    cuts = 0
    for seed in range(20):
        rng = random.Random(1000 + seed)
        d = Adwin(delta=0.002)
        rand = rng.random
        for _ in range(100_000):
            cuts += d.add(1.0 if rand() < 0.5 else 0.0)
    assert cuts / 2e6 < 1e-4
