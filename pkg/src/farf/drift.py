"""ADWIN change detection over bounded real-valued streams."""

from __future__ import annotations

import math
from operator import add, mul, sub

from .core import UndefinedStatisticError


class ChangeDetector:
    """Minimal interface the ensemble relies on."""

    def add(self, value: float) -> bool:
        raise NotImplementedError

    def reset(self) -> None:
        raise NotImplementedError


class Adwin(ChangeDetector):
    """Adaptive windowing detector with an exponential-histogram window.

    Level ``i`` holds up to ``max_buckets`` buckets of ``2**i`` inputs each,
    oldest first. Bucket sums are exact, so the window mean equals the mean
    of the retained inputs. Cut points are scanned every ``clock`` inputs;
    on a significant cut the oldest bucket is dropped and the scan repeats.
    """

    def __init__(self, delta: float = 0.002, max_buckets: int = 5, clock: int = 32,
                 min_window: int = 5):
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        self.delta = delta
        self.max_buckets = max_buckets
        self.clock = clock
        self.min_window = min_window
        self.reset()

    def reset(self) -> None:
        self._sums = [[]]
        self._vars = [[]]
        self._total = 0.0
        self._variance = 0.0  # sum of squared deviations over the window
        self._width = 0
        # inputs since the last clock tick; folded into the histogram at the tick
        self._buf = []
        self.n_detections = 0
        # window mean after the last cut minus the mean before it
        self.last_shift = 0.0

    @property
    def width(self) -> int:
        return self._width + len(self._buf)

    @property
    def total(self) -> float:
        self._flush()
        return self._total

    @property
    def variance(self) -> float:
        self._flush()
        return self._variance

    @property
    def mean(self) -> float:
        self._flush()
        if self._width == 0:
            raise UndefinedStatisticError("mean of an empty window")
        return self._total / self._width

    def add(self, value: float) -> bool:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"ADWIN input {value!r} outside [0, 1]")
        buf = self._buf
        buf.append(value)
        if len(buf) < self.clock:
            return False
        self._flush()
        if self._width > self.min_window and self._detect():
            self.n_detections += 1
            return True
        return False

    def _flush(self) -> None:
        buf = self._buf
        if not buf:
            return
        nb = len(buf)
        sb = sum(buf)
        mb = sb / nb
        m2b = max(sum(map(mul, buf, buf)) - sb * mb, 0.0)
        w = self._width
        if w:
            # pooled sum of squared deviations
            d = self._total / w - mb
            self._variance += m2b + w * nb / (w + nb) * d * d
        else:
            self._variance = m2b
        self._width = w + nb
        self._total += sb
        self._push(buf)
        buf.clear()

    def _push(self, new_s: list) -> None:
        # same end state as inserting one at a time and merging the two oldest
        # buckets whenever a level overflows
        sums, vars_, m = self._sums, self._vars, self.max_buckets
        new_v = [0.0] * len(new_s)
        level, size = 0, 1
        while True:
            if level == len(sums):
                sums.append([])
                vars_.append([])
            sl, vl = sums[level], vars_[level]
            sl.extend(new_s)
            vl.extend(new_v)
            excess = len(sl) - m
            if excess <= 0:
                return
            k = (excess + 1) // 2 * 2
            a, va = sl[:k], vl[:k]
            del sl[:k]
            del vl[:k]
            odd, even = a[0::2], a[1::2]
            new_s = list(map(add, odd, even))
            scale = 0.5 / size
            new_v = [x + y + d * d * scale
                     for x, y, d in zip(va[0::2], va[1::2], map(sub, odd, even))]
            level += 1
            size *= 2

    def _cut_exists(self) -> bool:
        w = self._width
        if w < 2 * self.min_window:
            return False
        if self._variance <= 0.0:
            # constant window: every split has equal means
            return False
        sigma2 = self._variance / w
        log_term = math.log(2.0 * math.log2(w) / self.delta)
        # eps = sqrt(k1 / m) + k2 / m with 1/m = 1/n0 + 1/n1; compared squared
        k1 = 2.0 * sigma2 * log_term
        k2 = 2.0 / 3.0 * log_term
        total = self._total
        sums = self._sums
        min_w = self.min_window
        n0 = 0
        s0 = 0.0
        for level in range(len(sums) - 1, -1, -1):
            size = 1 << level
            for s in sums[level]:
                n0 += size
                s0 += s
                n1 = w - n0
                if n1 < min_w:
                    return False
                if n0 < min_w:
                    continue
                inv = 1.0 / n0 + 1.0 / n1
                gap = abs(s0 / n0 - (total - s0) / n1) - k2 * inv
                if gap >= 0.0 and gap * gap >= k1 * inv:
                    return True
        return False

    def _detect(self) -> bool:
        before = self._total / self._width
        changed = False
        while self._cut_exists():
            self._drop_oldest()
            changed = True
        if changed:
            self.last_shift = self._total / self._width - before
        return changed

    def _drop_oldest(self) -> None:
        top = len(self._sums) - 1
        size = 1 << top
        s = self._sums[top].pop(0)
        v = self._vars[top].pop(0)
        w = self._width
        rest = w - size
        if rest > 0:
            d = s / size - (self._total - s) / rest
            self._variance = max(self._variance - v - size * rest / w * d * d, 0.0)
        else:
            self._variance = 0.0
        self._total -= s
        self._width = rest
        while len(self._sums) > 1 and not self._sums[-1]:
            self._sums.pop()
            self._vars.pop()
