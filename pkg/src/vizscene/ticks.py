"""Axis tick placement on nice round steps."""

from __future__ import annotations

import math


def nice_ticks(lo: float, hi: float, min_count: int = 4, max_count: int = 8):
    """Tick positions on a {1,2,5}*10^k step covering [lo, hi].

    The largest such step that yields between min_count and max_count ticks
    wins, so e.g. [0, 100] gets 0,20,...,100.
    """
    if hi < lo:
        lo, hi = hi, lo
    span = hi - lo
    if span <= 0 or not math.isfinite(span):
        return [lo]
    exp = math.ceil(math.log10(span))
    fallback = None
    for k in range(exp, exp - 5, -1):
        for mult in (5, 2, 1):
            step = mult * 10.0 ** k
            first = math.ceil(lo / step - 1e-9) * step
            last = math.floor(hi / step + 1e-9) * step
            if last < first:
                continue
            count = int(round((last - first) / step)) + 1
            if min_count <= count <= max_count:
                return [first + i * step for i in range(count)]
            # the 5->2 step jump can skip the window; remember the nearest miss
            if count > 1:
                distance = min(abs(count - min_count), abs(count - max_count))
                if fallback is None or distance < fallback[0]:
                    fallback = (distance, first, step, count)
    _, first, step, count = fallback
    return [first + i * step for i in range(count)]
