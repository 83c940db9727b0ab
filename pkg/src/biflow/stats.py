"""Single-pass streaming min/max/mean/stddev accumulator (Welford)."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(slots=True)
class RunningStats:
    """Welford accumulator; stddev uses the sample (n-1) convention.

    An empty accumulator finalizes to all zeros, a single sample to
    min = max = mean = value with stddev 0.
    """

    count: int = 0
    min: float = 0.0
    max: float = 0.0
    mean: float = 0.0
    m2: float = 0.0

    def push(self, x: float) -> None:
        self.count += 1
        if self.count == 1:
            self.min = self.max = self.mean = float(x)
            self.m2 = 0.0
            return
        if x < self.min:
            self.min = float(x)
        if x > self.max:
            self.max = float(x)
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    @property
    def stddev(self) -> float:
        if self.count < 2:
            return 0.0
        return math.sqrt(self.m2 / (self.count - 1))
