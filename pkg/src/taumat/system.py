"""Pairing context: a measure, two weight families and their time vectors.

``TauSystem`` memoizes moment tables per weight pair so that matrix
assembly, shift series and derivatives all read from the same cache.
"""

from __future__ import annotations

import numpy as np

from .errors import IndexOutOfRange
from .measures import CircleMeasure, Measure
from .times import TimeVector
from .weights import WeightFamily

_CHUNK = 8  # tables grow in steps of this many degrees


class TauSystem:
    """Immutable evaluation context for deformed block moments."""

    def __init__(self, measure: Measure, weights: WeightFamily,
                 s: tuple[TimeVector, ...] | None = None,
                 t: tuple[TimeVector, ...] | None = None):
        self.measure = measure
        self.weights = weights
        self.s = tuple(s) if s is not None else tuple(
            TimeVector.zero() for _ in range(weights.q))
        self.t = tuple(t) if t is not None else tuple(
            TimeVector.zero() for _ in range(weights.p))
        if len(self.s) != weights.q or len(self.t) != weights.p:
            raise ValueError("one time vector per weight required")
        self._tables: dict[tuple[int, int], np.ndarray] = {}

    @property
    def q(self) -> int:
        return self.weights.q

    @property
    def p(self) -> int:
        return self.weights.p

    @property
    def max_time_index(self) -> int:
        return min(v.max_index for v in self.s + self.t)

    # -- moments --------------------------------------------------------

    def _table(self, alpha: int, beta: int, imax: int, jmax: int) -> np.ndarray:
        cur = self._tables.get((alpha, beta))
        if cur is None or cur.shape[0] <= imax or cur.shape[1] <= jmax:
            ni = max(imax + 1, cur.shape[0] if cur is not None else 0)
            nj = max(jmax + 1, cur.shape[1] if cur is not None else 0)
            ni = ((ni + _CHUNK - 1) // _CHUNK) * _CHUNK
            nj = ((nj + _CHUNK - 1) // _CHUNK) * _CHUNK
            cur = self.measure.moment_table(
                self.weights, alpha, beta, self.s[alpha], self.t[beta],
                ni - 1, nj - 1)
            self._tables[(alpha, beta)] = cur
        return cur

    def moment(self, alpha: int, beta: int, i: int, j: int) -> float:
        """Pairing of x^i against y^j between weight blocks alpha, beta."""
        if not (0 <= alpha < self.q and 0 <= beta < self.p):
            raise IndexOutOfRange("weight block out of range")
        if i < 0 or j < 0:
            raise IndexOutOfRange("moment powers must be non-negative")
        return float(self._table(alpha, beta, i, j)[i, j])

    def moment_block(self, alpha: int, beta: int, imax: int, jmax: int) -> np.ndarray:
        return self._table(alpha, beta, imax, jmax)[:imax + 1, :jmax + 1]

    def moment_derivative(self, alpha: int, beta: int, i: int, j: int,
                          wrt: tuple[str, int, int]) -> float:
        """First derivative of a single moment with respect to one time.

        Differentiating in t_{b,k} inserts y^k when b matches the column
        block; differentiating in s_{a,k} inserts -x^k when a matches the
        row block; otherwise the derivative vanishes.
        """
        var, block, k = wrt
        if not (1 <= k <= self.max_time_index):
            raise IndexOutOfRange(
                f"time index {k} outside [1, {self.max_time_index}]")
        if var == "t":
            return self.moment(alpha, beta, i, j + k) if block == beta else 0.0
        if var == "s":
            return -self.moment(alpha, beta, i + k, j) if block == alpha else 0.0
        raise ValueError(f"unknown time family {var!r}")

    # -- derived contexts ------------------------------------------------

    def with_times(self, s=None, t=None) -> "TauSystem":
        return TauSystem(self.measure, self.weights,
                         s if s is not None else self.s,
                         t if t is not None else self.t)

    def bumped(self, var: str, block: int, k: int, delta: float) -> "TauSystem":
        """Fresh context with one time entry shifted (finite differences)."""
        if var == "t":
            t = list(self.t)
            t[block] = t[block].bumped(k, delta)
            return self.with_times(t=tuple(t))
        s = list(self.s)
        s[block] = s[block].bumped(k, delta)
        return self.with_times(s=tuple(s))

    def circle_tail(self) -> float:
        """Truncation-tail diagnostic for the circle backend (0 otherwise)."""
        if not isinstance(self.measure, CircleMeasure):
            return 0.0
        return max(self.measure.tail_estimate(self.s[a], self.t[b])
                   for a in range(self.q) for b in range(self.p))
