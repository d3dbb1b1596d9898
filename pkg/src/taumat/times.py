"""Deformation-time vectors and elementary Schur polynomials.

A time vector is a finitely supported sequence t = (t_1, t_2, ...) of real
deformation parameters.  The two workhorses built on top of it are the
exponential generating coefficients S_k with  exp(sum_k t_k z^k) =
sum_k S_k(t) z^k,  and the direct evaluation of that exponential.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IndexOutOfRange

DEFAULT_MAX_INDEX = 6


@dataclass(frozen=True)
class TimeVector:
    """Finitely supported sequence of deformation times, indexed from 1.

    Unstored indices read as exactly zero.  ``max_index`` bounds which
    indices may ever be set or differentiated against.
    """

    entries: dict[int, float] = field(default_factory=dict)
    max_index: int = DEFAULT_MAX_INDEX

    def __post_init__(self):
        for k, v in list(self.entries.items()):
            if not (1 <= k <= self.max_index):
                raise IndexOutOfRange(
                    f"time index {k} outside [1, {self.max_index}]")
            if v == 0.0:
                # keep the support canonical so equality/hash behave
                del self.entries[k]

    @classmethod
    def from_values(cls, values, max_index: int = DEFAULT_MAX_INDEX) -> "TimeVector":
        """Build from a dense leading sequence (v_1, v_2, ...)."""
        return cls({k + 1: float(v) for k, v in enumerate(values) if v != 0.0},
                   max_index=max_index)

    @classmethod
    def zero(cls, max_index: int = DEFAULT_MAX_INDEX) -> "TimeVector":
        return cls({}, max_index=max_index)

    def get(self, k: int) -> float:
        return self.entries.get(k, 0.0)

    @property
    def support(self) -> int:
        """Largest index with a nonzero entry (0 for the zero vector)."""
        return max(self.entries, default=0)

    def bumped(self, k: int, delta: float) -> "TimeVector":
        """Copy with entry k shifted by delta (used by finite differences)."""
        if not (1 <= k <= self.max_index):
            raise IndexOutOfRange(f"time index {k} outside [1, {self.max_index}]")
        new = dict(self.entries)
        new[k] = new.get(k, 0.0) + delta
        return TimeVector(new, max_index=self.max_index)

    def __add__(self, other: "TimeVector") -> "TimeVector":
        new = dict(self.entries)
        for k, v in other.entries.items():
            new[k] = new.get(k, 0.0) + v
        return TimeVector(new, max_index=max(self.max_index, other.max_index))

    def __sub__(self, other: "TimeVector") -> "TimeVector":
        new = dict(self.entries)
        for k, v in other.entries.items():
            new[k] = new.get(k, 0.0) - v
        return TimeVector(new, max_index=max(self.max_index, other.max_index))

    def __neg__(self) -> "TimeVector":
        return TimeVector({k: -v for k, v in self.entries.items()},
                          max_index=self.max_index)

    def poly_coeffs(self, length: int | None = None) -> np.ndarray:
        """Dense coefficient array [0, v_1, v_2, ...] of the exponent polynomial."""
        top = self.support if length is None else length
        out = np.zeros(top + 1)
        for k, v in self.entries.items():
            if k <= top:
                out[k] = v
        return out


@dataclass(frozen=True)
class SchurCoefficients:
    """Coefficients S_0..S_L of exp(sum_k v_k z^k); S_0 is always 1."""

    values: np.ndarray
    order: int

    def __getitem__(self, k: int) -> float:
        # negative orders are zero by convention, as are orders beyond L
        if k < 0 or k > self.order:
            return 0.0
        return float(self.values[k])


def schur_coeffs(v: TimeVector, order: int) -> SchurCoefficients:
    """Expand exp(sum_k v_k z^k) to z^order.

    Uses the derivative recurrence l*S_l = sum_{k=1..l} k*v_k*S_{l-k},
    which is O(L^2) and stable at the orders used here.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    s = np.zeros(order + 1)
    s[0] = 1.0
    sup = v.support
    for ell in range(1, order + 1):
        acc = 0.0
        for k in range(1, min(ell, sup) + 1):
            vk = v.get(k)
            if vk != 0.0:
                acc += k * vk * s[ell - k]
        s[ell] = acc / ell
    return SchurCoefficients(values=s, order=order)


def time_exponential(v: TimeVector, z: complex) -> complex:
    """exp(sum_k v_k z^k), evaluated as an exact finite sum in the exponent."""
    acc = 0.0 + 0.0j
    for k, c in v.entries.items():
        acc += c * (z ** k)
    return complex(np.exp(acc))
