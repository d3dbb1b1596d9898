"""Truncated Laurent series with explicit trust windows.

Every series stores a contiguous coefficient block together with two flags
saying whether the coefficients *outside* the block are exactly zero
(``exact_below`` / ``exact_above``) or simply unknown because of truncation.
Products and sums propagate those flags so that a coefficient is only ever
reported when no unknown tail could have contributed to it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WindowTooNarrow


@dataclass
class LaurentSeries:
    """Coefficients for exponents lo, lo+1, ..., lo+len(coeffs)-1.

    ``exact_below``: all coefficients below ``lo`` are exactly zero.
    ``exact_above``: all coefficients above the stored block are exactly zero.
    A series with both flags set is an exact Laurent polynomial.
    """

    lo: int
    coeffs: np.ndarray
    exact_below: bool = True
    exact_above: bool = True

    def __post_init__(self):
        self.coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if self.coeffs.size == 0:
            self.coeffs = np.zeros(1)

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls) -> "LaurentSeries":
        return cls(0, np.zeros(1))

    @classmethod
    def constant(cls, value: float) -> "LaurentSeries":
        return cls(0, np.array([float(value)]))

    @classmethod
    def monomial(cls, exponent: int, value: float = 1.0) -> "LaurentSeries":
        return cls(exponent, np.array([float(value)]))

    # -- inspection ---------------------------------------------------

    @property
    def hi(self) -> int:
        return self.lo + len(self.coeffs) - 1

    @property
    def exact_polynomial(self) -> bool:
        return self.exact_below and self.exact_above

    def window(self) -> tuple[int, int]:
        """Stored (and therefore trusted) exponent range."""
        return self.lo, self.hi

    def coeff(self, exponent: int) -> float:
        """Coefficient of z^exponent; raises when it fell to truncation."""
        if self.lo <= exponent <= self.hi:
            return float(self.coeffs[exponent - self.lo])
        if exponent < self.lo:
            if self.exact_below:
                return 0.0
            raise WindowTooNarrow(
                f"coefficient at exponent {exponent} below trusted window "
                f"[{self.lo}, {self.hi}]")
        if self.exact_above:
            return 0.0
        raise WindowTooNarrow(
            f"coefficient at exponent {exponent} above trusted window "
            f"[{self.lo}, {self.hi}]")

    def residue(self) -> float:
        """Coefficient of z^{-1}."""
        return self.coeff(-1)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    # -- arithmetic ---------------------------------------------------

    def scaled(self, factor: float) -> "LaurentSeries":
        return LaurentSeries(self.lo, self.coeffs * factor,
                             self.exact_below, self.exact_above)

    def shifted(self, k: int) -> "LaurentSeries":
        """Multiply by z^k."""
        return LaurentSeries(self.lo + k, self.coeffs.copy(),
                             self.exact_below, self.exact_above)

    def inverted(self) -> "LaurentSeries":
        """Substitute z -> 1/z (exponent negation)."""
        return LaurentSeries(-self.hi, self.coeffs[::-1].copy(),
                             exact_below=self.exact_above,
                             exact_above=self.exact_below)

    def __neg__(self) -> "LaurentSeries":
        return self.scaled(-1.0)

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        # trusted region of the sum is the intersection of trusted regions
        lo_bound = None
        if not self.exact_below:
            lo_bound = self.lo
        if not other.exact_below:
            lo_bound = other.lo if lo_bound is None else max(lo_bound, other.lo)
        hi_bound = None
        if not self.exact_above:
            hi_bound = self.hi
        if not other.exact_above:
            hi_bound = other.hi if hi_bound is None else min(hi_bound, other.hi)

        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        if lo_bound is not None:
            lo = max(lo, lo_bound)
        if hi_bound is not None:
            hi = min(hi, hi_bound)
        if lo > hi:
            raise WindowTooNarrow("sum has empty trusted window")
        out = np.zeros(hi - lo + 1)
        for s in (self, other):
            a = max(lo, s.lo)
            b = min(hi, s.hi)
            if a <= b:
                out[a - lo:b - lo + 1] += s.coeffs[a - s.lo:b - s.lo + 1]
        return LaurentSeries(lo, out,
                             exact_below=lo_bound is None,
                             exact_above=hi_bound is None)

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + (-other)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        conv = np.convolve(self.coeffs, other.coeffs)
        lo = self.lo + other.lo
        hi = lo + len(conv) - 1

        # Unknown low tail of one factor meets the top of the other factor:
        # a product coefficient is trusted only above those collision points.
        lo_bound = None
        if not self.exact_below:
            if not other.exact_above:
                raise WindowTooNarrow("product of two doubly-truncated series")
            lo_bound = self.lo + other.hi
        if not other.exact_below:
            if not self.exact_above:
                raise WindowTooNarrow("product of two doubly-truncated series")
            b = other.lo + self.hi
            lo_bound = b if lo_bound is None else max(lo_bound, b)
        hi_bound = None
        if not self.exact_above:
            hi_bound = self.hi + other.lo
        if not other.exact_above:
            b = other.hi + self.lo
            hi_bound = b if hi_bound is None else min(hi_bound, b)

        t_lo = lo if lo_bound is None else max(lo, lo_bound)
        t_hi = hi if hi_bound is None else min(hi, hi_bound)
        if t_lo > t_hi:
            raise WindowTooNarrow("product has empty trusted window")
        return LaurentSeries(t_lo, conv[t_lo - lo:t_hi - lo + 1],
                             exact_below=lo_bound is None,
                             exact_above=hi_bound is None)

    def mul_truncated(self, other: "LaurentSeries") -> "LaurentSeries":
        """Convolution that keeps the whole stored support.

        Unlike ``*`` this does not shrink to the exactly-trusted window; the
        caller is responsible for choosing truncation orders high enough that
        the dropped tails are negligible (residue checks at small times).
        The exactness flags still record whether anything was truncated.
        """
        conv = np.convolve(self.coeffs, other.coeffs)
        return LaurentSeries(self.lo + other.lo, conv,
                             exact_below=self.exact_below and other.exact_below,
                             exact_above=self.exact_above and other.exact_above)
