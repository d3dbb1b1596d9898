"""Base weight descriptors for the two weight families.

A weight is described by the polynomial in its exponent: ``unit`` is
exp(0), ``plain_exponential(c)`` is exp(c*x) and ``gaussian_exponent``
is exp(c0 + c1*x + c2*x^2).  The q weights on the x side pair against
the p weights on the y side through a measure backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GaussianExponent:
    """Weight exp(c0 + c1*x + c2*x^2)."""

    c0: float = 0.0
    c1: float = 0.0
    c2: float = 0.0

    def exponent_coeffs(self) -> np.ndarray:
        return np.array([self.c0, self.c1, self.c2])

    @property
    def is_unit(self) -> bool:
        return self.c0 == 0.0 and self.c1 == 0.0 and self.c2 == 0.0


def plain_exponential(c: float) -> GaussianExponent:
    """Weight exp(c*x)."""
    return GaussianExponent(c1=float(c))


def unit() -> GaussianExponent:
    return GaussianExponent()


def gaussian(half_curvature: float = -0.5) -> GaussianExponent:
    """Weight exp(half_curvature * x^2); the default is exp(-x^2/2)."""
    return GaussianExponent(c2=float(half_curvature))


@dataclass(frozen=True)
class WeightFamily:
    """The q x-side weights (psi) and p y-side weights (phi)."""

    psi: tuple[GaussianExponent, ...]
    phi: tuple[GaussianExponent, ...]

    def __post_init__(self):
        if len(self.psi) < 1 or len(self.phi) < 1:
            raise ValueError("need at least one weight on each side")

    @property
    def q(self) -> int:
        return len(self.psi)

    @property
    def p(self) -> int:
        return len(self.phi)

    @property
    def all_unit(self) -> bool:
        return all(w.is_unit for w in self.psi + self.phi)
