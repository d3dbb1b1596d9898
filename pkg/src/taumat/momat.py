"""Block moment matrices, tau values, Miwa-shift series and log-tau
derivatives.

The central objects are the determinant tau = det T of the block moment
matrix and its behaviour under the time substitutions t -> t -+ [1/z]
with [u] = (u, u^2/2, u^3/3, ...).  One direction of each substitution
multiplies the affected weight by (1 - x/z) and turns the determinant
into an exact polynomial in zeta = 1/z; the other multiplies by the
geometric series and gives a truncated power series.  Both are computed
by evaluating the substituted determinant at roots of unity and reading
the coefficients off a DFT, which is exact for polynomials and perfectly
conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTau, IndexOutOfRange, SizeMismatch
from .series import LaurentSeries
from .system import TauSystem

DEGENERACY_RATIO = 1e-12

# time derivative direction: ("t", block, k) or ("s", block, k)
Deriv = tuple[str, int, int]


@dataclass(frozen=True)
class Composition:
    """Block sizes (m_1..m_q) for rows and (n_1..n_p) for columns."""

    m: tuple[int, ...]
    n: tuple[int, ...]

    def __post_init__(self):
        if any(v < 0 for v in self.m + self.n):
            raise IndexOutOfRange("block sizes must be non-negative")

    @property
    def size_m(self) -> int:
        return sum(self.m)

    @property
    def size_n(self) -> int:
        return sum(self.n)

    def row_offset(self, alpha: int) -> int:
        return sum(self.m[:alpha])

    def col_offset(self, beta: int) -> int:
        return sum(self.n[:beta])

    def shift(self, dm: dict[int, int] | None = None,
              dn: dict[int, int] | None = None) -> "Composition | None":
        """Shifted composition, or None if any entry would go negative."""
        m = list(self.m)
        n = list(self.n)
        for a, d in (dm or {}).items():
            m[a] += d
        for b, d in (dn or {}).items():
            n[b] += d
        if any(v < 0 for v in m + n):
            return None
        return Composition(tuple(m), tuple(n))


@dataclass
class BlockMomentMatrix:
    """Assembled |m| x |n| matrix of deformed moments with block layout."""

    comp: Composition
    entries: np.ndarray
    system: TauSystem

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def row_norms_scale(self) -> float:
        """Geometric mean of row norms; the scale for degeneracy tests."""
        if self.size == 0:
            return 1.0
        norms = np.linalg.norm(self.entries, axis=1)
        norms = np.maximum(norms, 1e-300)
        return float(np.exp(np.mean(np.log(norms))))


def assemble(system: TauSystem, comp: Composition) -> BlockMomentMatrix:
    if comp.size_m != comp.size_n:
        raise SizeMismatch(
            f"|m| = {comp.size_m} differs from |n| = {comp.size_n}")
    size = comp.size_m
    out = np.empty((size, size))
    for a in range(system.q):
        ra = comp.row_offset(a)
        for b in range(system.p):
            cb = comp.col_offset(b)
            if comp.m[a] and comp.n[b]:
                out[ra:ra + comp.m[a], cb:cb + comp.n[b]] = \
                    system.moment_block(a, b, comp.m[a] - 1, comp.n[b] - 1)
    return BlockMomentMatrix(comp, out, system)


def tau(matrix: BlockMomentMatrix) -> float:
    """det T, with det of the empty matrix equal to 1 by convention."""
    if matrix.size == 0:
        return 1.0
    return float(np.linalg.det(matrix.entries))


def tau_condition(matrix: BlockMomentMatrix) -> float:
    if matrix.size == 0:
        return 1.0
    return float(np.linalg.cond(matrix.entries))


def tau_of(system: TauSystem, comp: Composition | None) -> float:
    """tau at a composition; None (out-of-range shift) contributes 0."""
    if comp is None:
        return 0.0
    return tau(assemble(system, comp))


def is_degenerate(matrix: BlockMomentMatrix) -> bool:
    return abs(tau(matrix)) < DEGENERACY_RATIO * matrix.row_norms_scale() ** max(
        matrix.size, 1)


def require_nondegenerate(matrix: BlockMomentMatrix) -> float:
    value = tau(matrix)
    if matrix.size and abs(value) < DEGENERACY_RATIO * \
            matrix.row_norms_scale() ** matrix.size:
        raise DegenerateTau(
            f"tau = {value:.3e} is below the degeneracy threshold")
    return value


def _dft_coefficients(values: np.ndarray) -> np.ndarray:
    """Polynomial coefficients from values at the N-th roots of unity."""
    return np.fft.fft(values) / len(values)


ENUM_TERM_BUDGET = 250_000


def _shift_series(system: TauSystem, comp: Composition, axis: str,
                  block: int, polynomial: bool, order: int) -> LaurentSeries:
    """Common engine behind the four tau shift directions.

    ``axis`` is "col" (shift in a t block) or "row" (shift in an s block).
    ``polynomial`` selects the (1 - x/z) substitution, which terminates;
    otherwise the geometric-series substitution is truncated at ``order``.

    Coefficients are computed by direct multilinear expansion (each one an
    exact signed sum of determinants) whenever the term count is modest;
    very deep truncations fall back to balanced-radius interpolation at
    roots of unity.
    """
    if comp.size_m != comp.size_n:
        raise SizeMismatch("tau shifts need a square composition")
    size = comp.size_m
    nblk = comp.n[block] if axis == "col" else comp.m[block]
    reach = 1 if polynomial else order
    degree = nblk if polynomial else nblk * order

    if size == 0 or nblk == 0 or (not polynomial and order == 0):
        base = tau(assemble(system, comp))
        return LaurentSeries(0, np.array([base]),
                             exact_above=polynomial or nblk == 0)

    # Work on the transpose for row shifts so both cases edit columns.
    if axis == "col":
        base = assemble(system, comp).entries
        off = comp.col_offset(block)
        ext = np.empty((size, nblk + reach))
        for a in range(system.q):
            ra = comp.row_offset(a)
            if comp.m[a]:
                ext[ra:ra + comp.m[a], :] = system.moment_block(
                    a, block, comp.m[a] - 1, nblk - 1 + reach)
    else:
        base = assemble(system, comp).entries.T
        off = comp.row_offset(block)
        ext_rows = np.empty((nblk + reach, size))
        for b in range(system.p):
            cb = comp.col_offset(b)
            if comp.n[b]:
                ext_rows[:, cb:cb + comp.n[b]] = system.moment_block(
                    block, b, nblk - 1 + reach, comp.n[b] - 1)
        ext = ext_rows.T

    nn = degree + 1
    # Interpolation nodes live on a circle whose radius balances the
    # coefficient spectrum: series coefficients grow roughly like the
    # extended column norms, so sampling at radius 1/growth keeps the DFT
    # extraction well conditioned (moment magnitudes can span many decades).
    norms = np.linalg.norm(ext, axis=0) + 1e-300
    span = len(norms) - 1
    growth = (norms[-1] / norms[0]) ** (1.0 / span) if span else 1.0
    radius = 1.0 / max(growth, 1.0)
    nodes = radius * np.exp(2j * np.pi * np.arange(nn) / nn)
    # weights[r, e, c]: column c of the substituted block at node r as a
    # combination of the extended columns e
    weights = np.zeros((nn, nblk + reach, nblk), dtype=complex)
    cols = np.arange(nblk)
    if polynomial:
        weights[:, cols, cols] = 1.0
        weights[:, cols + 1, cols] = -nodes[:, None]
    else:
        powers = nodes[:, None] ** np.arange(reach + 1)[None, :]
        for k in range(reach + 1):
            weights[:, cols + k, cols] = powers[:, k, None]

    stacked = np.broadcast_to(base.astype(complex),
                              (nn, size, size)).copy()
    stacked[:, :, off:off + nblk] = np.einsum("re,nec->nrc", ext, weights)
    values = np.linalg.det(stacked)
    coeffs = _dft_coefficients(values)
    coeffs *= radius ** -np.arange(nn, dtype=float)

    # conjugate node symmetry forces real output, so the imaginary part
    # measures interpolation roundoff; fall back to direct multilinear
    # expansion when it grows past harmless levels
    imag = np.max(np.abs(coeffs.imag))
    scale = max(np.max(np.abs(coeffs.real)), 1e-300)
    if imag > 1e-9 * scale:
        return _shift_series_enumerated(base, ext, off, nblk, reach,
                                        polynomial, order)
    real = coeffs.real
    if polynomial:
        return LaurentSeries(0, real[:degree + 1])
    return LaurentSeries(0, real[:order + 1], exact_above=False)


def _shift_series_enumerated(base: np.ndarray, ext: np.ndarray, off: int,
                             nblk: int, reach: int, polynomial: bool,
                             order: int) -> LaurentSeries:
    """Exact coefficient-by-coefficient expansion of the shifted determinant.

    Slower than interpolation but immune to its conditioning: coefficient
    j is the sum over ways of raising block columns by a total of j.
    """
    from itertools import combinations

    def compositions(total, parts, cap):
        if parts == 1:
            if total <= cap:
                yield (total,)
            return
        for first in range(min(total, cap) + 1):
            for rest in compositions(total - first, parts - 1, cap):
                yield (first,) + rest

    size = base.shape[0]
    top = nblk if polynomial else order
    out = np.zeros(top + 1)
    out[0] = np.linalg.det(base) if size else 1.0
    for j in range(1, top + 1):
        mats = []
        signs = []
        if polynomial:
            for cols in combinations(range(nblk), j):
                m = base.copy()
                for c in cols:
                    m[:, off + c] = ext[:, c + 1]
                mats.append(m)
                signs.append((-1.0) ** j)
        else:
            for ks in compositions(j, nblk, min(j, reach)):
                m = base.copy()
                for c, k in enumerate(ks):
                    if k:
                        m[:, off + c] = ext[:, c + k]
                mats.append(m)
                signs.append(1.0)
        if mats:
            dets = np.linalg.det(np.stack(mats))
            out[j] = float(np.dot(signs, dets))
    if polynomial:
        return LaurentSeries(0, out)
    return LaurentSeries(0, out, exact_above=False)


def tau_shift_t(system: TauSystem, comp: Composition, beta: int,
                direction: str, order: int = 10) -> LaurentSeries:
    """Series in zeta = 1/z for tau(t_beta -+ [1/z]).

    direction "minus" is the exact polynomial of degree <= n_beta whose
    zeta^0 coefficient is tau itself; "plus" is the truncated series.
    """
    if direction == "minus":
        return _shift_series(system, comp, "col", beta, True, order)
    if direction == "plus":
        return _shift_series(system, comp, "col", beta, False, order)
    raise ValueError(f"unknown direction {direction!r}")


def tau_shift_s(system: TauSystem, comp: Composition, alpha: int,
                direction: str, order: int = 10) -> LaurentSeries:
    """Series in zeta for tau(s_alpha +- [1/z]).

    The pairing of direction and behaviour is reversed relative to the t
    side because of the sign in the x-side deformation: "plus" is the
    exact polynomial (degree <= m_alpha), "minus" the truncated series.
    """
    if direction == "plus":
        return _shift_series(system, comp, "row", alpha, True, order)
    if direction == "minus":
        return _shift_series(system, comp, "row", alpha, False, order)
    raise ValueError(f"unknown direction {direction!r}")


def _deriv_matrix(system: TauSystem, comp: Composition,
                  derivs: tuple[Deriv, ...]) -> np.ndarray:
    """Mixed partial derivative of the moment matrix entrywise.

    Every requested derivative must hit an entry's row or column block for
    the entry to survive; each t (s) derivative inserts a y (x) power, and
    each s derivative contributes a factor -1.
    """
    size = comp.size_m
    out = np.zeros((size, size))
    sign = (-1.0) ** sum(1 for v, _, _ in derivs if v == "s")
    for a in range(system.q):
        ra = comp.row_offset(a)
        for b in range(system.p):
            cb = comp.col_offset(b)
            if not (comp.m[a] and comp.n[b]):
                continue
            dx = dy = 0
            applicable = True
            for var, block, k in derivs:
                if var == "t" and block == b:
                    dy += k
                elif var == "s" and block == a:
                    dx += k
                else:
                    applicable = False
                    break
            if not applicable:
                continue
            blockvals = system.moment_block(
                a, b, comp.m[a] - 1 + dx, comp.n[b] - 1 + dy)
            out[ra:ra + comp.m[a], cb:cb + comp.n[b]] = \
                sign * blockvals[dx:dx + comp.m[a], dy:dy + comp.n[b]]
    return out


def log_tau_derivative(system: TauSystem, comp: Composition,
                       derivs: list[Deriv]) -> float:
    """Exact derivative of ln tau of order len(derivs) <= 3.

    Uses d ln det T = tr(T^-1 dT) and its second and third order
    expansions; the entry derivatives are exact moment insertions, so no
    finite differencing is involved.
    """
    if not 1 <= len(derivs) <= 3:
        raise ValueError("only orders 1 to 3 are implemented")
    for var, block, k in derivs:
        limit = system.max_time_index
        if not 1 <= k <= limit:
            raise IndexOutOfRange(f"time index {k} outside [1, {limit}]")
        nblocks = system.p if var == "t" else system.q
        if not 0 <= block < nblocks:
            raise IndexOutOfRange("weight block out of range")

    matrix = assemble(system, comp)
    require_nondegenerate(matrix)
    if matrix.size == 0:
        return 0.0
    t_mat = matrix.entries
    solved = [np.linalg.solve(t_mat, _deriv_matrix(system, comp, (d,)))
              for d in derivs]

    if len(derivs) == 1:
        return float(np.trace(solved[0]))

    def pair(i, j):
        mixed = np.linalg.solve(
            t_mat, _deriv_matrix(system, comp, (derivs[i], derivs[j])))
        return float(np.trace(mixed) - np.trace(solved[i] @ solved[j]))

    if len(derivs) == 2:
        return pair(0, 1)

    b0, b1, b2 = solved
    triple = np.linalg.solve(
        t_mat, _deriv_matrix(system, comp, tuple(derivs)))
    mixed01 = np.linalg.solve(t_mat, _deriv_matrix(system, comp,
                                                   (derivs[0], derivs[1])))
    mixed02 = np.linalg.solve(t_mat, _deriv_matrix(system, comp,
                                                   (derivs[0], derivs[2])))
    mixed12 = np.linalg.solve(t_mat, _deriv_matrix(system, comp,
                                                   (derivs[1], derivs[2])))
    total = np.trace(triple)
    total -= np.trace(mixed01 @ b2) + np.trace(mixed02 @ b1) \
        + np.trace(mixed12 @ b0)
    total += np.trace(b0 @ b1 @ b2) + np.trace(b0 @ b2 @ b1)
    return float(total)
