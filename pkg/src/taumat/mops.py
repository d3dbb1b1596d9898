"""Mixed multiple orthogonal polynomials from the block moment matrix.

Type II solutions attach a monic polynomial to one y-side weight; Type I
solutions normalize one pairing to 1.  Their coefficients come from one
pivoted solve against the moment matrix, and every family is also
representable as a ratio of shifted tau values, which is what
``verify_tau_ratios`` checks coefficient by coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTau, IndexOutOfRange
from .measures import ChainMeasure, CircleMeasure, LineMeasure, PlaneMeasure
from .momat import (Composition, assemble, require_nondegenerate, tau,
                    tau_shift_s, tau_shift_t)
from .report import CheckResult, digest_inputs
from .system import TauSystem
from .weights import WeightFamily

COEFF_FLOOR = 1e-12


# -- sign bookkeeping ----------------------------------------------------

def eps_n(beta: int, beta_p: int, n: tuple[int, ...]) -> int:
    """Column-exchange sign between y-side blocks beta != beta_p."""
    if beta == beta_p:
        raise IndexOutOfRange("sign defined for distinct blocks only")
    if beta > beta_p:
        expo = 1 + sum(n[beta_p + 1:beta + 1])
    else:
        expo = sum(n[beta + 1:beta_p + 1])
    return -1 if expo % 2 else 1


def eps_mn(alpha: int, beta: int, m: tuple[int, ...], n: tuple[int, ...]) -> int:
    """Leading sign (-1)^(m_1+..+m_alpha) (-1)^(n_1+..+n_beta)."""
    expo = sum(m[:alpha + 1]) + sum(n[:beta + 1])
    return -1 if expo % 2 else 1


def sigma_m(alpha: int, m, m_star) -> int:
    """Prefix-sum exponent comparing row compositions in the bilinear sum."""
    return sum(m[:alpha + 1]) - sum(m_star[:alpha + 1])


def sigma_n(beta: int, n, n_star) -> int:
    return sum(n[:beta + 1]) - sum(n_star[:beta + 1])


def delta_corr(beta_p: int, beta_pp: int, n, n_star) -> int:
    """Relabeling sign (-1)^(n_1+..+n_{beta'} + n*_1+..+n*_{beta''})."""
    expo = sum(n[:beta_p + 1]) + sum(n_star[:beta_pp + 1])
    return -1 if expo % 2 else 1


# -- polynomial solutions -------------------------------------------------

@dataclass
class MopsSolution:
    """Coefficient vectors (ascending degree), one per weight component.

    ``kind`` is one of type2/type1/dual_type2/dual_type1; y-side kinds hold
    one array per phi weight, dual (x-side) kinds one per psi weight.
    """

    kind: str
    index: int
    comp: Composition
    coeffs: tuple[np.ndarray, ...]

    @property
    def is_dual(self) -> bool:
        return self.kind.startswith("dual")

    def component_degrees(self) -> list[int]:
        return [len(c) - 1 for c in self.coeffs]


def _column_order_unpack(x: np.ndarray, sizes) -> list[np.ndarray]:
    out, at = [], 0
    for size in sizes:
        out.append(np.array(x[at:at + size]))
        at += size
    return out


def solve_typeII(system: TauSystem, comp: Composition, beta: int) -> MopsSolution:
    """Monic-at-beta polynomials orthogonal to all x-side power rows."""
    matrix = assemble(system, comp)
    require_nondegenerate(matrix)
    nb = comp.n[beta]
    rhs = np.concatenate([
        -system.moment_block(a, beta, comp.m[a] - 1, nb)[:, nb]
        if comp.m[a] else np.zeros(0)
        for a in range(system.q)])
    x = np.linalg.solve(matrix.entries, rhs) if matrix.size else rhs
    parts = _column_order_unpack(x, comp.n)
    parts[beta] = np.append(parts[beta], 1.0)  # exact monic head
    return MopsSolution("type2", beta, comp, tuple(parts))


def solve_typeI(system: TauSystem, comp: Composition, alpha: int) -> MopsSolution:
    """Polynomials whose pairing against the top x-power of block alpha is 1."""
    if comp.m[alpha] < 1:
        raise IndexOutOfRange("type I normalization needs a non-empty block")
    matrix = assemble(system, comp)
    require_nondegenerate(matrix)
    rhs = np.zeros(matrix.size)
    rhs[comp.row_offset(alpha) + comp.m[alpha] - 1] = 1.0
    x = np.linalg.solve(matrix.entries, rhs)
    return MopsSolution("type1", alpha, comp,
                        tuple(_column_order_unpack(x, comp.n)))


def solve_dual_typeII(system: TauSystem, comp: Composition, alpha: int) -> MopsSolution:
    """x-side mirror of solve_typeII: monic x-polynomial at block alpha."""
    matrix = assemble(system, comp)
    require_nondegenerate(matrix)
    ma = comp.m[alpha]
    rhs = np.concatenate([
        -system.moment_block(alpha, b, ma, comp.n[b] - 1)[ma, :]
        if comp.n[b] else np.zeros(0)
        for b in range(system.p)])
    x = np.linalg.solve(matrix.entries.T, rhs) if matrix.size else rhs
    parts = _column_order_unpack(x, comp.m)
    parts[alpha] = np.append(parts[alpha], 1.0)
    return MopsSolution("dual_type2", alpha, comp, tuple(parts))


def solve_dual_typeI(system: TauSystem, comp: Composition, beta: int) -> MopsSolution:
    if comp.n[beta] < 1:
        raise IndexOutOfRange("type I normalization needs a non-empty block")
    matrix = assemble(system, comp)
    require_nondegenerate(matrix)
    rhs = np.zeros(matrix.size)
    rhs[comp.col_offset(beta) + comp.n[beta] - 1] = 1.0
    x = np.linalg.solve(matrix.entries.T, rhs)
    return MopsSolution("dual_type1", beta, comp,
                        tuple(_column_order_unpack(x, comp.m)))


# -- pairings of solutions against powers ---------------------------------

def pair_x_power(system: TauSystem, alpha: int, i: int,
                 sol: MopsSolution) -> float:
    """<x^i psi_alpha | sum_b' A_{b'}(y) phi_{b'}^t> for a y-side solution."""
    acc = 0.0
    for b, part in enumerate(sol.coeffs):
        for j, cj in enumerate(part):
            if cj != 0.0:
                acc += cj * system.moment(alpha, b, i, j)
    return acc


def pair_y_power(system: TauSystem, beta: int, j: int,
                 sol: MopsSolution) -> float:
    """<sum_a' B_{a'}(x) psi_{a'}^{-s} | y^j phi_beta^t> for an x-side solution."""
    acc = 0.0
    for a, part in enumerate(sol.coeffs):
        for i, ci in enumerate(part):
            if ci != 0.0:
                acc += ci * system.moment(a, beta, i, j)
    return acc


def pair_scale(system: TauSystem, alpha: int, i: int, sol: MopsSolution) -> float:
    """Largest summand magnitude in pair_x_power; the residual scale."""
    mags = [abs(cj) * abs(system.moment(alpha, b, i, j))
            for b, part in enumerate(sol.coeffs)
            for j, cj in enumerate(part) if cj != 0.0]
    return max(mags, default=1.0)


def pair_scale_dual(system: TauSystem, beta: int, j: int, sol: MopsSolution) -> float:
    mags = [abs(ci) * abs(system.moment(a, beta, i, j))
            for a, part in enumerate(sol.coeffs)
            for i, ci in enumerate(part) if ci != 0.0]
    return max(mags, default=1.0)


def biorthogonal_pairing(system: TauSystem, dual_sol: MopsSolution,
                         sol: MopsSolution) -> float:
    """<dual-side combination | primal-side combination> over the measure."""
    acc = 0.0
    for a, pa in enumerate(dual_sol.coeffs):
        for i, ci in enumerate(pa):
            if ci == 0.0:
                continue
            for b, pb in enumerate(sol.coeffs):
                for j, cj in enumerate(pb):
                    if cj != 0.0:
                        acc += ci * cj * system.moment(a, b, i, j)
    return acc


# -- duality ---------------------------------------------------------------

def transpose_measure(measure):
    if isinstance(measure, (LineMeasure, CircleMeasure)):
        return measure  # symmetric pairings
    if isinstance(measure, (PlaneMeasure, ChainMeasure)):
        return measure.transposed()
    raise TypeError(f"unknown measure type {type(measure)!r}")


def dualize(system: TauSystem, comp: Composition) -> tuple[TauSystem, Composition]:
    """Swap the two sides of the problem.

    Exchanges (p, q), (m, n) and the weight families, negates and swaps
    the time vectors, and transposes the measure, so the moment matrix of
    the dual problem is the transpose of the original and tau is unchanged.
    Applying it twice is the identity.
    """
    wf = WeightFamily(psi=system.weights.phi, phi=system.weights.psi)
    dual = TauSystem(transpose_measure(system.measure), wf,
                     s=tuple(-v for v in system.t),
                     t=tuple(-v for v in system.s))
    return dual, Composition(m=comp.n, n=comp.m)


# -- tau-ratio verification -------------------------------------------------

def _compare(lhs: np.ndarray, rhs: np.ndarray) -> float:
    """Relative max coefficient error with an absolute floor."""
    n = max(len(lhs), len(rhs))
    a = np.zeros(n)
    b = np.zeros(n)
    a[:len(lhs)] = lhs
    b[:len(rhs)] = rhs
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), COEFF_FLOOR)
    return float(np.max(np.abs(a - b)) / scale)


def _ratio_poly_from_shift(series, top_power: int, sign: float,
                           tau_val: float) -> np.ndarray:
    """Ascending z-coefficients of sign * z^top * series(1/z) / tau."""
    c = series.coeffs
    out = np.zeros(top_power + 1)
    for d, cd in enumerate(c):
        k = top_power - d
        if k >= 0:
            out[k] = sign * cd / tau_val
    return out


def tau_ratio_polynomials(system: TauSystem, comp: Composition,
                          kind: str, index: int) -> list[np.ndarray]:
    """The polynomial family of ``kind`` computed purely from tau shifts."""
    tau_val = require_nondegenerate(assemble(system, comp))
    out = []
    if kind == "type2":
        beta = index
        for bp in range(system.p):
            if bp == beta:
                sh = tau_shift_t(system, comp, beta, "minus")
                out.append(_ratio_poly_from_shift(sh, comp.n[beta], 1.0, tau_val))
            else:
                comp2 = comp.shift(dn={beta: +1, bp: -1})
                if comp2 is None:
                    out.append(np.zeros(max(comp.n[bp], 1)))
                    continue
                sh = tau_shift_t(system, comp2, bp, "minus")
                sign = eps_n(beta, bp, comp.n)
                out.append(_ratio_poly_from_shift(
                    sh, comp.n[bp] - 1, sign, tau_val))
    elif kind == "type1":
        alpha = index
        for b in range(system.p):
            comp2 = comp.shift(dm={alpha: -1}, dn={b: -1})
            if comp2 is None:
                out.append(np.zeros(max(comp.n[b], 1)))
                continue
            sh = tau_shift_t(system, comp2, b, "minus")
            sign = eps_mn(alpha, b, comp.m, comp.n)
            out.append(_ratio_poly_from_shift(sh, comp.n[b] - 1, sign, tau_val))
    elif kind == "dual_type2":
        alpha = index
        for ap in range(system.q):
            if ap == alpha:
                sh = tau_shift_s(system, comp, alpha, "plus")
                out.append(_ratio_poly_from_shift(sh, comp.m[alpha], 1.0, tau_val))
            else:
                comp2 = comp.shift(dm={alpha: +1, ap: -1})
                if comp2 is None:
                    out.append(np.zeros(max(comp.m[ap], 1)))
                    continue
                sh = tau_shift_s(system, comp2, ap, "plus")
                sign = eps_n(alpha, ap, comp.m)
                out.append(_ratio_poly_from_shift(
                    sh, comp.m[ap] - 1, sign, tau_val))
    elif kind == "dual_type1":
        beta = index
        for a in range(system.q):
            comp2 = comp.shift(dm={a: -1}, dn={beta: -1})
            if comp2 is None:
                out.append(np.zeros(max(comp.m[a], 1)))
                continue
            sh = tau_shift_s(system, comp2, a, "plus")
            sign = eps_mn(a, beta, comp.m, comp.n)
            out.append(_ratio_poly_from_shift(sh, comp.m[a] - 1, sign, tau_val))
    else:
        raise ValueError(f"unknown solution kind {kind!r}")
    return out


_SOLVERS = {
    "type2": solve_typeII,
    "type1": solve_typeI,
    "dual_type2": solve_dual_typeII,
    "dual_type1": solve_dual_typeI,
}


def verify_tau_ratios(system: TauSystem, comp: Composition,
                      tolerance: float = 1e-8,
                      label: str = "") -> list[CheckResult]:
    """Linear-solve polynomials against tau-shift ratios, every family."""
    digest = digest_inputs({"comp": [comp.m, comp.n], "label": label})
    out = []
    for kind, count in (("type2", system.p), ("type1", system.q),
                        ("dual_type2", system.q), ("dual_type1", system.p)):
        worst = 0.0
        for index in range(count):
            if kind.endswith("type1"):
                blocks = comp.m if kind == "type1" else comp.n
                if blocks[index] < 1:
                    continue
            sol = _SOLVERS[kind](system, comp, index)
            ratios = tau_ratio_polynomials(system, comp, kind, index)
            for got, want in zip(sol.coeffs, ratios):
                worst = max(worst, _compare(got, want))
        out.append(CheckResult(
            check_id=f"mops.tau_ratio.{kind}{'.' + label if label else ''}",
            residual=worst, tolerance=tolerance, inputs_digest=digest))
    return out


def verify_orthogonality(system: TauSystem, comp: Composition,
                         tolerance: float = 1e-9,
                         label: str = "") -> list[CheckResult]:
    """Defining orthogonality and normalization residuals for all families."""
    digest = digest_inputs({"comp": [comp.m, comp.n], "label": label})
    out = []

    worst = 0.0
    for beta in range(system.p):
        sol = solve_typeII(system, comp, beta)
        for a in range(system.q):
            for i in range(comp.m[a]):
                r = abs(pair_x_power(system, a, i, sol))
                worst = max(worst, r / pair_scale(system, a, i, sol))
    out.append(CheckResult(f"mops.orthogonality.type2{'.' + label if label else ''}",
                           worst, tolerance, inputs_digest=digest))

    worst = 0.0
    for alpha in range(system.q):
        if comp.m[alpha] < 1:
            continue
        sol = solve_typeI(system, comp, alpha)
        for a in range(system.q):
            for i in range(comp.m[a]):
                want = 1.0 if (a == alpha and i == comp.m[alpha] - 1) else 0.0
                r = abs(pair_x_power(system, a, i, sol) - want)
                worst = max(worst, r / max(pair_scale(system, a, i, sol), 1.0))
    out.append(CheckResult(f"mops.orthogonality.type1{'.' + label if label else ''}",
                           worst, tolerance, inputs_digest=digest))

    worst = 0.0
    for alpha in range(system.q):
        sol = solve_dual_typeII(system, comp, alpha)
        for b in range(system.p):
            for j in range(comp.n[b]):
                r = abs(pair_y_power(system, b, j, sol))
                worst = max(worst, r / pair_scale_dual(system, b, j, sol))
    out.append(CheckResult(f"mops.orthogonality.dual_type2{'.' + label if label else ''}",
                           worst, tolerance, inputs_digest=digest))

    worst = 0.0
    for beta in range(system.p):
        if comp.n[beta] < 1:
            continue
        sol = solve_dual_typeI(system, comp, beta)
        for b in range(system.p):
            for j in range(comp.n[b]):
                want = 1.0 if (b == beta and j == comp.n[beta] - 1) else 0.0
                r = abs(pair_y_power(system, b, j, sol) - want)
                worst = max(worst, r / max(pair_scale_dual(system, b, j, sol), 1.0))
    out.append(CheckResult(f"mops.orthogonality.dual_type1{'.' + label if label else ''}",
                           worst, tolerance, inputs_digest=digest))
    return out
