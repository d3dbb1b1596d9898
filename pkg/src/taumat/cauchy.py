"""Formal Cauchy transforms, wave matrices and the bilinear residue identity.

The Cauchy transform of a weighted polynomial combination G against a
weight psi is the large-z series sum_i z^{-i-1} <x^i psi | G>.  Matching
these series against shifted-tau ratios, assembling them into the
(p+q) x (p+q) wave matrices, and checking the residue identity that couples
two independently deformed problems are the three jobs of this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .momat import (Composition, assemble, require_nondegenerate,
                    tau_shift_s, tau_shift_t)
from .mops import (MopsSolution, eps_mn, eps_n, pair_x_power, pair_y_power,
                   sigma_m, sigma_n, solve_dual_typeI, solve_dual_typeII,
                   solve_typeI, solve_typeII)
from .report import CheckResult, digest_inputs
from .series import LaurentSeries
from .system import TauSystem
from .times import schur_coeffs

RESIDUAL_FLOOR = 1e-30


def cauchy_series(system: TauSystem, alpha: int, sol: MopsSolution,
                  order: int) -> LaurentSeries:
    """sum_{i<=order} z^{-i-1} <x^i psi_alpha^{-s} | G> for a y-side G."""
    vals = np.array([pair_x_power(system, alpha, i, sol)
                     for i in range(order + 1)])
    return LaurentSeries(-(order + 1), vals[::-1],
                         exact_below=False, exact_above=True)


def dual_cauchy_series(system: TauSystem, beta: int, sol: MopsSolution,
                       order: int) -> LaurentSeries:
    """sum_{j<=order} z^{-j-1} <F | y^j phi_beta^t> for an x-side F."""
    vals = np.array([pair_y_power(system, beta, j, sol)
                     for j in range(order + 1)])
    return LaurentSeries(-(order + 1), vals[::-1],
                         exact_below=False, exact_above=True)


def _zray(zeta_series: LaurentSeries, top_power: int, sign: float,
          tau_val: float) -> LaurentSeries:
    """sign * z^top * series(zeta=1/z) / tau as a z-Laurent series."""
    return zeta_series.inverted().shifted(top_power).scaled(sign / tau_val)


def _series_residual(lhs: LaurentSeries, rhs: LaurentSeries,
                     lo: int, hi: int) -> float:
    """Max coefficient difference on [lo, hi], relative to the larger side."""
    scale = max(lhs.max_abs(), rhs.max_abs(), 1e-300)
    worst = 0.0
    for e in range(lo, hi + 1):
        worst = max(worst, abs(lhs.coeff(e) - rhs.coeff(e)) / scale)
    return worst


# -- Cauchy-transform identities -------------------------------------------

def verify_cauchy_identities(system: TauSystem, comp: Composition,
                             order: int = 8, tolerance: float = 1e-8,
                             label: str = "") -> list[CheckResult]:
    """Every Cauchy series against its shifted-tau ratio, coefficientwise."""
    tau_val = require_nondegenerate(assemble(system, comp))
    digest = digest_inputs({"comp": [comp.m, comp.n], "order": order,
                            "label": label})
    suffix = "." + label if label else ""
    out = []

    # x-side transforms of the monic family: first m_alpha coefficients
    # vanish, then the series is a shifted-tau ratio at an enlarged block.
    worst = 0.0
    zeros = 0.0
    for beta in range(system.p):
        sol = solve_typeII(system, comp, beta)
        for alpha in range(system.q):
            lhs = cauchy_series(system, alpha, sol,
                                comp.m[alpha] + order)
            comp2 = comp.shift(dm={alpha: +1}, dn={beta: +1})
            sh = tau_shift_s(system, comp2, alpha, "minus", order)
            rhs = _zray(sh, -comp.m[alpha] - 1,
                        eps_mn(alpha, beta, comp.m, comp.n), tau_val)
            worst = max(worst, _series_residual(
                lhs, rhs, -comp.m[alpha] - 1 - order, -comp.m[alpha] - 1))
            scale = max(lhs.max_abs(), 1e-300)
            for i in range(comp.m[alpha]):
                zeros = max(zeros, abs(lhs.coeff(-i - 1)) / scale)
    out.append(CheckResult(f"cauchy.type2{suffix}", worst, tolerance,
                           inputs_digest=digest))
    out.append(CheckResult(f"cauchy.type2.structural_zero{suffix}", zeros,
                           tolerance, inputs_digest=digest))

    # x-side transforms of the normalized family
    worst = 0.0
    for ap in range(system.q):
        if comp.m[ap] < 1:
            continue
        sol = solve_typeI(system, comp, ap)
        for alpha in range(system.q):
            lhs = cauchy_series(system, alpha, sol, comp.m[alpha] + order)
            if alpha == ap:
                sh = tau_shift_s(system, comp, alpha, "minus", order)
                rhs = _zray(sh, -comp.m[alpha], 1.0, tau_val)
                lo, hi = -comp.m[alpha] - order, -comp.m[alpha]
            else:
                comp2 = comp.shift(dm={alpha: +1, ap: -1})
                if comp2 is None:
                    continue
                sh = tau_shift_s(system, comp2, alpha, "minus", order)
                rhs = _zray(sh, -comp.m[alpha] - 1,
                            eps_n(ap, alpha, comp.m), tau_val)
                lo, hi = -comp.m[alpha] - 1 - order, -comp.m[alpha] - 1
            worst = max(worst, _series_residual(lhs, rhs, lo, hi))
    out.append(CheckResult(f"cauchy.type1{suffix}", worst, tolerance,
                           inputs_digest=digest))

    # y-side (dual) transforms of the dual families
    worst = 0.0
    for bp in range(system.p):
        if comp.n[bp] < 1:
            continue
        sol = solve_dual_typeI(system, comp, bp)
        for beta in range(system.p):
            lhs = dual_cauchy_series(system, beta, sol, comp.n[beta] + order)
            if beta == bp:
                sh = tau_shift_t(system, comp, beta, "plus", order)
                rhs = _zray(sh, -comp.n[beta], 1.0, tau_val)
                lo, hi = -comp.n[beta] - order, -comp.n[beta]
            else:
                comp2 = comp.shift(dn={beta: +1, bp: -1})
                if comp2 is None:
                    continue
                sh = tau_shift_t(system, comp2, beta, "plus", order)
                rhs = _zray(sh, -comp.n[beta] - 1,
                            eps_n(bp, beta, comp.n), tau_val)
                lo, hi = -comp.n[beta] - 1 - order, -comp.n[beta] - 1
            worst = max(worst, _series_residual(lhs, rhs, lo, hi))
    out.append(CheckResult(f"cauchy.dual_type1{suffix}", worst, tolerance,
                           inputs_digest=digest))

    worst = 0.0
    for alpha in range(system.q):
        sol = solve_dual_typeII(system, comp, alpha)
        for beta in range(system.p):
            lhs = dual_cauchy_series(system, beta, sol, comp.n[beta] + order)
            comp2 = comp.shift(dm={alpha: +1}, dn={beta: +1})
            sh = tau_shift_t(system, comp2, beta, "plus", order)
            rhs = _zray(sh, -comp.n[beta] - 1,
                        eps_mn(alpha, beta, comp.m, comp.n), tau_val)
            worst = max(worst, _series_residual(
                lhs, rhs, -comp.n[beta] - 1 - order, -comp.n[beta] - 1))
    out.append(CheckResult(f"cauchy.dual_type2{suffix}", worst, tolerance,
                           inputs_digest=digest))
    return out


# -- wave matrices -----------------------------------------------------------

@dataclass
class WaveMatrix:
    """(p+q) x (p+q) matrix of Laurent data, plus symbolic column factors.

    For kinds "W"/"Wstar" the diagonal exponential factor exp(+-xi(times, z))
    per column is kept symbolic in ``factors`` as (family, block, sign)
    rather than expanded, so identity checks can cancel it exactly.
    """

    kind: str
    comp: Composition
    entries: list[list[LaurentSeries]]
    factors: list[tuple[str, int, int]] | None = None

    @property
    def size(self) -> int:
        return len(self.entries)


def build_wave(system: TauSystem, comp: Composition, order: int = 10,
               kind: str = "Y") -> WaveMatrix:
    """Assemble the Riemann-Hilbert-type matrix from shifted-tau ratios."""
    if kind not in ("Y", "Ystar", "W", "Wstar"):
        raise ValueError(f"unknown wave matrix kind {kind!r}")
    star = kind in ("Ystar", "Wstar")
    tau_val = require_nondegenerate(assemble(system, comp))
    p, q = system.p, system.q
    size = p + q
    rows: list[list[LaurentSeries]] = [[None] * size for _ in range(size)]

    for r in range(size):
        for c in range(size):
            if not star:
                if r < p and c < p:
                    beta, bp = r, c
                    if beta == bp:
                        sh = tau_shift_t(system, comp, beta, "minus", order)
                        rows[r][c] = _zray(sh, comp.n[beta], 1.0, tau_val)
                    else:
                        comp2 = comp.shift(dn={beta: +1, bp: -1})
                        if comp2 is None:
                            rows[r][c] = LaurentSeries.zero()
                            continue
                        sh = tau_shift_t(system, comp2, bp, "minus", order)
                        rows[r][c] = _zray(sh, comp.n[bp] - 1,
                                           eps_n(beta, bp, comp.n), tau_val)
                elif r < p <= c:
                    beta, alpha = r, c - p
                    comp2 = comp.shift(dm={alpha: +1}, dn={beta: +1})
                    sh = tau_shift_s(system, comp2, alpha, "minus", order)
                    rows[r][c] = _zray(sh, -comp.m[alpha] - 1,
                                       eps_mn(alpha, beta, comp.m, comp.n),
                                       tau_val)
                elif c < p <= r:
                    alpha, beta = r - p, c
                    comp2 = comp.shift(dm={alpha: -1}, dn={beta: -1})
                    if comp2 is None:
                        rows[r][c] = LaurentSeries.zero()
                        continue
                    sh = tau_shift_t(system, comp2, beta, "minus", order)
                    rows[r][c] = _zray(sh, comp.n[beta] - 1,
                                       eps_mn(alpha, beta, comp.m, comp.n),
                                       tau_val)
                else:
                    ap, alpha = r - p, c - p
                    if ap == alpha:
                        sh = tau_shift_s(system, comp, alpha, "minus", order)
                        rows[r][c] = _zray(sh, -comp.m[alpha], 1.0, tau_val)
                    else:
                        comp2 = comp.shift(dm={alpha: +1, ap: -1})
                        if comp2 is None:
                            rows[r][c] = LaurentSeries.zero()
                            continue
                        sh = tau_shift_s(system, comp2, alpha, "minus", order)
                        rows[r][c] = _zray(sh, -comp.m[alpha] - 1,
                                           eps_n(ap, alpha, comp.m), tau_val)
            else:
                if r < p and c < p:
                    bp, beta = r, c
                    if bp == beta:
                        sh = tau_shift_t(system, comp, beta, "plus", order)
                        rows[r][c] = _zray(sh, -comp.n[beta], 1.0, tau_val)
                    else:
                        comp2 = comp.shift(dn={beta: +1, bp: -1})
                        if comp2 is None:
                            rows[r][c] = LaurentSeries.zero()
                            continue
                        sh = tau_shift_t(system, comp2, beta, "plus", order)
                        rows[r][c] = _zray(sh, -comp.n[beta] - 1,
                                           eps_n(bp, beta, comp.n), tau_val)
                elif r < p <= c:
                    beta, alpha = r, c - p
                    comp2 = comp.shift(dm={alpha: -1}, dn={beta: -1})
                    if comp2 is None:
                        rows[r][c] = LaurentSeries.zero()
                        continue
                    sh = tau_shift_s(system, comp2, alpha, "plus", order)
                    rows[r][c] = _zray(sh, comp.m[alpha] - 1,
                                       -eps_mn(alpha, beta, comp.m, comp.n),
                                       tau_val)
                elif c < p <= r:
                    alpha, beta = r - p, c
                    comp2 = comp.shift(dm={alpha: +1}, dn={beta: +1})
                    sh = tau_shift_t(system, comp2, beta, "plus", order)
                    rows[r][c] = _zray(sh, -comp.n[beta] - 1,
                                       -eps_mn(alpha, beta, comp.m, comp.n),
                                       tau_val)
                else:
                    alpha, ap = r - p, c - p
                    if alpha == ap:
                        sh = tau_shift_s(system, comp, alpha, "plus", order)
                        rows[r][c] = _zray(sh, comp.m[alpha], 1.0, tau_val)
                    else:
                        comp2 = comp.shift(dm={alpha: +1, ap: -1})
                        if comp2 is None:
                            rows[r][c] = LaurentSeries.zero()
                            continue
                        sh = tau_shift_s(system, comp2, ap, "plus", order)
                        rows[r][c] = _zray(sh, comp.m[ap] - 1,
                                           eps_n(alpha, ap, comp.m), tau_val)

    factors = None
    if kind in ("W", "Wstar"):
        sign = 1 if kind == "W" else -1
        factors = [("t", b, sign) for b in range(p)] + \
                  [("s", a, sign) for a in range(q)]
    return WaveMatrix(kind, comp, rows, factors)


def verify_wave_identity(system: TauSystem, comp: Composition,
                         order: int = 10, tolerance: float = 1e-8,
                         label: str = "") -> list[CheckResult]:
    """Duality of the matrix and its starred companion.

    For delta-supported line pairings the starred matrix is the exact
    inverse transpose, so every coefficient of the product (inside the
    trusted window, down to exponent -(order-2)) is compared against the
    identity.  For pairings that couple x and y non-locally (circle,
    plane, chain) that strong statement fails already at zero times --
    the circle product is (1 - z^-2) I -- and what the residue calculus
    actually guarantees is that the z^-1 coefficient of every product
    entry vanishes; that weaker orthogonality is what gets checked there.
    """
    from .measures import LineMeasure

    y = build_wave(system, comp, order, "Y")
    ys = build_wave(system, comp, order, "Ystar")
    size = y.size
    strong = isinstance(system.measure, LineMeasure)
    worst = 0.0
    for i in range(size):
        for j in range(size):
            acc = None
            for k in range(size):
                term = y.entries[i][k] * ys.entries[j][k]
                acc = term if acc is None else acc + term
            scale = max(acc.max_abs(), 1.0)
            if strong:
                lo = max(acc.lo, -(order - 2))
                for e in range(lo, acc.hi + 1):
                    want = 1.0 if (i == j and e == 0) else 0.0
                    worst = max(worst, abs(acc.coeff(e) - want) / scale)
            else:
                worst = max(worst, abs(acc.coeff(-1)) / scale)
    digest = digest_inputs({"comp": [comp.m, comp.n], "order": order})
    suffix = "." + label if label else ""
    kind = "inverse_transpose" if strong else "residue_orthogonality"
    return [CheckResult(f"wave.{kind}{suffix}", worst, tolerance,
                        inputs_digest=digest)]


def verify_wave_degrees(system: TauSystem, comp: Composition,
                        order: int = 8, tolerance: float = 1e-10,
                        label: str = "") -> list[CheckResult]:
    """Diagonal blocks are monic of the displayed degrees."""
    y = build_wave(system, comp, order, "Y")
    worst = 0.0
    for beta in range(system.p):
        e = y.entries[beta][beta]
        worst = max(worst, abs(e.coeff(comp.n[beta]) - 1.0))
        if e.hi > comp.n[beta]:
            worst = max(worst, np.max(np.abs(
                e.coeffs[comp.n[beta] - e.lo + 1:])))
    for alpha in range(system.q):
        e = y.entries[system.p + alpha][system.p + alpha]
        worst = max(worst, abs(e.coeff(-comp.m[alpha]) - 1.0))
        if e.hi > -comp.m[alpha]:
            worst = max(worst, np.max(np.abs(
                e.coeffs[-comp.m[alpha] - e.lo + 1:])))
    digest = digest_inputs({"comp": [comp.m, comp.n]})
    suffix = "." + label if label else ""
    return [CheckResult(f"wave.block_degrees{suffix}", float(worst), tolerance,
                        inputs_digest=digest)]


# -- residue identities -------------------------------------------------------

def verify_residue_pairings(system: TauSystem, comp: Composition,
                            rng: np.random.Generator, order: int = 8,
                            tolerance: float = 1e-10,
                            label: str = "") -> list[CheckResult]:
    """The formal-residue rules linking contour residues to pairings.

    For a polynomial f: residue of f(z) * (Cauchy series of G) recovers the
    pairing <f psi | G>, and mirrored for the dual transform.  Exercised
    with random cubic f and a random weighted combination G.
    """
    deg = 3
    digest = digest_inputs({"comp": [comp.m, comp.n], "label": label})
    suffix = "." + label if label else ""

    g_coeffs = tuple(rng.uniform(-1, 1, nb + 1) for nb in comp.n)
    g_sol = MopsSolution("type2", 0, comp, g_coeffs)
    f_coeffs = rng.uniform(-1, 1, deg + 1)
    f_poly = LaurentSeries(0, f_coeffs)

    worst = 0.0
    for alpha in range(system.q):
        transform = cauchy_series(system, alpha, g_sol, order)
        lhs = (f_poly * transform).residue()
        rhs = sum(fk * pair_x_power(system, alpha, k, g_sol)
                  for k, fk in enumerate(f_coeffs))
        scale = max(abs(lhs), abs(rhs), 1.0)
        worst = max(worst, abs(lhs - rhs) / scale)
    out = [CheckResult(f"residue.pairing_x{suffix}", worst, tolerance,
                       inputs_digest=digest)]

    h_coeffs = tuple(rng.uniform(-1, 1, ma + 1) for ma in comp.m)
    h_sol = MopsSolution("dual_type2", 0, comp, h_coeffs)
    worst = 0.0
    for beta in range(system.p):
        transform = dual_cauchy_series(system, beta, h_sol, order)
        lhs = (f_poly * transform).residue()
        rhs = sum(fk * pair_y_power(system, beta, k, h_sol)
                  for k, fk in enumerate(f_coeffs))
        scale = max(abs(lhs), abs(rhs), 1.0)
        worst = max(worst, abs(lhs - rhs) / scale)
    out.append(CheckResult(f"residue.pairing_y{suffix}", worst, tolerance,
                           inputs_digest=digest))
    return out


def bilinear_residual(system: TauSystem, system_star: TauSystem,
                      comp: Composition, comp_star: Composition,
                      order: int = 10) -> tuple[float, float]:
    """(|LHS - RHS|, scale) for the coupled residue identity.

    Requires |m| = |n| - 1 and |m*| = |n*| + 1.  Each summand multiplies an
    exact shift polynomial of one problem with a truncated shift series of
    the other and the exponential of the time difference; the exponential
    is expanded far enough that every stored series order contributes, so
    the only neglected terms carry Schur coefficients beyond that order.
    """
    if comp.size_m != comp.size_n - 1 or comp_star.size_m != comp_star.size_n + 1:
        raise ValueError("bilinear check needs |m| = |n|-1 and |m*| = |n*|+1")
    if system.p != system_star.p or system.q != system_star.q:
        raise ValueError("both problems must share (p, q)")

    lhs = 0.0
    rhs = 0.0
    magnitudes = [RESIDUAL_FLOOR]

    for b in range(system.p):
        c1 = comp.shift(dn={b: -1})
        c2 = comp_star.shift(dn={b: +1})
        if c1 is None or c2 is None:
            continue
        pol = tau_shift_t(system, c1, b, "minus", order)
        ser = tau_shift_t(system_star, c2, b, "plus", order)
        dt = system.t[b] - system_star.t[b]
        w = comp.n[b] - comp_star.n[b] - 2
        expo_order = order + len(pol.coeffs) + abs(w) + 2
        efac = LaurentSeries(0, schur_coeffs(dt, expo_order).values)
        prod = pol.inverted().mul_truncated(ser.inverted())
        prod = prod.mul_truncated(efac).shifted(w)
        sign = -1.0 if sigma_n(b, comp.n, comp_star.n) % 2 else 1.0
        term = sign * prod.coeff(-1)
        lhs += term
        magnitudes.append(abs(term))

    for a in range(system.q):
        c1 = comp.shift(dm={a: +1})
        c2 = comp_star.shift(dm={a: -1})
        if c1 is None or c2 is None:
            continue
        ser = tau_shift_s(system, c1, a, "minus", order)
        pol = tau_shift_s(system_star, c2, a, "plus", order)
        ds = system.s[a] - system_star.s[a]
        w = comp_star.m[a] - comp.m[a] - 2
        expo_order = order + len(pol.coeffs) + abs(w) + 2
        efac = LaurentSeries(0, schur_coeffs(ds, expo_order).values)
        prod = pol.inverted().mul_truncated(ser.inverted())
        prod = prod.mul_truncated(efac).shifted(w)
        sign = -1.0 if sigma_m(a, comp.m, comp_star.m) % 2 else 1.0
        term = sign * prod.coeff(-1)
        rhs += term
        magnitudes.append(abs(term))

    return abs(lhs - rhs), max(magnitudes)


def verify_bilinear(system: TauSystem, system_star: TauSystem,
                    comp: Composition, comp_star: Composition,
                    order: int = 10, tolerance: float = 1e-8,
                    label: str = "") -> CheckResult:
    diff, scale = bilinear_residual(system, system_star, comp, comp_star,
                                    order)
    digest = digest_inputs({
        "comp": [comp.m, comp.n], "comp_star": [comp_star.m, comp_star.n],
        "order": order, "label": label})
    suffix = "." + label if label else ""
    return CheckResult(f"bilinear.residue{suffix}", diff / scale, tolerance,
                       inputs_digest=digest)
