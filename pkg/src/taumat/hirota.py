"""Hirota bilinear coefficients and the tau-function PDE ladder.

The bilinear coefficient S_j(d~) F o G is read off as the zeta^j
coefficient of F(v + [zeta]) G(v - [zeta]), where one factor is an exact
shift polynomial and the other a truncated shift series, so no finite
differencing enters.  The ladder couples those coefficients to exact
second derivatives of ln tau; the compatibility equations are third order
and are checked in Wronskian-cleared form to avoid dividing by small
denominators.
"""

from __future__ import annotations

import numpy as np

from .errors import WindowTooNarrow
from .momat import (Composition, assemble, log_tau_derivative,
                    require_nondegenerate, tau_of, tau_shift_s, tau_shift_t)
from .report import CheckResult, digest_inputs
from .system import TauSystem

RESIDUAL_FLOOR = 1e-30


def hirota_coeff(system: TauSystem, comp_f: Composition, comp_g: Composition,
                 var: str, block: int, j: int, order: int = 8) -> float:
    """S_j applied in the direction (var, block) to the pair (F, G).

    F takes the +[zeta] substitution and G the -[zeta] one; on the t side
    the + direction is the truncated series and - terminates, on the s
    side the roles swap.  The product is trusted through zeta^order.
    """
    if j < 0:
        return 0.0
    if j > order:
        raise WindowTooNarrow(f"coefficient {j} beyond truncation {order}")
    if var == "t":
        f = tau_shift_t(system, comp_f, block, "plus", order)
        g = tau_shift_t(system, comp_g, block, "minus", order)
    elif var == "s":
        f = tau_shift_s(system, comp_f, block, "plus", order)
        g = tau_shift_s(system, comp_g, block, "minus", order)
    else:
        raise ValueError(f"unknown time family {var!r}")
    return (f * g).coeff(j)


def _scaled(diff: float, *magnitudes: float) -> float:
    return abs(diff) / max(*(abs(m) for m in magnitudes), RESIDUAL_FLOOR)


def verify_pde_ladder(system: TauSystem, comp: Composition,
                      ells=(0, 1, 2), tolerance: float = 1e-7,
                      order: int = 8, label: str = "") -> list[CheckResult]:
    """Second-derivative ladder plus the determinant-ratio identities."""
    tau_val = require_nondegenerate(assemble(system, comp))
    tau_sq = tau_val * tau_val
    digest = digest_inputs({"comp": [comp.m, comp.n], "ells": list(ells),
                            "label": label})
    suffix = "." + label if label else ""
    out = []

    def ltd(*derivs):
        return log_tau_derivative(system, comp, list(derivs))

    for ell in ells:
        worst_tt = 0.0
        worst_ss = 0.0
        worst_st = 0.0
        for beta in range(system.p):
            for bp in range(system.p):
                if beta == bp:
                    cf = cg = comp
                else:
                    cf = comp.shift(dn={beta: +1, bp: -1})
                    cg = comp.shift(dn={bp: +1, beta: -1})
                if cf is None or cg is None:
                    continue
                lhs = tau_sq * ltd(("t", beta, ell + 1), ("t", bp, 1))
                j = ell + 2 * (beta == bp)
                rhs = hirota_coeff(system, cf, cg, "t", beta, j, order)
                worst_tt = max(worst_tt, _scaled(lhs - rhs, lhs, rhs, tau_sq))
        for alpha in range(system.q):
            for ap in range(system.q):
                if alpha == ap:
                    cf = cg = comp
                else:
                    cf = comp.shift(dm={ap: +1, alpha: -1})
                    cg = comp.shift(dm={alpha: +1, ap: -1})
                if cf is None or cg is None:
                    continue
                lhs = tau_sq * ltd(("s", alpha, ell + 1), ("s", ap, 1))
                j = ell + 2 * (alpha == ap)
                rhs = hirota_coeff(system, cf, cg, "s", alpha, j, order)
                worst_ss = max(worst_ss, _scaled(lhs - rhs, lhs, rhs, tau_sq))
        for alpha in range(system.q):
            for beta in range(system.p):
                cf = comp.shift(dm={alpha: +1}, dn={beta: +1})
                cg = comp.shift(dm={alpha: -1}, dn={beta: -1})
                if cf is None or cg is None:
                    continue
                lhs = -tau_sq * ltd(("s", alpha, 1), ("t", beta, ell + 1))
                rhs = hirota_coeff(system, cf, cg, "t", beta, ell, order)
                worst_st = max(worst_st, _scaled(lhs - rhs, lhs, rhs, tau_sq))
                lhs = -tau_sq * ltd(("t", beta, 1), ("s", alpha, ell + 1))
                rhs = hirota_coeff(system, cg, cf, "s", alpha, ell, order)
                worst_st = max(worst_st, _scaled(lhs - rhs, lhs, rhs, tau_sq))
        out.append(CheckResult(f"pde.ladder.tt.l{ell}{suffix}", worst_tt,
                               tolerance, inputs_digest=digest))
        out.append(CheckResult(f"pde.ladder.ss.l{ell}{suffix}", worst_ss,
                               tolerance, inputs_digest=digest))
        out.append(CheckResult(f"pde.ladder.mixed.l{ell}{suffix}", worst_st,
                               tolerance, inputs_digest=digest))

    out.extend(_verify_ratio_identities(system, comp, tau_val, tolerance,
                                        digest, suffix))
    return out


def _verify_ratio_identities(system, comp, tau_val, tolerance, digest, suffix):
    """Determinant-ratio forms and the first-order quotient identities."""
    tau_sq = tau_val * tau_val

    def ltd(*derivs):
        return log_tau_derivative(system, comp, list(derivs))

    def ltd_at(comp2, *derivs):
        return log_tau_derivative(system, comp2, list(derivs))

    out = []
    worst = 0.0
    for beta in range(system.p):
        for bp in range(system.p):
            if beta == bp:
                continue
            cf = comp.shift(dn={beta: +1, bp: -1})
            cg = comp.shift(dn={bp: +1, beta: -1})
            if cf is None or cg is None:
                continue
            lhs = ltd(("t", beta, 1), ("t", bp, 1))
            rhs = tau_of(system, cf) * tau_of(system, cg) / tau_sq
            worst = max(worst, _scaled(lhs - rhs, lhs, rhs))
            # quotient form: d/dt_{beta,1} of ln(tau_+/tau_-) times the
            # l=0 ladder entry equals the l=1 one
            num = ltd(("t", beta, 2), ("t", bp, 1))
            grad = ltd_at(cf, ("t", beta, 1)) - ltd_at(cg, ("t", beta, 1))
            worst = max(worst, _scaled(grad * lhs - num, num, grad * lhs))
    out.append(CheckResult(f"pde.ratio.tt{suffix}", worst, tolerance,
                           inputs_digest=digest))

    worst = 0.0
    for alpha in range(system.q):
        for ap in range(system.q):
            if alpha == ap:
                continue
            cf = comp.shift(dm={ap: +1, alpha: -1})
            cg = comp.shift(dm={alpha: +1, ap: -1})
            if cf is None or cg is None:
                continue
            lhs = ltd(("s", alpha, 1), ("s", ap, 1))
            rhs = tau_of(system, cf) * tau_of(system, cg) / tau_sq
            worst = max(worst, _scaled(lhs - rhs, lhs, rhs))
            num = ltd(("s", alpha, 2), ("s", ap, 1))
            grad = ltd_at(cf, ("s", alpha, 1)) - ltd_at(cg, ("s", alpha, 1))
            worst = max(worst, _scaled(grad * lhs - num, num, grad * lhs))
    out.append(CheckResult(f"pde.ratio.ss{suffix}", worst, tolerance,
                           inputs_digest=digest))

    worst = 0.0
    for alpha in range(system.q):
        for beta in range(system.p):
            cp = comp.shift(dm={alpha: +1}, dn={beta: +1})
            cm = comp.shift(dm={alpha: -1}, dn={beta: -1})
            if cp is None or cm is None:
                continue
            lhs = ltd(("s", alpha, 1), ("t", beta, 1))
            rhs = -tau_of(system, cp) * tau_of(system, cm) / tau_sq
            worst = max(worst, _scaled(lhs - rhs, lhs, rhs))
            num = ltd(("t", beta, 2), ("s", alpha, 1))
            grad = ltd_at(cp, ("t", beta, 1)) - ltd_at(cm, ("t", beta, 1))
            worst = max(worst, _scaled(grad * lhs - num, num, grad * lhs))
            num = ltd(("s", alpha, 2), ("t", beta, 1))
            grad = ltd_at(cm, ("s", alpha, 1)) - ltd_at(cp, ("s", alpha, 1))
            worst = max(worst, _scaled(grad * lhs - num, num, grad * lhs))
    out.append(CheckResult(f"pde.ratio.mixed{suffix}", worst, tolerance,
                           inputs_digest=digest))
    return out


def verify_compatibility_pdes(system: TauSystem, comp: Composition,
                              tolerance: float = 1e-6,
                              label: str = "") -> list[CheckResult]:
    """Third-order single-tau equations, cleared of their denominators.

    Each equation says two derivative quotients have opposite variations;
    multiplied through by the square of the shared denominator it becomes
    a polynomial identity in third-order derivatives of ln tau.
    """
    require_nondegenerate(assemble(system, comp))
    digest = digest_inputs({"comp": [comp.m, comp.n], "label": label})
    suffix = "." + label if label else ""

    def ltd(*derivs):
        return log_tau_derivative(system, comp, list(derivs))

    out = []
    worst = 0.0
    for beta in range(system.p):
        for bp in range(beta + 1, system.p):
            n1 = ltd(("t", beta, 2), ("t", bp, 1))
            n2 = ltd(("t", bp, 2), ("t", beta, 1))
            den = ltd(("t", beta, 1), ("t", bp, 1))
            dn1 = ltd(("t", bp, 1), ("t", beta, 2), ("t", bp, 1))
            dn2 = ltd(("t", beta, 1), ("t", bp, 2), ("t", beta, 1))
            dden_b = ltd(("t", bp, 1), ("t", beta, 1), ("t", bp, 1))
            dden_a = ltd(("t", beta, 1), ("t", beta, 1), ("t", bp, 1))
            resid = (dn1 * den - n1 * dden_b) + (dn2 * den - n2 * dden_a)
            worst = max(worst, _scaled(resid, dn1 * den, n1 * dden_b,
                                       dn2 * den, n2 * dden_a))
    if system.p > 1:
        out.append(CheckResult(f"pde.compat.tt{suffix}", worst, tolerance,
                               inputs_digest=digest))

    worst = 0.0
    for alpha in range(system.q):
        for ap in range(alpha + 1, system.q):
            n1 = ltd(("s", alpha, 2), ("s", ap, 1))
            n2 = ltd(("s", ap, 2), ("s", alpha, 1))
            den = ltd(("s", alpha, 1), ("s", ap, 1))
            dn1 = ltd(("s", ap, 1), ("s", alpha, 2), ("s", ap, 1))
            dn2 = ltd(("s", alpha, 1), ("s", ap, 2), ("s", alpha, 1))
            dden_b = ltd(("s", ap, 1), ("s", alpha, 1), ("s", ap, 1))
            dden_a = ltd(("s", alpha, 1), ("s", alpha, 1), ("s", ap, 1))
            resid = (dn1 * den - n1 * dden_b) + (dn2 * den - n2 * dden_a)
            worst = max(worst, _scaled(resid, dn1 * den, n1 * dden_b,
                                       dn2 * den, n2 * dden_a))
    if system.q > 1:
        out.append(CheckResult(f"pde.compat.ss{suffix}", worst, tolerance,
                               inputs_digest=digest))

    worst = 0.0
    for alpha in range(system.q):
        for beta in range(system.p):
            worst = max(worst, mixed_compatibility_residual(
                system, comp, alpha, beta))
    out.append(CheckResult(f"pde.compat.mixed{suffix}", worst, tolerance,
                           inputs_digest=digest))
    return out


def mixed_compatibility_residual(system: TauSystem, comp: Composition,
                                 alpha: int = 0, beta: int = 0) -> float:
    """Scaled residual of the mixed-direction compatibility equation.

    In Wronskian notation {f, g}_x = f_x g - f g_x it reads
    {d2 ln tau / dt1 ds2, D}_{t1} + {d2 ln tau / ds1 dt2, D}_{s1} = 0
    with D = d2 ln tau / dt1 ds1; this is also the two-weight reduction
    reported by the scenario presets.
    """
    def ltd(*derivs):
        return log_tau_derivative(system, comp, list(derivs))

    n1 = ltd(("t", beta, 2), ("s", alpha, 1))
    n2 = ltd(("s", alpha, 2), ("t", beta, 1))
    den = ltd(("t", beta, 1), ("s", alpha, 1))
    dn1 = ltd(("s", alpha, 1), ("t", beta, 2), ("s", alpha, 1))
    dn2 = ltd(("t", beta, 1), ("s", alpha, 2), ("t", beta, 1))
    dden_s = ltd(("s", alpha, 1), ("t", beta, 1), ("s", alpha, 1))
    dden_t = ltd(("t", beta, 1), ("t", beta, 1), ("s", alpha, 1))
    resid = (dn1 * den - n1 * dden_s) + (dn2 * den - n2 * dden_t)
    return _scaled(resid, dn1 * den, n1 * dden_s, dn2 * den, n2 * dden_t)
