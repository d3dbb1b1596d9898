"""Preset configurations with their specialized identity checks.

Each preset builds a concrete measure/weight family, runs the generic
identity suite (polynomial ratios, orthogonality, Cauchy matching, wave
matrices, PDE ladder) and adds the checks particular to its geometry:
Hermite reduction for the single-weight Gaussian, the shift quartet and
single-tau Wronskian for the two-sided deformation, recurrence and norm
product identities on the circle, and determinant/Monte-Carlo probability
cross-checks for non-intersecting bridges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cauchy import (dual_cauchy_series, verify_cauchy_identities,
                     verify_residue_pairings, verify_wave_degrees,
                     verify_wave_identity)
from .errors import ConfigInvalid
from .hirota import (mixed_compatibility_residual, verify_compatibility_pdes,
                     verify_pde_ladder)
from .km import BridgeEnsemble, km_monte_carlo, km_probability, \
    km_probability_unscaled, km_system
from .measures import CircleMeasure, LineMeasure
from .momat import Composition, assemble, log_tau_derivative, tau
from .mops import (biorthogonal_pairing, solve_dual_typeII, solve_typeII,
                   verify_orthogonality, verify_tau_ratios)
from .report import CheckResult, VerificationReport, digest_inputs
from .system import TauSystem
from .times import TimeVector
from .weights import WeightFamily, unit

SCENARIO_NAMES = ("gue", "biorthogonal", "circle", "brownian_two_endpoints",
                  "brownian_chain", "brownian_general")


@dataclass
class ScenarioConfig:
    name: str
    sizes: tuple[int, ...] = (1, 2, 3, 4)
    time_scale: float = 0.08
    truncation: int = 10
    tolerance: float = 1e-6
    seed: int = 0
    # bridge geometry (brownian presets)
    starts: tuple[tuple[float, int], ...] = ((0.0, 2),)
    ends: tuple[tuple[float, int], ...] = ((-0.5, 1), (0.5, 1))
    times: tuple[float, ...] = (0.5,)
    window: tuple[tuple[float, float], ...] = ((-1.0, 1.0),)
    mc_paths: int = 0
    quadrature_nodes: int = 0

    def __post_init__(self):
        if self.name not in SCENARIO_NAMES:
            raise ConfigInvalid(f"unknown scenario {self.name!r}; "
                                f"choose from {SCENARIO_NAMES}")
        if not self.sizes or min(self.sizes) < 1:
            raise ConfigInvalid("sizes must be positive")


def _small_times(rng, count, scale, support=2):
    return tuple(TimeVector.from_values(rng.uniform(-scale, scale, support))
                 for _ in range(count))


def _identity_suite(system: TauSystem, comp: Composition, cfg: ScenarioConfig,
                    rng, label: str) -> list[CheckResult]:
    checks = []
    checks += verify_tau_ratios(system, comp, tolerance=1e-8, label=label)
    checks += verify_orthogonality(system, comp, tolerance=1e-9, label=label)
    checks += verify_cauchy_identities(system, comp, order=8,
                                       tolerance=1e-8, label=label)
    checks += verify_wave_identity(system, comp, order=cfg.truncation,
                                   tolerance=1e-8, label=label)
    checks += verify_wave_degrees(system, comp, label=label)
    checks += verify_residue_pairings(system, comp, rng, tolerance=1e-10,
                                      label=label)
    checks += verify_pde_ladder(system, comp, tolerance=1e-7, label=label)
    checks += verify_compatibility_pdes(system, comp, tolerance=cfg.tolerance,
                                        label=label)
    return checks


def _hermite_monic(n: int) -> np.ndarray:
    """Monic Hermite coefficients for the weight exp(-x^2/2), ascending."""
    polys = [np.array([1.0]), np.array([0.0, 1.0])]
    for k in range(1, n):
        nxt = np.zeros(k + 2)
        nxt[1:] += polys[k]
        nxt[:k] -= k * polys[k - 1]
        polys.append(nxt)
    return polys[n]


def _poly_diff(a: np.ndarray, b: np.ndarray) -> float:
    width = max(len(a), len(b))
    pa = np.zeros(width)
    pb = np.zeros(width)
    pa[:len(a)] = a
    pb[:len(b)] = b
    return float(np.max(np.abs(pa - pb)))


def _run_gue(cfg: ScenarioConfig, report: VerificationReport) -> None:
    rng = np.random.default_rng(cfg.seed)
    wf = WeightFamily(psi=(unit(),), phi=(unit(),))
    system = TauSystem(LineMeasure(), wf)
    digest = digest_inputs({"scenario": "gue", "sizes": cfg.sizes})

    worst = 0.0
    for n in cfg.sizes:
        sol = solve_typeII(system, Composition((n,), (n,)), 0)
        worst = max(worst, _poly_diff(sol.coeffs[0], _hermite_monic(n)))
    report.add(CheckResult("scenario.gue.hermite", worst, 1e-10,
                           inputs_digest=digest))

    h1 = tau(assemble(system, Composition((2,), (2,)))) / \
        tau(assemble(system, Composition((1,), (1,))))
    report.add(CheckResult("scenario.gue.h1", abs(h1 - np.sqrt(2 * np.pi)),
                           1e-10, inputs_digest=digest))

    mixed = log_tau_derivative(system, Composition((1,), (1,)),
                               [("s", 0, 1), ("t", 0, 1)])
    report.add(CheckResult("scenario.gue.mixed_log_derivative",
                           abs(mixed + 1.0), 1e-9, inputs_digest=digest))

    n_suite = min(max(cfg.sizes), 5)  # identity suite stays at desk scale
    deformed = TauSystem(LineMeasure(), wf,
                         s=_small_times(rng, 1, cfg.time_scale),
                         t=_small_times(rng, 1, cfg.time_scale))
    comp = Composition((n_suite,), (n_suite,))
    report.extend(_identity_suite(deformed, comp, cfg, rng, "gue"))


def _biorthogonal_quartet(system: TauSystem, n: int, order: int):
    """Residuals of the four shift-ratio lines at block size n."""
    from .momat import tau_shift_s, tau_shift_t
    comp = Composition((n,), (n,))
    tau_n = tau(assemble(system, comp))
    p1 = solve_typeII(system, comp, 0).coeffs[0]
    p2 = solve_dual_typeII(system, comp, 0).coeffs[0]

    sh = tau_shift_t(system, comp, 0, "minus")
    line1 = _poly_diff(p1, sh.coeffs[::-1] / tau_n)
    sh = tau_shift_s(system, comp, 0, "plus")
    line2 = _poly_diff(p2, sh.coeffs[::-1] / tau_n)

    comp_up = Composition((n + 1,), (n + 1,))
    sol2 = solve_dual_typeII(system, comp, 0)
    lhs3 = dual_cauchy_series(system, 0, sol2, n + order)
    sh3 = tau_shift_t(system, comp_up, 0, "plus", order)
    line3 = max(abs(lhs3.coeff(-n - 1 - j) - sh3.coeffs[j] / tau_n)
                for j in range(order + 1))

    from .cauchy import cauchy_series
    sol1 = solve_typeII(system, comp, 0)
    lhs4 = cauchy_series(system, 0, sol1, n + order)
    sh4 = tau_shift_s(system, comp_up, 0, "minus", order)
    line4 = max(abs(lhs4.coeff(-n - 1 - j) - sh4.coeffs[j] / tau_n)
                for j in range(order + 1))
    scale = max(abs(tau_n), 1.0)
    return line1, line2, line3 / scale, line4 / scale


def _run_biorthogonal(cfg: ScenarioConfig, report: VerificationReport) -> None:
    rng = np.random.default_rng(cfg.seed)
    wf = WeightFamily(psi=(unit(),), phi=(unit(),))
    s = _small_times(rng, 1, cfg.time_scale)
    t = _small_times(rng, 1, cfg.time_scale)
    system = TauSystem(LineMeasure(), wf, s=s, t=t)
    digest = digest_inputs({"scenario": "biorthogonal", "sizes": cfg.sizes})

    lines = np.zeros(4)
    for n in cfg.sizes:
        lines = np.maximum(lines, _biorthogonal_quartet(system, n, 6))
    for idx, value in enumerate(lines, start=1):
        report.add(CheckResult(f"scenario.bio.shift_quartet.line{idx}",
                               float(value), 1e-8, inputs_digest=digest))

    # pairing of the two monic families is diagonal with norms tau ratios
    n_top = max(cfg.sizes)
    worst = 0.0
    taus = {n: tau(assemble(system, Composition((n,), (n,))))
            for n in range(n_top + 2)}
    for n in range(1, n_top + 1):
        dual = solve_dual_typeII(system, Composition((n,), (n,)), 0)
        for m in range(1, n_top + 1):
            prim = solve_typeII(system, Composition((m,), (m,)), 0)
            got = biorthogonal_pairing(system, dual, prim)
            want = taus[n + 1] / taus[n] if n == m else 0.0
            worst = max(worst, abs(got - want) / max(abs(want), 1.0))
    report.add(CheckResult("scenario.bio.biorthogonality", worst, 1e-9,
                           inputs_digest=digest))

    # with the product measure concentrated on x = y, the two-sided
    # deformation only enters through t - s
    worst = 0.0
    for shift in (-0.06, 0.03, 0.09):
        bumped = TimeVector.from_values([shift, -0.4 * shift])
        sys_a = TauSystem(LineMeasure(), wf,
                          s=(s[0] + bumped,), t=(t[0],))
        sys_b = TauSystem(LineMeasure(), wf,
                          s=(s[0],), t=(t[0] - bumped,))
        for n in cfg.sizes:
            comp = Composition((n,), (n,))
            ta = tau(assemble(sys_a, comp))
            tb = tau(assemble(sys_b, comp))
            worst = max(worst, abs(ta - tb) / max(abs(ta), abs(tb)))
    report.add(CheckResult("scenario.bio.difference_reduction", worst, 1e-12,
                           inputs_digest=digest))

    report.add(CheckResult(
        "scenario.bio.wronskian",
        mixed_compatibility_residual(system, Composition((n_top,), (n_top,))),
        cfg.tolerance, inputs_digest=digest))

    report.extend(_identity_suite(system, Composition((n_top,), (n_top,)),
                                  cfg, rng, "bio"))


def _run_circle(cfg: ScenarioConfig, report: VerificationReport) -> None:
    rng = np.random.default_rng(cfg.seed)
    wf = WeightFamily(psi=(unit(),), phi=(unit(),))
    measure = CircleMeasure()
    digest = digest_inputs({"scenario": "circle", "sizes": cfg.sizes})

    plain = TauSystem(measure, wf)
    worst = max(abs(tau(assemble(plain, Composition((n,), (n,)))) - 1.0)
                for n in cfg.sizes)
    report.add(CheckResult("scenario.circle.tau_identity", worst, 1e-12,
                           inputs_digest=digest))

    scale = min(cfg.time_scale, 0.1)
    s = _small_times(rng, 1, scale, support=3)
    t = _small_times(rng, 1, scale, support=3)
    system = TauSystem(measure, wf, s=s, t=t)

    # reflection pairing of the two monic families: the tail of the
    # one-step recurrence is the reversed dual polynomial
    worst = 0.0
    for n in cfg.sizes:
        p_up = solve_typeII(system, Composition((n + 1,), (n + 1,)), 0)
        p_lo = solve_typeII(system, Composition((n,), (n,)), 0)
        dual = solve_dual_typeII(system, Composition((n,), (n,)), 0)
        lhs = np.zeros(n + 1)
        lhs[:n + 2 - 1] += p_up.coeffs[0][:n + 1]
        lhs[1:] -= p_lo.coeffs[0][:n]  # z * p_n minus the monic heads
        rhs = p_up.coeffs[0][0] * dual.coeffs[0][::-1]
        worst = max(worst, _poly_diff(lhs, rhs))
    report.add(CheckResult("scenario.circle.recurrence", worst, 1e-9,
                           inputs_digest=digest))

    worst = 0.0
    for n in cfg.sizes:
        if n < 1:
            continue
        taus = {k: tau(assemble(system, Composition((k,), (k,))))
                for k in range(n - 1, n + 2)}
        h = {k: taus[k + 1] / taus[k] for k in (n - 1, n)}
        lhs = (1.0 - h[n] / h[n - 1])
        comp_n = Composition((n,), (n,))
        comp_up = Composition((n + 1,), (n + 1,))
        dt = log_tau_derivative(system, comp_up, [("t", 0, 1)]) - \
            log_tau_derivative(system, comp_n, [("t", 0, 1)])
        ds = log_tau_derivative(system, comp_up, [("s", 0, 1)]) - \
            log_tau_derivative(system, comp_n, [("s", 0, 1)])
        taus2 = tau(assemble(system, Composition((n + 2,), (n + 2,))))
        h_up = taus2 / taus[n + 1]
        product = (1.0 - h_up / h[n]) * lhs
        worst = max(worst, abs(product + dt * ds))
    report.add(CheckResult("scenario.circle.h_product", worst, 1e-9,
                           inputs_digest=digest))

    n_top = max(cfg.sizes)
    report.extend(_identity_suite(system, Composition((n_top,), (n_top,)),
                                  cfg, rng, "circle"))


def _run_brownian(cfg: ScenarioConfig, report: VerificationReport) -> None:
    rng = np.random.default_rng(cfg.seed)
    ensemble = BridgeEnsemble.merged(cfg.starts, cfg.ends, cfg.times)
    digest = digest_inputs({"scenario": cfg.name,
                            "starts": cfg.starts, "ends": cfg.ends,
                            "times": cfg.times})
    m = len(ensemble.times)

    full = km_probability(ensemble, None, nodes=cfg.quadrature_nodes)
    report.add(CheckResult(f"scenario.{cfg.name}.total_mass",
                           abs(full.probability - 1.0), 1e-10,
                           inputs_digest=digest))

    widths = (0.5, 1.0, 2.0, 4.0)
    probs = []
    for w in widths:
        windows = tuple(((-w * sc, w * sc),)
                        for sc in np.linspace(1.0, 1.3, m))
        probs.append(km_probability(ensemble, windows,
                                    nodes=cfg.quadrature_nodes).probability)
    grow = all(a <= b + 1e-12 for a, b in zip(probs, probs[1:]))
    report.add(CheckResult(f"scenario.{cfg.name}.monotonicity",
                           0.0 if grow and probs[-1] <= 1.0 + 1e-9 else 1.0,
                           0.5, detail=f"probs={np.round(probs, 6).tolist()}",
                           inputs_digest=digest))

    if m == 1:
        raw = km_probability_unscaled(ensemble, cfg.window)
        scaled = km_probability(ensemble, (cfg.window,),
                                nodes=cfg.quadrature_nodes).probability
        report.add(CheckResult(f"scenario.{cfg.name}.coordinate_invariance",
                               abs(raw - scaled), 1e-9,
                               inputs_digest=digest))

    if cfg.mc_paths and m == 1 and ensemble.size <= 3:
        det_p = km_probability(ensemble, (cfg.window,),
                               nodes=cfg.quadrature_nodes).probability
        mc = km_monte_carlo(ensemble, (cfg.window,), paths=cfg.mc_paths,
                            seed=cfg.seed + 1)
        report.add(CheckResult(
            f"scenario.{cfg.name}.monte_carlo",
            abs(mc.estimate - det_p), 3.0 * mc.stderr,
            detail=f"det={det_p:.6f} mc={mc.estimate:.6f} "
                   f"stderr={mc.stderr:.2e} mode={mc.diagnostics['mode']}",
            inputs_digest=digest))

    # identity suite on the deformed bridge problem
    sys0, comp = km_system(ensemble, None, nodes=cfg.quadrature_nodes)
    deformed = TauSystem(sys0.measure, sys0.weights,
                         s=_small_times(rng, sys0.q, cfg.time_scale),
                         t=_small_times(rng, sys0.p, cfg.time_scale))
    report.extend(_identity_suite(deformed, comp, cfg, rng, cfg.name))


def run_scenario(cfg: ScenarioConfig) -> VerificationReport:
    report = VerificationReport()
    if cfg.name == "gue":
        _run_gue(cfg, report)
    elif cfg.name == "biorthogonal":
        _run_biorthogonal(cfg, report)
    elif cfg.name == "circle":
        _run_circle(cfg, report)
    elif cfg.name == "brownian_two_endpoints":
        _run_brownian(cfg, report)
    elif cfg.name == "brownian_chain":
        if len(cfg.times) < 2:
            raise ConfigInvalid("brownian_chain needs at least two times")
        _run_brownian(cfg, report)
    elif cfg.name == "brownian_general":
        _run_brownian(cfg, report)
    else:  # pragma: no cover - guarded by ScenarioConfig
        raise ConfigInvalid(cfg.name)
    return report
