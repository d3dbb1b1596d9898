"""Randomized verification sweeps over backends, shapes and times.

The sweep draws block compositions, weight families and deformation times
inside a configured box, discards numerically degenerate draws, and runs
the full identity battery on each configuration.  The coupled residue
identity gets its own sweep because its series are only summable when the
moment growth is tamed: circle moments are bounded, so times roam the
whole box there, while Gaussian-type configurations run on a finite
window with the starred times drawn near the unstarred ones.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .cauchy import (verify_bilinear, verify_cauchy_identities,
                     verify_residue_pairings, verify_wave_degrees,
                     verify_wave_identity)
from .errors import DegenerateTau
from .hirota import verify_compatibility_pdes, verify_pde_ladder
from .measures import CircleMeasure, LineMeasure
from .momat import Composition, assemble, require_nondegenerate
from .mops import verify_orthogonality, verify_tau_ratios
from .report import CheckResult, VerificationReport
from .system import TauSystem
from .times import TimeVector
from .weights import WeightFamily, plain_exponential, unit

GAUSS_WINDOW = 2.5
BILINEAR_TIME_DELTA = 0.03


@dataclass(frozen=True)
class SweepSettings:
    seed: int = 0
    configs: int = 12
    bilinear_configs: int = 20
    max_block: int = 2
    max_total: int = 5
    time_support: int = 3
    time_scale: float = 0.2
    truncation: int = 10
    bilinear_truncation: int = 24
    ratio_tolerance: float = 1e-8
    orthogonality_tolerance: float = 1e-9
    cauchy_tolerance: float = 1e-8
    wave_tolerance: float = 1e-8
    bilinear_tolerance: float = 1e-8
    residue_tolerance: float = 1e-10
    ladder_tolerance: float = 1e-7
    compat_tolerance: float = 1e-6

    def with_tolerance(self, tol: float | None) -> "SweepSettings":
        if tol is None:
            return self
        return replace(self, ratio_tolerance=tol, orthogonality_tolerance=tol,
                       cauchy_tolerance=tol, wave_tolerance=tol,
                       bilinear_tolerance=tol, residue_tolerance=tol,
                       ladder_tolerance=tol, compat_tolerance=tol)


def _random_partition(rng, total: int, parts: int) -> tuple[int, ...]:
    """total split into `parts` positive integers, uniformly over cuts."""
    if parts == 1:
        return (total,)
    cuts = np.sort(rng.choice(np.arange(1, total), size=parts - 1,
                              replace=False))
    edges = np.concatenate([[0], cuts, [total]])
    return tuple(int(v) for v in np.diff(edges))


def _random_shape(rng, settings: SweepSettings) -> tuple[int, int, Composition]:
    p = int(rng.integers(1, settings.max_block + 1))
    q = int(rng.integers(1, settings.max_block + 1))
    total = int(rng.integers(max(p, q), settings.max_total + 1))
    return p, q, Composition(m=_random_partition(rng, total, q),
                             n=_random_partition(rng, total, p))


def _random_times(rng, count, scale, support):
    return tuple(TimeVector.from_values(rng.uniform(-scale, scale, support))
                 for _ in range(count))


def _gauss_weights(rng, p: int, q: int) -> WeightFamily:
    # distinct exponential tilts keep mixed blocks independent
    tilts = rng.uniform(0.25, 0.75, p + q) * rng.choice([-1.0, 1.0], p + q)
    return WeightFamily(psi=tuple(plain_exponential(c) for c in tilts[:q]),
                        phi=tuple(plain_exponential(c) for c in tilts[q:]))


def draw_configuration(rng, settings: SweepSettings, index: int
                       ) -> tuple[TauSystem, Composition, str]:
    """One nondegenerate random configuration; alternates the backend.

    Gaussian draws alternate between the full line (time support capped
    at 2 so the deformed integrand stays integrable) and a finite window
    that admits the full support box.
    """
    for _ in range(64):
        backend = ("circle", "gauss_line", "gauss_window")[index % 3]
        p, q, comp = _random_shape(rng, settings)
        if backend == "circle":
            wf = WeightFamily(psi=tuple(unit() for _ in range(q)),
                              phi=tuple(unit() for _ in range(p)))
            system = TauSystem(
                CircleMeasure(), wf,
                s=_random_times(rng, q, settings.time_scale,
                                settings.time_support),
                t=_random_times(rng, p, settings.time_scale,
                                settings.time_support))
        else:
            wf = _gauss_weights(rng, p, q)
            if backend == "gauss_line":
                measure = LineMeasure()
                support = min(settings.time_support, 2)
            else:
                measure = LineMeasure(domain=((-GAUSS_WINDOW, GAUSS_WINDOW),))
                support = settings.time_support
            system = TauSystem(
                measure, wf,
                s=_random_times(rng, q, settings.time_scale, support),
                t=_random_times(rng, p, settings.time_scale, support))
        try:
            require_nondegenerate(assemble(system, comp))
            # ill-conditioned ratios also spoil the checks when an
            # adjacent enlarged block determinant nearly vanishes
            for a in range(q):
                for b in range(p):
                    c2 = comp.shift(dm={a: +1}, dn={b: +1})
                    require_nondegenerate(assemble(system, c2))
            return system, comp, backend
        except DegenerateTau:
            continue
    raise DegenerateTau("could not draw a nondegenerate configuration")


def identity_sweep(settings: SweepSettings) -> list[CheckResult]:
    """Polynomial-ratio, orthogonality, Cauchy and wave checks per config."""
    rng = np.random.default_rng(settings.seed)
    out = []
    for index in range(settings.configs):
        system, comp, backend = draw_configuration(rng, settings, index)
        label = f"sweep{index:02d}.{backend}"
        out += verify_tau_ratios(system, comp,
                                 tolerance=settings.ratio_tolerance,
                                 label=label)
        out += verify_orthogonality(
            system, comp, tolerance=settings.orthogonality_tolerance,
            label=label)
        out += verify_cauchy_identities(
            system, comp, order=8, tolerance=settings.cauchy_tolerance,
            label=label)
        out += verify_wave_identity(
            system, comp, order=settings.truncation,
            tolerance=settings.wave_tolerance, label=label)
        out += verify_wave_degrees(system, comp, label=label)
        out += verify_residue_pairings(
            system, comp, rng, tolerance=settings.residue_tolerance,
            label=label)
    return out


def _bilinear_shapes(rng, settings) -> tuple[Composition, Composition, int, int]:
    p = int(rng.integers(1, settings.max_block + 1))
    q = int(rng.integers(1, settings.max_block + 1))
    total_n = int(rng.integers(max(p, q + 1), settings.max_total + 1))
    comp = Composition(m=_random_partition(rng, total_n - 1, q),
                       n=_random_partition(rng, total_n, p))
    total_ns = int(rng.integers(p, settings.max_total))
    comp_star = Composition(m=_random_partition(rng, total_ns + 1, q),
                            n=_random_partition(rng, total_ns, p))
    return comp, comp_star, p, q


def bilinear_sweep(settings: SweepSettings) -> list[CheckResult]:
    """Coupled residue identity across independently deformed problems."""
    rng = np.random.default_rng(settings.seed + 1)
    out = []
    for index in range(settings.bilinear_configs):
        comp, comp_star, p, q = _bilinear_shapes(rng, settings)
        circle = index % 2 == 0
        if circle:
            wf = WeightFamily(psi=tuple(unit() for _ in range(q)),
                              phi=tuple(unit() for _ in range(p)))
            measure = CircleMeasure()
            sys_a = TauSystem(
                measure, wf,
                s=_random_times(rng, q, settings.time_scale,
                                settings.time_support),
                t=_random_times(rng, p, settings.time_scale,
                                settings.time_support))
            sys_b = TauSystem(
                measure, wf,
                s=_random_times(rng, q, settings.time_scale,
                                settings.time_support),
                t=_random_times(rng, p, settings.time_scale,
                                settings.time_support))
            order = max(12, settings.truncation)
        else:
            # finite window keeps moment growth geometric; the starred
            # times sit near the plain ones so the exponential-factor
            # tail decays within the computed orders
            wf = _gauss_weights(rng, p, q)
            measure = LineMeasure(domain=((-2.0, 2.0),))
            scale = min(settings.time_scale, 0.16)
            s = _random_times(rng, q, scale, settings.time_support)
            t = _random_times(rng, p, scale, settings.time_support)
            sys_a = TauSystem(measure, wf, s=s, t=t)
            delta = BILINEAR_TIME_DELTA
            s2 = tuple(v + TimeVector.from_values(
                rng.uniform(-delta, delta, settings.time_support))
                for v in s)
            t2 = tuple(v + TimeVector.from_values(
                rng.uniform(-delta, delta, settings.time_support))
                for v in t)
            sys_b = TauSystem(measure, wf, s=s2, t=t2)
            order = settings.bilinear_truncation
        label = f"sweep{index:02d}.{'circle' if circle else 'gauss_window'}"
        out.append(verify_bilinear(sys_a, sys_b, comp, comp_star,
                                   order=order,
                                   tolerance=settings.bilinear_tolerance,
                                   label=label))
    return out


def pde_sweep(settings: SweepSettings) -> list[CheckResult]:
    """Hirota ladder and compatibility equations across backends."""
    rng = np.random.default_rng(settings.seed + 2)
    out = []
    count = max(3, settings.configs // 3)
    for index in range(count):
        system, comp, backend = draw_configuration(rng, settings, index)
        label = f"sweep{index:02d}.{backend}"
        out += verify_pde_ladder(system, comp,
                                 tolerance=settings.ladder_tolerance,
                                 order=8, label=label)
        out += verify_compatibility_pdes(
            system, comp, tolerance=settings.compat_tolerance, label=label)
    return out


def full_verification(settings: SweepSettings) -> VerificationReport:
    report = VerificationReport()
    report.extend(identity_sweep(settings))
    report.extend(bilinear_sweep(settings))
    report.extend(pde_sweep(settings))
    return report
