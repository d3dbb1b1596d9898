"""Non-intersection probabilities for Brownian bridges via block moments.

N unit-rate Brownian bridges run from clustered start points to clustered
end points on [0, 1]; conditioned on never meeting, the chance that every
path lies in a window at the observation time(s) is a ratio of two block
moment determinants.  Start clusters contribute power-block rows, end
clusters exponential-weight columns, and multi-time observation turns the
measure into a short chain of coupled Gaussian sites.

A rejection / exact-decomposition Monte-Carlo sampler provides an
independent estimate for small ensembles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigInvalid, RejectionStarvation
from .measures import FULL_LINE, ChainMeasure, Interval, LineMeasure
from .momat import Composition, assemble, tau
from .system import TauSystem
from .weights import WeightFamily, plain_exponential

Window = tuple[Interval, ...]


@dataclass(frozen=True)
class BridgeEnsemble:
    """Start and end clusters (position, multiplicity) and observation times."""

    starts: tuple[tuple[float, int], ...]
    ends: tuple[tuple[float, int], ...]
    times: tuple[float, ...] = (0.5,)

    def __post_init__(self):
        if sum(k for _, k in self.starts) != sum(k for _, k in self.ends):
            raise ConfigInvalid("start and end multiplicities must agree")
        if any(k < 1 for _, k in self.starts + self.ends):
            raise ConfigInvalid("cluster multiplicities must be positive")
        ts = self.times
        if not all(0.0 < a < 1.0 for a in ts) or list(ts) != sorted(set(ts)):
            raise ConfigInvalid(
                "observation times must be strictly increasing in (0, 1)")
        for pts in (self.starts, self.ends):
            vals = [v for v, _ in pts]
            if len(set(vals)) != len(vals):
                raise ConfigInvalid("cluster positions must be distinct")

    @property
    def size(self) -> int:
        return sum(k for _, k in self.starts)

    @classmethod
    def merged(cls, starts, ends, times=(0.5,)) -> "BridgeEnsemble":
        """Group repeated positions into clusters (order preserved by value)."""
        def group(pairs):
            acc: dict[float, int] = {}
            for v, k in pairs:
                acc[float(v)] = acc.get(float(v), 0) + int(k)
            return tuple(sorted(acc.items()))
        return cls(group(starts), group(ends), tuple(times))


def _site_scales(times: tuple[float, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Per-site variance scale lambda_l and per-link coupling c_l.

    With gaps D_l = t_l - t_{l-1} (t_0 = 0, t_{m+1} = 1), rescaling each
    slice by lambda_l = sqrt(D_l D_{l+1} / (D_l + D_{l+1})) turns the
    transition kernels into unit Gaussians with nearest-neighbour
    couplings c_l = sqrt(D_l D_{l+2} / ((D_l + D_{l+1})(D_{l+1} + D_{l+2}))).
    """
    grid = np.concatenate([[0.0], np.asarray(times), [1.0]])
    gaps = np.diff(grid)
    lam = np.sqrt(gaps[:-1] * gaps[1:] / (gaps[:-1] + gaps[1:]))
    m = len(times)
    coup = np.array([
        math.sqrt(gaps[l] * gaps[l + 2]
                  / ((gaps[l] + gaps[l + 1]) * (gaps[l + 1] + gaps[l + 2])))
        for l in range(m - 1)])
    return lam, coup


def _scale_window(window: Window | None, lam: float) -> Window:
    if window is None:
        return FULL_LINE
    return tuple((lo / lam, hi / lam) for lo, hi in window)


def km_system(ensemble: BridgeEnsemble,
              windows: tuple[Window | None, ...] | None = None,
              nodes: int = 0) -> tuple[TauSystem, Composition]:
    """Deformation-ready moment problem whose tau is the KM determinant."""
    m = len(ensemble.times)
    if windows is None:
        windows = (None,) * m
    if len(windows) != m:
        raise ConfigInvalid("one window per observation time required")
    lam, coup = _site_scales(ensemble.times)
    t1 = ensemble.times[0]
    tm = ensemble.times[-1]
    psi = tuple(plain_exponential(a * lam[0] / t1) for a, _ in ensemble.starts)
    phi = tuple(plain_exponential(b * lam[-1] / (1.0 - tm))
                for b, _ in ensemble.ends)
    wf = WeightFamily(psi=psi, phi=phi)
    comp = Composition(m=tuple(k for _, k in ensemble.starts),
                       n=tuple(k for _, k in ensemble.ends))
    domains = tuple(_scale_window(w, lam[l]) for l, w in enumerate(windows))
    if m == 1:
        measure = LineMeasure(domain=domains[0],
                              **({"nodes_legendre": nodes} if nodes else {}))
    else:
        measure = ChainMeasure(sites=m, couplings=tuple(coup),
                               domains=domains,
                               **({"nodes": nodes} if nodes else {}))
    return TauSystem(measure, wf), comp


@dataclass
class ProbabilityResult:
    numerator: float
    denominator: float
    probability: float
    diagnostics: dict = field(default_factory=dict)


def km_probability(ensemble: BridgeEnsemble,
                   windows: tuple[Window | None, ...] | None = None,
                   nodes: int = 0) -> ProbabilityResult:
    """P(every path in its window at each time | paths never meet)."""
    num_sys, comp = km_system(ensemble, windows, nodes)
    den_sys, _ = km_system(ensemble, None, nodes)
    num = tau(assemble(num_sys, comp))
    den = tau(assemble(den_sys, comp))
    if den <= 0:
        raise ConfigInvalid("degenerate denominator determinant")
    return ProbabilityResult(num, den, num / den, {
        "size": ensemble.size, "times": list(ensemble.times)})


def km_probability_unscaled(ensemble: BridgeEnsemble,
                            window: Window | None) -> float:
    """Single-time probability computed in raw path coordinates.

    Uses the time-dependent Gaussian density directly instead of the
    rescaled one; agreement with km_probability is a change-of-variables
    invariance check.
    """
    if len(ensemble.times) != 1:
        raise ConfigInvalid("raw-coordinate route is single-time only")
    t = ensemble.times[0]
    density_curvature = -0.5 / (t * (1.0 - t))
    from .weights import GaussianExponent
    density = GaussianExponent(c2=density_curvature)
    psi = tuple(plain_exponential(a / t) for a, _ in ensemble.starts)
    phi = tuple(plain_exponential(b / (1.0 - t)) for b, _ in ensemble.ends)
    wf = WeightFamily(psi=psi, phi=phi)
    comp = Composition(m=tuple(k for _, k in ensemble.starts),
                       n=tuple(k for _, k in ensemble.ends))
    num_sys = TauSystem(LineMeasure(density=density,
                                    domain=window or FULL_LINE), wf)
    den_sys = TauSystem(LineMeasure(density=density), wf)
    return tau(assemble(num_sys, comp)) / tau(assemble(den_sys, comp))


# -- Monte Carlo -------------------------------------------------------------

@dataclass
class MonteCarloResult:
    estimate: float
    stderr: float
    accepted: int
    diagnostics: dict = field(default_factory=dict)


def km_monte_carlo(ensemble: BridgeEnsemble,
                   windows: tuple[Window | None, ...] | None = None,
                   paths: int = 100_000, seed: int = 0,
                   steps: int = 200) -> MonteCarloResult:
    """Independent estimate of km_probability for ensembles of 1-3 paths.

    Distinct starts: rejection sampling of independent bridges, with the
    intersection test combining grid ordering and the exact
    between-grid-point crossing probability of each adjacent difference,
    so the acceptance event converges to true non-intersection.  Two
    paths from a common start: the conditioned difference is a
    three-dimensional Bessel bridge (rejection degenerates there), and the
    independent sum component stays Gaussian, which gives exact sampling.
    """
    n = ensemble.size
    if n > 3:
        raise ConfigInvalid("Monte-Carlo sampler supports at most 3 paths")
    if len(ensemble.times) != 1:
        raise ConfigInvalid("Monte-Carlo sampler is single-time only")
    t_obs = ensemble.times[0]
    window = windows[0] if windows else None
    rng = np.random.default_rng(seed)

    def in_window(x) -> bool:
        if window is None:
            return True
        return any(lo <= x <= hi for lo, hi in window)

    start_list = [a for a, k in ensemble.starts for _ in range(k)]
    end_list = [b for b, k in ensemble.ends for _ in range(k)]

    if n == 1:
        mu = start_list[0] * (1 - t_obs) + end_list[0] * t_obs
        sd = math.sqrt(t_obs * (1 - t_obs))
        xs = rng.normal(mu, sd, paths)
        if window is None:
            hits = np.ones(paths, dtype=bool)
        else:
            hits = np.zeros(paths, dtype=bool)
            for lo, hi in window:
                hits |= (xs >= lo) & (xs <= hi)
        est = float(np.mean(hits))
        return MonteCarloResult(est, math.sqrt(est * (1 - est) / paths),
                                paths, {"mode": "direct"})

    if n == 2 and len(ensemble.starts) == 1:
        # common start: exact decomposition into an independent Gaussian
        # sum and a Bessel(3) bridge difference (variance rate 2 each)
        b_lo, b_hi = end_list
        var = 2.0 * t_obs * (1 - t_obs)
        s_mu = (sum(start_list)) * (1 - t_obs) + (b_lo + b_hi) * t_obs
        s_vals = rng.normal(s_mu, math.sqrt(var), paths)
        drift = (b_hi - b_lo) * t_obs
        w = rng.normal(0.0, math.sqrt(var), (paths, 3))
        d_vals = np.sqrt((drift + w[:, 0]) ** 2 + w[:, 1] ** 2 + w[:, 2] ** 2)
        x1 = 0.5 * (s_vals - d_vals)
        x2 = 0.5 * (s_vals + d_vals)
        if window is None:
            hits = np.ones(paths, dtype=bool)
        else:
            hits = np.zeros(paths, dtype=bool)
            hits1 = np.zeros(paths, dtype=bool)
            for lo, hi in window:
                hits |= (x2 >= lo) & (x2 <= hi)
                hits1 |= (x1 >= lo) & (x1 <= hi)
            hits &= hits1
        est = float(np.mean(hits))
        return MonteCarloResult(est, math.sqrt(est * (1 - est) / paths),
                                paths, {"mode": "bessel_decomposition"})

    if len(start_list) != len(set(start_list)):
        raise RejectionStarvation(
            "rejection sampling degenerates for 3 paths with a shared start")

    order = np.argsort(start_list)
    starts = np.array(start_list)[order]
    ends = np.array(end_list)[order]
    if ends.tolist() != sorted(ends.tolist()):
        raise RejectionStarvation(
            "paths from ordered starts to unordered ends always cross")

    grid = np.linspace(0.0, 1.0, steps + 1)
    k_obs = int(np.clip(np.argmin(np.abs(grid - t_obs)), 1, steps - 1))
    grid[k_obs] = t_obs
    dt_grid = np.diff(grid)
    accepted = 0
    hits = 0
    attempts = 0
    max_attempts = max(paths * 2000, 100_000)
    batch = 2000
    while accepted < paths and attempts < max_attempts:
        attempts += batch
        incr = rng.normal(0.0, 1.0, (batch, n, steps)) * np.sqrt(dt_grid)
        walk = np.concatenate(
            [np.zeros((batch, n, 1)), np.cumsum(incr, axis=2)], axis=2)
        walk += starts[None, :, None]
        xs = walk - grid[None, None, :] * (
            walk[:, :, -1:] - ends[None, :, None])
        diffs = np.diff(xs, axis=1)  # adjacent path gaps
        ok = np.all(diffs > 0, axis=(1, 2))
        # exact crossing test inside each sub-interval for surviving pairs
        d0 = diffs[:, :, :-1]
        d1 = diffs[:, :, 1:]
        cross_p = np.exp(-d0 * d1 / dt_grid)  # variance rate 2 difference
        u = rng.random(cross_p.shape)
        ok &= np.all(u >= cross_p, axis=(1, 2))
        for idx in np.nonzero(ok)[0]:
            if accepted >= paths:
                break
            accepted += 1
            vals = xs[idx, :, k_obs]
            if all(in_window(v) for v in vals):
                hits += 1
    if accepted < max(paths, 1) and accepted / max(attempts, 1) < 1e-4:
        raise RejectionStarvation(
            f"acceptance rate {accepted / max(attempts, 1):.2e} too small")
    est = hits / accepted
    return MonteCarloResult(
        est, math.sqrt(max(est * (1 - est), 1e-12) / accepted), accepted,
        {"mode": "rejection", "acceptance": accepted / attempts,
         "steps": steps})
