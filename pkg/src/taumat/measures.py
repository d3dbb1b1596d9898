"""Measure backends for the deformed pairing <x^i psi_a^{-s} | y^j phi_b^t>.

Four geometries are supported:

* ``LineMeasure``   -- delta(x-y) rho(y) dy on a union of intervals;
* ``CircleMeasure`` -- the unit-circle pairing of f(1/z) against g(z);
* ``PlaneMeasure``  -- a coupled two-variable Gaussian density on R^2;
* ``ChainMeasure``  -- a short chain of coupled Gaussian sites, with the
  x-side function attached to the first site and the y-side to the last.

Line moments with a quadratic combined exponent use an exact recursion;
everything else falls back to Gauss quadrature on (possibly truncated)
domains.  Circle moments are convolutions of Schur coefficients of the two
time vectors, which is exact up to a reported truncation tail.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DivergentIntegral, UnsupportedBackend
from .times import TimeVector, schur_coeffs
from .weights import GaussianExponent, WeightFamily, gaussian

Interval = tuple[float, float]
FULL_LINE: tuple[Interval, ...] = ((-np.inf, np.inf),)

# Half-width, in effective standard deviations, used when an unbounded
# domain is truncated for Gauss-Legendre quadrature.  exp(-13^2/2) ~ 2e-37
# is far below every tolerance in the test suite.
TRUNCATION_SIGMAS = 13.0


@lru_cache(maxsize=32)
def _hermgauss(n: int):
    return np.polynomial.hermite.hermgauss(n)


@lru_cache(maxsize=32)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def _trim(coeffs: np.ndarray) -> np.ndarray:
    """Drop trailing (near-)zero coefficients of an exponent polynomial."""
    c = np.asarray(coeffs, dtype=float)
    nz = np.nonzero(c)[0]
    if len(nz) == 0:
        return c[:1]
    return c[:nz[-1] + 1]


def _check_integrable(coeffs: np.ndarray, lo: float, hi: float) -> None:
    """Reject exponent polynomials that blow up at an unbounded endpoint."""
    c = _trim(coeffs)
    deg = len(c) - 1
    if hi == np.inf:
        if deg == 0 or c[deg] > 0:
            raise DivergentIntegral(
                f"exponent of degree {deg} with top coefficient "
                f"{c[deg]:+g} diverges as x -> +inf")
    if lo == -np.inf:
        top = c[deg] * (-1.0) ** deg
        if deg == 0 or top > 0:
            raise DivergentIntegral(
                f"exponent of degree {deg} with top coefficient "
                f"{c[deg]:+g} diverges as x -> -inf")


def gaussian_power_moments(c0: float, c1: float, c2: float, nmax: int) -> np.ndarray:
    """Exact I_N = int x^N exp(c0 + c1 x + c2 x^2) dx over R, for c2 < 0.

    Integration by parts gives 2 c2 I_N + c1 I_{N-1} + (N-1) I_{N-2} = 0.
    """
    if c2 >= 0:
        raise DivergentIntegral("quadratic coefficient must be negative")
    out = np.empty(nmax + 1)
    out[0] = np.sqrt(np.pi / -c2) * np.exp(c0 - c1 * c1 / (4.0 * c2))
    if nmax >= 1:
        out[1] = -c1 / (2.0 * c2) * out[0]
    for n in range(2, nmax + 1):
        out[n] = -(c1 * out[n - 1] + (n - 1) * out[n - 2]) / (2.0 * c2)
    return out


def _polyval_ascending(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyval(x, coeffs)


def _quadrature_grid(coeffs: np.ndarray, domain: tuple[Interval, ...],
                     nodes_hermite: int, nodes_legendre: int):
    """Nodes/weights for int x^N exp(P(x)) dx on a union of intervals.

    Unbounded pieces either use Gauss-Hermite centered on the quadratic
    part of P, or are truncated at TRUNCATION_SIGMAS and handed to
    Gauss-Legendre.  Returns (x, w) with the exponential absorbed into w.
    """
    c = _trim(coeffs)
    xs, ws = [], []
    for lo, hi in domain:
        _check_integrable(c, lo, hi)
        if lo == -np.inf or hi == np.inf:
            if len(c) < 3 or c[2] >= 0:
                raise DivergentIntegral(
                    "unbounded domain requires a negative quadratic term")
            mu = -c[1] / (2.0 * c[2])
            sigma = 1.0 / np.sqrt(-2.0 * c[2])
            if lo == -np.inf and hi == np.inf:
                u, w = _hermgauss(nodes_hermite)
                x = mu + np.sqrt(2.0) * sigma * u
                # P(x) + u^2 cancels the quadratic part exactly, so only
                # the degree >= 3 remainder enters the exponential.
                rest = _polyval_ascending(c, x) - (
                    c[0] + c[1] * x + c[2] * x * x)
                amp = c[0] + c[1] * mu + c[2] * mu * mu
                xs.append(x)
                ws.append(np.sqrt(2.0) * sigma * w * np.exp(amp + rest))
                continue
            lo_t = mu - TRUNCATION_SIGMAS * sigma if lo == -np.inf else lo
            hi_t = mu + TRUNCATION_SIGMAS * sigma if hi == np.inf else hi
            lo, hi = min(lo_t, hi_t), max(lo_t, hi_t)
            if hi <= lo:
                continue
        u, w = _leggauss(nodes_legendre)
        x = 0.5 * (hi + lo) + 0.5 * (hi - lo) * u
        xs.append(x)
        ws.append(0.5 * (hi - lo) * w * np.exp(_polyval_ascending(c, x)))
    if not xs:
        raise DivergentIntegral("empty integration domain")
    return np.concatenate(xs), np.concatenate(ws)


def _combine_exponents(*pieces) -> np.ndarray:
    """Sum exponent polynomials given as coefficient arrays (ascending)."""
    length = max(len(p) for p in pieces)
    out = np.zeros(length)
    for p in pieces:
        out[:len(p)] += p
    return out


@dataclass(frozen=True)
class LineMeasure:
    """Pairing int_E f(u) g(u) rho(u) du with rho = exp(polynomial)."""

    density: GaussianExponent = gaussian()
    domain: tuple[Interval, ...] = FULL_LINE
    nodes_hermite: int = 200
    nodes_legendre: int = 400

    @property
    def is_full_line(self) -> bool:
        return self.domain == FULL_LINE

    def _exponent(self, wf: WeightFamily, alpha: int, beta: int,
                  s_a: TimeVector, t_b: TimeVector) -> np.ndarray:
        return _combine_exponents(
            self.density.exponent_coeffs(),
            wf.psi[alpha].exponent_coeffs(),
            wf.phi[beta].exponent_coeffs(),
            t_b.poly_coeffs(),
            -s_a.poly_coeffs(),
        )

    def moment_totals(self, wf, alpha, beta, s_a, t_b, deg_max,
                      force_quadrature=False) -> np.ndarray:
        """Moments of total degree 0..deg_max (entries depend on i+j only)."""
        c = _trim(self._exponent(wf, alpha, beta, s_a, t_b))
        if (not force_quadrature and self.is_full_line
                and len(c) == 3 and c[2] < 0):
            return gaussian_power_moments(c[0], c[1], c[2], deg_max)
        if not force_quadrature and self.is_full_line and len(c) < 3:
            _check_integrable(c, -np.inf, np.inf)
        x, w = _quadrature_grid(c, self.domain,
                                self.nodes_hermite, self.nodes_legendre)
        powers = x[None, :] ** np.arange(deg_max + 1)[:, None]
        return powers @ w

    def moment_table(self, wf, alpha, beta, s_a, t_b, imax, jmax) -> np.ndarray:
        totals = self.moment_totals(wf, alpha, beta, s_a, t_b, imax + jmax)
        i = np.arange(imax + 1)[:, None]
        j = np.arange(jmax + 1)[None, :]
        return totals[i + j]

    def restricted(self, domain: tuple[Interval, ...]) -> "LineMeasure":
        return LineMeasure(self.density, tuple(domain),
                           self.nodes_hermite, self.nodes_legendre)


@dataclass(frozen=True)
class CircleMeasure:
    """Unit-circle pairing: the (i, j) moment is the z^{i-j} coefficient of
    exp(sum t_k z^k) * exp(-sum s_k z^-k), a Schur-coefficient convolution
    truncated at ``conv_order``."""

    conv_order: int = 40

    def _require_unit(self, wf: WeightFamily) -> None:
        if not wf.all_unit:
            raise UnsupportedBackend(
                "circle pairing is implemented for unit base weights only")

    def moment_diff(self, wf, alpha, beta, s_a, t_b, diff: int) -> float:
        """Moment as a function of i - j."""
        self._require_unit(wf)
        a_max = self.conv_order
        st = schur_coeffs(t_b, a_max).values
        ss = schur_coeffs(-s_a, a_max).values
        if diff >= 0:
            # sum_a st[a] * ss[a - diff]
            return float(st[diff:] @ ss[:a_max + 1 - diff])
        return float(st[:a_max + 1 + diff] @ ss[-diff:])

    def moment_table(self, wf, alpha, beta, s_a, t_b, imax, jmax) -> np.ndarray:
        self._require_unit(wf)
        a_max = self.conv_order
        st = schur_coeffs(t_b, a_max).values
        ss = schur_coeffs(-s_a, a_max).values
        full = np.convolve(st, ss[::-1])  # index a - b + a_max
        diffs = np.arange(-jmax, imax + 1)
        vals = np.zeros_like(diffs, dtype=float)
        ok = np.abs(diffs) <= a_max
        vals[ok] = full[diffs[ok] + a_max]
        i = np.arange(imax + 1)[:, None]
        j = np.arange(jmax + 1)[None, :]
        return vals[(i - j) + jmax]

    def tail_estimate(self, s_a: TimeVector, t_b: TimeVector) -> float:
        a_max = self.conv_order
        return (abs(schur_coeffs(t_b, a_max)[a_max])
                + abs(schur_coeffs(-s_a, a_max)[a_max]))


def _site_grid(quad_coeff: float, lin_coeff: float,
               domain: tuple[Interval, ...], sigma_inflation: float,
               nodes: int):
    """Truncated Gauss-Legendre grid for one lattice site (no site weight)."""
    if quad_coeff >= 0:
        raise DivergentIntegral("lattice site needs a negative quadratic term")
    sigma = sigma_inflation / np.sqrt(-2.0 * quad_coeff)
    mu = -lin_coeff / (2.0 * quad_coeff)
    xs, ws = [], []
    for lo, hi in domain:
        lo = mu - TRUNCATION_SIGMAS * sigma if lo == -np.inf else lo
        hi = mu + TRUNCATION_SIGMAS * sigma if hi == np.inf else hi
        if hi <= lo:
            continue
        u, w = _leggauss(nodes)
        xs.append(0.5 * (hi + lo) + 0.5 * (hi - lo) * u)
        ws.append(0.5 * (hi - lo) * w)
    if not xs:
        raise DivergentIntegral("empty integration domain for lattice site")
    return np.concatenate(xs), np.concatenate(ws)


def _lattice_table(site_quads, site_lins, domains, couplings, f_exp, g_exp,
                   imax, jmax, nodes, sigma_inflation):
    """Contract a chain of coupled Gaussian sites against end-point factors.

    site_quads[l] is the coefficient of x^2 in site l's base exponent
    (e.g. -1/2).  The x-side factor exp(f_exp) with powers x^i sits on site
    0, the y-side on the last site.  Couplings are exp(c_l * x_l * x_{l+1}).
    The base quadratics are allocated to the adjacent kernels so that every
    kernel is a non-positive-definite exponent, which keeps all kernel
    entries bounded by a constant.
    """
    m = len(site_quads)
    grids = [_site_grid(site_quads[l], site_lins[l], domains[l],
                        sigma_inflation, nodes) for l in range(m)]

    if m == 1:
        x, w = grids[0]
        extra = _polyval_ascending(
            _combine_exponents(np.array([0.0, site_lins[0], site_quads[0]]),
                               f_exp, g_exp), x)
        wt = w * np.exp(extra)
        pi = x[None, :] ** np.arange(imax + 1)[:, None]
        pj = x[None, :] ** np.arange(jmax + 1)[:, None]
        return (pi * wt) @ pj.T

    # shares[l] = fraction of site l's quadratic given to its left kernel
    shares = np.zeros(m)
    for l in range(1, m - 1):
        cl2 = couplings[l - 1] ** 2
        cr2 = couplings[l] ** 2
        if cl2 + cr2 >= 1.0:
            raise DivergentIntegral(
                "chain couplings too strong for a convergent lattice")
        shares[l] = cl2 + 0.5 * (1.0 - cl2 - cr2)
    shares[m - 1] = 1.0

    kernels = []
    for l in range(m - 1):
        xl, _ = grids[l]
        xr, wr = grids[l + 1]
        left_share = 1.0 - shares[l] if l > 0 else 1.0
        right_share = shares[l + 1]
        expo = (site_quads[l] * left_share * xl[:, None] ** 2
                + site_quads[l + 1] * right_share * xr[None, :] ** 2
                + couplings[l] * xl[:, None] * xr[None, :]
                + site_lins[l + 1] * xr[None, :])
        kernels.append(np.exp(expo) * wr[None, :])

    x0, w0 = grids[0]
    f_wt = w0 * np.exp(_polyval_ascending(
        _combine_exponents(np.array([0.0, site_lins[0]]), f_exp), x0))
    xm, _ = grids[m - 1]
    g_vals = np.exp(_polyval_ascending(g_exp, xm))

    left = (x0[None, :] ** np.arange(imax + 1)[:, None]) * f_wt  # (I+1, N)
    for k in kernels:
        left = left @ k
    right = (xm[None, :] ** np.arange(jmax + 1)[:, None]) * g_vals
    return left @ right.T


@dataclass(frozen=True)
class PlaneMeasure:
    """Density exp(-ax^2/2 - by^2/2 + cxy) on R^2 (or windowed domains)."""

    a: float = 1.0
    b: float = 1.0
    c: float = 0.5
    domain_x: tuple[Interval, ...] = FULL_LINE
    domain_y: tuple[Interval, ...] = FULL_LINE
    nodes: int = 220

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0 or self.c * self.c >= self.a * self.b:
            raise DivergentIntegral(
                "plane density needs a, b > 0 and c^2 < a b")

    def moment_table(self, wf, alpha, beta, s_a, t_b, imax, jmax) -> np.ndarray:
        f_exp = _combine_exponents(wf.psi[alpha].exponent_coeffs(),
                                   -s_a.poly_coeffs())
        g_exp = _combine_exponents(wf.phi[beta].exponent_coeffs(),
                                   t_b.poly_coeffs())
        # decay left after integrating out the other variable
        marg_x = -0.5 * (self.a - self.c ** 2 / self.b)
        marg_y = -0.5 * (self.b - self.c ** 2 / self.a)
        for exp_, marg, dom in ((f_exp, marg_x, self.domain_x),
                                (g_exp, marg_y, self.domain_y)):
            for lo, hi in dom:
                _check_integrable(
                    _combine_exponents(np.array([0, 0, marg]), exp_), lo, hi)
        inflation = 1.0 / np.sqrt(1.0 - self.c ** 2 / (self.a * self.b))
        return _lattice_table(
            site_quads=[-0.5 * self.a, -0.5 * self.b],
            site_lins=[0.0, 0.0],
            domains=[self.domain_x, self.domain_y],
            couplings=[self.c],
            f_exp=f_exp, g_exp=g_exp, imax=imax, jmax=jmax,
            nodes=self.nodes, sigma_inflation=inflation)

    def transposed(self) -> "PlaneMeasure":
        return PlaneMeasure(self.b, self.a, self.c,
                            self.domain_y, self.domain_x, self.nodes)


@dataclass(frozen=True)
class ChainMeasure:
    """m coupled Gaussian sites; f attaches to site 1, g to site m.

    The pairing is int f(x_1) g(x_m) prod_l exp(-x_l^2/2) 1_{E_l}(x_l)
    * prod_l exp(c_l x_l x_{l+1}) dx.  Only nearest-neighbour bilinear
    couplings are implemented; richer site factors are rejected upstream.
    """

    sites: int
    couplings: tuple[float, ...]
    domains: tuple[tuple[Interval, ...], ...]
    nodes: int = 220

    def __post_init__(self):
        if not (1 <= self.sites <= 3):
            raise DivergentIntegral("chain length must be between 1 and 3")
        if len(self.couplings) != self.sites - 1:
            raise ValueError("need one coupling per adjacent site pair")
        if len(self.domains) != self.sites:
            raise ValueError("need one domain per site")
        prec = np.eye(self.sites)
        for l, c in enumerate(self.couplings):
            prec[l, l + 1] = prec[l + 1, l] = -c
        if self.sites > 1 and np.linalg.eigvalsh(prec)[0] <= 1e-3:
            raise DivergentIntegral("chain precision matrix is not positive")

    def _inflation(self) -> float:
        prec = np.eye(self.sites)
        for l, c in enumerate(self.couplings):
            prec[l, l + 1] = prec[l + 1, l] = -c
        cov = np.linalg.inv(prec)
        return float(np.sqrt(np.max(np.diag(cov))))

    def moment_table(self, wf, alpha, beta, s_a, t_b, imax, jmax) -> np.ndarray:
        f_exp = _combine_exponents(wf.psi[alpha].exponent_coeffs(),
                                   -s_a.poly_coeffs())
        g_exp = _combine_exponents(wf.phi[beta].exponent_coeffs(),
                                   t_b.poly_coeffs())
        prec = np.eye(self.sites)
        for l, c in enumerate(self.couplings):
            prec[l, l + 1] = prec[l + 1, l] = -c
        cov = np.linalg.inv(prec)
        for exp_, site in ((f_exp, 0), (g_exp, self.sites - 1)):
            marg = np.array([0.0, 0.0, -0.5 / cov[site, site]])
            for lo, hi in self.domains[site]:
                _check_integrable(_combine_exponents(marg, exp_), lo, hi)
        return _lattice_table(
            site_quads=[-0.5] * self.sites,
            site_lins=[0.0] * self.sites,
            domains=list(self.domains),
            couplings=list(self.couplings),
            f_exp=f_exp, g_exp=g_exp, imax=imax, jmax=jmax,
            nodes=self.nodes, sigma_inflation=self._inflation())

    def transposed(self) -> "ChainMeasure":
        return ChainMeasure(self.sites, tuple(self.couplings[::-1]),
                            tuple(self.domains[::-1]), self.nodes)


Measure = LineMeasure | CircleMeasure | PlaneMeasure | ChainMeasure
