"""Radially symmetric coupling function rho and its moments."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import ProfileTooWide, QuadratureNotConverged

KINDS = ("gaussian", "bump")
# bump support radius in units of sigma
BUMP_RADIUS = 5.0
QUAD_RTOL = 1e-10


@dataclass(frozen=True)
class ChargeProfile:
    kind: str = "gaussian"
    sigma: float = 1.0
    total_charge: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"charge.kind must be one of {KINDS}, got {self.kind!r}")
        if not self.sigma > 0:
            raise ValueError(f"charge.sigma must be positive, got {self.sigma}")
        if self.total_charge != 1.0:
            raise ValueError("units with e = 1: total_charge is fixed to 1")

    @property
    def support_radius(self):
        return BUMP_RADIUS * self.sigma if self.kind == "bump" else np.inf

    def radial(self, r):
        """rho_r(r) for an array of radii."""
        r = np.asarray(r, dtype=float)
        if self.kind == "gaussian":
            s2 = self.sigma**2
            return (2.0 * np.pi * s2) ** -1.5 * np.exp(-0.5 * r * r / s2)
        a = self.support_radius
        s2 = (r / a) ** 2
        out = np.zeros_like(r)
        inside = s2 < 1.0
        out[inside] = _bump_norm(self.sigma) * np.exp(-1.0 / (1.0 - s2[inside]))
        return out

    def radial_log_slope(self, r):
        """rho_r'(r) / (r rho_r(r)), so that grad rho(d) = rho * slope * d."""
        r = np.asarray(r, dtype=float)
        if self.kind == "gaussian":
            return np.full_like(r, -1.0 / self.sigma**2)
        a = self.support_radius
        s2 = (r / a) ** 2
        out = np.zeros_like(r)
        inside = s2 < 1.0
        out[inside] = -2.0 / (a * a * (1.0 - s2[inside]) ** 2)
        return out


@lru_cache(maxsize=None)
def _bump_norm(sigma):
    a = BUMP_RADIUS * sigma
    val, err = integrate.quad(lambda r: 4.0 * np.pi * r * r * np.exp(-1.0 / (1.0 - (r / a) ** 2)),
                              0.0, a, epsabs=0.0, epsrel=1e-13, limit=200)
    return 1.0 / val


def density(p, x):
    """rho(x) for points ``x`` with the coordinate axis first, shape (3, ...)."""
    x = np.asarray(x, dtype=float)
    return p.radial(np.sqrt(np.sum(x * x, axis=0)))


def density_gradient(p, x):
    """Analytic grad rho(x), same layout as ``x``."""
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=0))
    return x * (p.radial(r) * p.radial_log_slope(r))


@lru_cache(maxsize=None)
def _radial_moment(p, power):
    # 4 pi int_0^inf r^(2+power) rho_r(r) dr
    f = lambda r: 4.0 * np.pi * r ** (2 + power) * float(p.radial(np.array(r)))
    upper = p.support_radius if p.kind == "bump" else 40.0 * p.sigma
    val, err = integrate.quad(f, 0.0, upper, epsabs=0.0, epsrel=1e-13, limit=400)
    if not np.isfinite(val) or err > QUAD_RTOL * abs(val):
        raise QuadratureNotConverged(f"radial moment r^{power}: estimate {val}, error {err}")
    return val


def moment_of_inertia(p):
    """I = (2/3) int |x|^2 rho(x) dx by adaptive radial quadrature."""
    return 2.0 / 3.0 * _radial_moment(p, 2)


def check_fits(p, grid):
    if 10.0 * p.sigma > grid.length:
        raise ProfileTooWide(f"10*sigma = {10 * p.sigma} exceeds box length {grid.length}")


def sample_on_grid(p, grid, q):
    """Node samples of rho(x - q) with minimum-image displacement."""
    check_fits(p, grid)
    return density(p, grid.displacement(q))


@dataclass
class ChargeCloud:
    """rho(x - q) sampled on the grid together with the displacements used.

    ``x`` holds unwrapped node coordinates ``q + d`` so that non-periodic
    quantities (external potentials, lever arms) are continuous around q.
    """

    q: np.ndarray
    d: np.ndarray
    rho: np.ndarray

    @property
    def x(self):
        return self.q.reshape(3, 1, 1, 1) + self.d


def charge_cloud(p, grid, q):
    check_fits(p, grid)
    q = np.asarray(q, dtype=float)
    d = grid.displacement(q)
    return ChargeCloud(q=q, d=d, rho=density(p, d))
