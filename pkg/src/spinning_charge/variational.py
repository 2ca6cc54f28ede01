"""Lagrangian, action and the stationarity / Poincare checks on trajectories.

Potentials are rebuilt from (E, B) in Coulomb gauge.  The Lagrangian is

    L = 1/2 int(E^2 - B^2) + 1/2 v^2 + 1/2 I w^2
        - int (A0 + A0_ext) rho(x - q) + int (v + w x (x - q)) . (A + A_ext) rho(x - q)

Variations are endpoint-vanishing: a fixed spatial pattern times the envelope
phi(t) = sin^2(pi (t - t1) / T).  Rotation variations act in the right frame,
R_eps = exp(eps phi hat(eta)) R, so the angular velocity in space becomes
w_eps = exp(eps phi hat(eta)) w + J_l(eps phi eta) eps phi' eta.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from . import so3
from .body import _cross_field, force_and_torque
from .charge import charge_cloud, density_gradient, moment_of_inertia, sample_on_grid
from .errors import NonSolenoidalB
from .external import potentials_ext
from .fields import (current_from_cloud, curl, divergence, gradient, inverse_curl,
                     max_div_b, poisson_solve)

DIV_B_TOL = 1e-8
CLASSES = ("fields", "translation", "rotation")


@dataclass
class PotentialState:
    A0: np.ndarray
    A: np.ndarray
    A_dot: np.ndarray
    # div(A_dot) = mean-removed Gauss residual, reported rather than enforced
    gauss_defect: float = 0.0


def reconstruct_potentials(f, rho_grid, grid):
    """Coulomb-gauge (A0, A, A_dot) with curl A = B and -grad A0 - A_dot = E."""
    div_b = max_div_b(f, grid)
    if div_b > DIV_B_TOL:
        raise NonSolenoidalB(f"max |div B| = {div_b:.3e} exceeds {DIV_B_TOL}")
    rho_grid = np.asarray(rho_grid, dtype=float)
    A0 = poisson_solve(rho_grid - rho_grid.mean(), grid)
    A = inverse_curl(f.B, grid)
    A_dot = -f.E - gradient(A0, grid)
    defect = grid.l2_norm(divergence(A_dot, grid))
    return PotentialState(A0, A, A_dot, defect)


def trajectory_potentials(traj):
    cfg = traj.config
    return [reconstruct_potentials(s.fields, sample_on_grid(cfg.charge, cfg.grid, s.body.q), cfg.grid)
            for s in traj.samples]


def lagrangian(ps, b, ext, p, grid, t=0.0, cloud=None):
    cloud = cloud or charge_cloud(p, grid, b.q)
    E = -gradient(ps.A0, grid) - ps.A_dot
    B = curl(ps.A, grid)
    out = 0.5 * float(np.sum(E * E - B * B)) * grid.cell_volume
    out += 0.5 * float(b.v @ b.v) + 0.5 * moment_of_inertia(p) * float(b.w @ b.w)
    A0_ext, A_ext = potentials_ext(ext, cloud.x, t)
    j = current_from_cloud(cloud, b.v, b.w)
    out -= float(grid.integrate((ps.A0 + A0_ext) * cloud.rho))
    out += float(grid.integrate(np.sum(j * (ps.A + A_ext), axis=0)))
    return out


@dataclass
class Perturbation:
    """Endpoint-vanishing variation of one class.

    ``shape`` is a divergence-free vector field (fields), a direction (translation)
    or a right-frame rotation axis eta (rotation).
    """

    kind: str
    shape: np.ndarray
    t1: float
    t2: float

    def __post_init__(self):
        if self.kind not in CLASSES:
            raise ValueError(f"perturbation class must be one of {CLASSES}, got {self.kind!r}")
        if not self.t2 > self.t1:
            raise ValueError("perturbation window must have t2 > t1")

    def envelope(self, t):
        """(phi, phi_dot) at time t; both vanish at t1 and t2."""
        span = self.t2 - self.t1
        s = (t - self.t1) / span
        if s <= 0.0 or s >= 1.0:
            return 0.0, 0.0
        return np.sin(np.pi * s) ** 2, np.pi / span * np.sin(2.0 * np.pi * s)

    def apply(self, ps, b, t, eps):
        """Perturbed (PotentialState, BodyState) at time t."""
        phi, dphi = self.envelope(t)
        if eps == 0.0 or (phi == 0.0 and dphi == 0.0):
            return ps, b
        if self.kind == "fields":
            return PotentialState(ps.A0, ps.A + eps * phi * self.shape,
                                  ps.A_dot + eps * dphi * self.shape), b
        b = b.copy()
        if self.kind == "translation":
            b.q = b.q + eps * phi * self.shape
            b.v = b.v + eps * dphi * self.shape
        else:
            xi = eps * phi * self.shape
            U = so3.exp_map(xi)
            b.R = U @ b.R
            b.w = U @ b.w + so3.left_jacobian(xi) @ (eps * dphi * self.shape)
        return ps, b


def random_perturbation(kind, grid, t1, t2, seed=0, kmax=2):
    """Smooth random variation: low-k divergence-free field, or a random unit vector."""
    rng = np.random.default_rng(seed)
    if kind != "fields":
        d = rng.normal(size=3)
        return Perturbation(kind, d / np.linalg.norm(d), t1, t2)
    # curl of a random band-limited field is divergence-free and mean-free
    x = grid.nodes
    k0 = 2.0 * np.pi / grid.length
    psi = np.zeros((3,) + grid.shape)
    for _ in range(6):
        m = rng.integers(-kmax, kmax + 1, size=3)
        phase = rng.uniform(0, 2 * np.pi)
        amp = rng.normal(size=(3, 1, 1, 1))
        psi += amp * np.cos(k0 * np.tensordot(m, x, axes=1) + phase)
    a = curl(psi, grid)
    a /= np.sqrt(float(np.max(np.sum(a * a, axis=0))))
    return Perturbation("fields", a, t1, t2)


def action(traj, potentials=None, pert=None, eps=0.0):
    """Trapezoid quadrature of the Lagrangian over the sampled window."""
    cfg = traj.config
    if potentials is None:
        potentials = trajectory_potentials(traj)
    if len(traj.samples) < 2:
        return 0.0
    vals = []
    for s, ps in zip(traj.samples, potentials):
        b = s.body
        if pert is not None:
            ps, b = pert.apply(ps, b, s.t, eps)
        vals.append(lagrangian(ps, b, cfg.external, cfg.charge, cfg.grid, s.t))
    return float(trapezoid(vals, traj.times))


def first_variation(traj, pert, eps, potentials=None):
    """[S(+eps) - S(-eps)] / (2 eps)."""
    if potentials is None:
        potentials = trajectory_potentials(traj)
    plus = action(traj, potentials, pert, eps)
    minus = action(traj, potentials, pert, -eps)
    return (plus - minus) / (2.0 * eps)


def action_increment(traj, pert, eps, potentials=None):
    """S(+eps) - S(0): the one-sided change, quadratic in eps on solutions."""
    if potentials is None:
        potentials = trajectory_potentials(traj)
    return action(traj, potentials, pert, eps) - action(traj, potentials)


def poincare_momentum(ps, b, ext, p, grid, t=0.0, cloud=None, include_self=True):
    """dL/dw = I w + int (x - q) x (A + A_ext) rho(x - q)."""
    cloud = cloud or charge_cloud(p, grid, b.q)
    _, A = potentials_ext(ext, cloud.x, t)
    if include_self and ps is not None:
        A = A + ps.A
    return moment_of_inertia(p) * b.w + grid.integrate(_cross_field(cloud.d, A) * cloud.rho)


def _potential_momentum_rate(ps, b, ext, p, grid, t, cloud):
    """Exact d/dt of int d x (A + A_ext) rho(d), d = x - q, along (q_dot = v, A_dot)."""
    _, A_ext = potentials_ext(ext, cloud.x, t)
    A = A_ext if ps is None else A_ext + ps.A
    v = b.v.reshape(3, 1, 1, 1)
    grad_rho = density_gradient(p, cloud.d)
    rho_dot = -np.sum(v * grad_rho, axis=0)
    integrand = _cross_field(cloud.d, A) * rho_dot - _cross_field(np.broadcast_to(v, A.shape), A) * cloud.rho
    if ps is not None:
        integrand = integrand + _cross_field(cloud.d, ps.A_dot) * cloud.rho
    return grid.integrate(integrand)


def _central(values, dt, order=2):
    """Centred derivative at interior samples; returns (slice, derivative)."""
    values = np.asarray(values, dtype=float)
    if order == 2:
        return slice(1, -1), (values[2:] - values[:-2]) / (2.0 * dt)
    if order == 4:
        d = (-values[4:] + 8.0 * values[3:-1] - 8.0 * values[1:-3] + values[:-4]) / (12.0 * dt)
        return slice(2, -2), d
    if order == 6:
        d = (values[6:] - 9.0 * values[5:-1] + 45.0 * values[4:-2]
             - 45.0 * values[2:-4] + 9.0 * values[1:-5] - values[:-6]) / (60.0 * dt)
        return slice(3, -3), d
    raise ValueError(f"stencil order must be 2, 4 or 6, got {order}")


def poincare_residual(traj, k=None, potentials=None, method="central", constants=None,
                      include_self=None):
    """Residual d/dt P_k - sum_ij c^j_ik w_i P_j at interior samples.

    Returns (times, residual) with residual shaped (n, 3), or (n,) when ``k``
    is given.  ``method="central"`` differentiates P by centred differences in
    the sampling interval.  ``method="analytic"`` differentiates only I w that
    way and uses the exact chain rule for the potential part; it isolates the
    algebraic identity residual = I w_dot - torque from time-stepping error.
    """
    cfg = traj.config
    grid, p, ext = cfg.grid, cfg.charge, cfg.external
    c = so3.structure_constants() if constants is None else np.asarray(constants)
    if include_self is None:
        include_self = cfg.self_field
    if include_self and potentials is None:
        potentials = trajectory_potentials(traj)
    inertia = moment_of_inertia(p)
    P, P_rate, W = [], [], []
    for i, s in enumerate(traj.samples):
        ps = potentials[i] if include_self else None
        cloud = charge_cloud(p, grid, s.body.q)
        P.append(poincare_momentum(ps, s.body, ext, p, grid, s.t, cloud, include_self))
        if method == "analytic":
            P_rate.append(_potential_momentum_rate(ps, s.body, ext, p, grid, s.t, cloud))
        W.append(s.body.w)
    P, W = np.array(P), np.array(W)
    dt = traj.sample_dt
    if method == "central":
        sl, dP = _central(P, dt)
    elif method == "analytic":
        sl, dw = _central(W, dt)
        dP = inertia * dw + np.array(P_rate)[sl]
    else:
        raise ValueError(f"method must be 'central' or 'analytic', got {method!r}")
    contraction = np.array([so3.poincare_contraction(c, w, pj) for w, pj in zip(W[sl], P[sl])])
    res = dP - contraction
    times = traj.times[sl]
    return (times, res) if k is None else (times, res[:, k])


def torque_balance(traj, order=2):
    """(times, I w_dot - torque) with w_dot from the same centred stencil."""
    cfg = traj.config
    fields_on = cfg.self_field
    W = np.array([s.body.w for s in traj.samples])
    sl, dw = _central(W, traj.sample_dt, order)
    T = np.array([force_and_torque(s.fields if fields_on else None, cfg.external, cfg.charge,
                                   cfg.grid, s.body, s.t)[1] for s in traj.samples[sl]])
    return traj.times[sl], moment_of_inertia(cfg.charge) * dw - T


@dataclass
class ELResiduals:
    times: np.ndarray
    gauss: np.ndarray
    ampere: np.ndarray
    force: np.ndarray

    @property
    def max_gauss(self):
        return float(np.max(self.gauss))

    @property
    def max_ampere(self):
        return float(np.max(self.ampere))

    @property
    def max_force(self):
        return float(np.max(np.linalg.norm(self.force, axis=1)))


def euler_lagrange_residuals(traj, order=4, current_scale=1.0):
    """Field and particle Euler-Lagrange residuals at interior samples.

    gauss  = ||div E - (rho - <rho>)|| / ||rho||
    ampere = ||E_dot - curl B + j'|| / ||j'||, j' the mean-removed current
    force  = v_dot - F (a vector per sample)

    Time derivatives use the centred stencil of the given ``order``.
    ``current_scale`` multiplies j in the replay (negative control).
    """
    cfg = traj.config
    grid = cfg.grid
    fields_on = cfg.self_field
    samples = traj.samples
    dt = traj.sample_dt
    idx = np.arange(len(samples))
    sl, _ = _central(idx.astype(float), dt, order)
    inner = idx[sl]
    half = (order // 2)
    weights = {2: [-0.5, 0.0, 0.5], 4: [1 / 12, -8 / 12, 0.0, 8 / 12, -1 / 12],
               6: [-1 / 60, 9 / 60, -45 / 60, 0.0, 45 / 60, -9 / 60, 1 / 60]}[order]
    gauss, ampere = [], []
    for i in inner:
        s = samples[i]
        cloud = charge_cloud(cfg.charge, grid, s.body.q)
        rho = cloud.rho
        norm_rho = grid.l2_norm(rho)
        gauss.append(grid.l2_norm(divergence(s.fields.E, grid) - (rho - rho.mean())) / norm_rho)
        E_dot = sum(wt * samples[i + o].fields.E for wt, o in zip(weights, range(-half, half + 1))
                    if wt != 0.0) / dt
        j = current_scale * current_from_cloud(cloud, s.body.v, s.body.w)
        j -= j.mean(axis=(1, 2, 3), keepdims=True)
        r = E_dot - curl(s.fields.B, grid) + j
        jn = grid.l2_norm(j)
        ampere.append(grid.l2_norm(r) / jn if jn > 0 else grid.l2_norm(r))
    V = np.array([s.body.v for s in samples])
    _, dv = _central(V, dt, order)
    F = np.array([force_and_torque(samples[i].fields if fields_on else None, cfg.external,
                                   cfg.charge, grid, samples[i].body, samples[i].t)[0]
                  for i in inner])
    return ELResiduals(traj.times[sl], np.array(gauss), np.array(ampere), dv - F)
