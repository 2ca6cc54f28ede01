"""Lorentz force and torque on the extended rotating charge."""

from dataclasses import dataclass, field

import numpy as np

from . import so3
from .charge import charge_cloud, moment_of_inertia
from .external import fields_ext


@dataclass
class BodyState:
    q: np.ndarray
    v: np.ndarray
    R: np.ndarray = field(default_factory=lambda: np.eye(3))
    w: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.R = np.asarray(self.R, dtype=float)
        self.w = np.asarray(self.w, dtype=float)

    def copy(self):
        return BodyState(self.q.copy(), self.v.copy(), self.R.copy(), self.w.copy())


def _cross_field(a, b):
    return np.stack([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def force_density_weight(fields, ext, cloud, v, w, t):
    """Integrand [E_tot + u x B_tot] rho at the nodes, u = v + w x d.

    ``fields`` may be None to switch the self-field off.
    """
    E, B = fields_ext(ext, cloud.x, t)
    if fields is not None:
        E = E + fields.E
        B = B + fields.B
    d = cloud.d
    w = np.asarray(w, dtype=float).reshape(3, 1, 1, 1)
    u = _cross_field(w, d) + np.asarray(v, dtype=float).reshape(3, 1, 1, 1)
    return (E + _cross_field(u, B)) * cloud.rho


def force_and_torque(fields, ext, p, grid, b, t=0.0, cloud=None):
    """Grid quadratures of the Lorentz force and torque (about q)."""
    if cloud is None:
        cloud = charge_cloud(p, grid, b.q)
    f = force_density_weight(fields, ext, cloud, b.v, b.w, t)
    F = grid.integrate(f)
    T = grid.integrate(_cross_field(cloud.d, f))
    return F, T


def lorentz_force(fields, ext, p, grid, b, t=0.0):
    return force_and_torque(fields, ext, p, grid, b, t)[0]


def lorentz_torque(fields, ext, p, grid, b, t=0.0):
    return force_and_torque(fields, ext, p, grid, b, t)[1]


def body_rhs(fields, ext, p, grid, b, t=0.0, cloud=None, force_scale=1.0, torque_scale=1.0):
    """(q_dot, v_dot, w_dot, R_dot) with m = 1 and scalar inertia I.

    ``force_scale`` and ``torque_scale`` deliberately corrupt the equations of
    motion; they exist for negative-control runs and default to 1.
    """
    F, T = force_and_torque(fields, ext, p, grid, b, t, cloud)
    inertia = moment_of_inertia(p)
    return b.v.copy(), force_scale * F, torque_scale * T / inertia, so3.hat(b.w) @ b.R
