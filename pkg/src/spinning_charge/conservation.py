"""Energy, momentum and angular momentum of a simulation state, and their drift.

The conserved expressions are

    energy   = 1/2 int(E^2 + B^2) + 1/2 v^2 + 1/2 I w^2 + int A0_ext rho(x - q)
    momentum = v + int E x B + int A_ext rho(x - q)
    angular  = q x v + I w + int x x (E x B) + int x x A_ext rho(x - q)
               + rho_bg int (x - q) x A

The last angular term belongs to the uniform neutralizing background
(density -rho_bg = -1/L^3): the field it sits in carries canonical angular
momentum -rho_bg int x x A, A the Coulomb-gauge potential of B.  Without it
a spinning charge trades angular momentum with the background through its
induction field at a rate independent of dt.

Energy needs static external potentials, momentum component j needs A_ext
independent of x_j and angular momentum component k needs axial symmetry
about x_k.  The A_ext terms are gauge dependent; they are evaluated in the
preset's own gauge.
"""

from dataclasses import dataclass

import numpy as np

from .body import _cross_field
from .charge import charge_cloud, moment_of_inertia
from .external import potentials_ext
from .fields import gauss_residual, inverse_curl

CHARGES = ("energy", "momentum", "angular_momentum")


@dataclass
class DiagnosticsRow:
    t: float
    energy: float
    momentum: np.ndarray
    angular_momentum: np.ndarray
    gauss_residual: float
    q: np.ndarray
    v: np.ndarray
    w: np.ndarray

    CSV_HEADER = ("t", "energy", "px", "py", "pz", "mx", "my", "mz", "gauss_residual",
                  "qx", "qy", "qz", "vx", "vy", "vz", "wx", "wy", "wz")

    def as_tuple(self):
        return (self.t, self.energy, *self.momentum, *self.angular_momentum,
                self.gauss_residual, *self.q, *self.v, *self.w)


def _field_coords(grid, origin):
    """Node coordinates on the periodic branch centred at ``origin``."""
    origin = np.zeros(3) if origin is None else np.asarray(origin, dtype=float)
    return origin.reshape(3, 1, 1, 1) + grid.displacement(origin)


def energy(state, ext, p, grid, cloud=None):
    b = state.body
    cloud = cloud or charge_cloud(p, grid, b.q)
    out = 0.5 * float(b.v @ b.v) + 0.5 * moment_of_inertia(p) * float(b.w @ b.w)
    if state.fields is not None:
        E, B = state.fields.E, state.fields.B
        out += 0.5 * float(np.sum(E * E + B * B)) * grid.cell_volume
    A0, _ = potentials_ext(ext, cloud.x)
    out += float(grid.integrate(A0 * cloud.rho))
    return out


def momentum(state, ext, p, grid, cloud=None):
    b = state.body
    cloud = cloud or charge_cloud(p, grid, b.q)
    out = b.v.copy()
    if state.fields is not None:
        out += grid.integrate(_cross_field(state.fields.E, state.fields.B))
    _, A = potentials_ext(ext, cloud.x)
    return out + grid.integrate(A * cloud.rho)


def angular_momentum(state, ext, p, grid, origin=None, cloud=None):
    """Angular momentum about the coordinate origin.

    The field term uses node coordinates on the periodic branch centred at
    ``origin`` (the body's starting point), so the seam sits opposite the body.
    """
    b = state.body
    cloud = cloud or charge_cloud(p, grid, b.q)
    out = np.cross(b.q, b.v) + moment_of_inertia(p) * b.w
    if state.fields is not None:
        x = _field_coords(grid, origin)
        out = out + grid.integrate(_cross_field(x, _cross_field(state.fields.E, state.fields.B)))
        out = out + background_angular_momentum(state, grid)
    _, A = potentials_ext(ext, cloud.x)
    return out + grid.integrate(_cross_field(cloud.x, A) * cloud.rho)


def background_angular_momentum(state, grid):
    """rho_bg int (x - q) x A with A = curl^-1 B; zero if the self-field is off."""
    if state.fields is None:
        return np.zeros(3)
    A = inverse_curl(state.fields.B, grid)
    d = grid.displacement(state.body.q)
    return grid.integrate(_cross_field(d, A)) / grid.length**3


def diagnostics_row(state, ext, p, grid, origin=None, cloud=None):
    b = state.body
    cloud = cloud or charge_cloud(p, grid, b.q)
    if state.fields is not None:
        gr = gauss_residual(state.fields, cloud.rho, grid)
    else:
        gr = 0.0
    return DiagnosticsRow(
        t=float(state.t),
        energy=energy(state, ext, p, grid, cloud),
        momentum=momentum(state, ext, p, grid, cloud),
        angular_momentum=angular_momentum(state, ext, p, grid, origin, cloud),
        gauss_residual=gr,
        q=b.q.copy(), v=b.v.copy(), w=b.w.copy(),
    )


def default_flags(ext):
    """Which charges the external preset's symmetries say are conserved."""
    return {
        "energy": bool(ext.is_static),
        "momentum": sorted(ext.translation_axes()),
        "angular_momentum": sorted(ext.axial_axes()),
    }


def _drift(series):
    series = np.asarray(series, dtype=float)
    scale = max(abs(series[0]), 1.0)
    return float(np.max(np.abs(series - series[0])) / scale)


def drift_report(rows, which=None):
    """Relative drift max|Q(t) - Q(0)| / max(|Q(0)|, 1) of every charge component.

    Returns a list of dicts with keys ``charge``, ``component`` (None for
    energy, axis index otherwise), ``drift`` and ``conserved`` (whether the
    symmetry flags in ``which`` claim the component is conserved).  With
    ``which=None`` nothing is claimed.
    """
    if not rows:
        raise ValueError("drift_report needs at least one sample")
    which = which or {"energy": False, "momentum": [], "angular_momentum": []}
    out = [{"charge": "energy", "component": None,
            "drift": _drift([r.energy for r in rows]),
            "conserved": bool(which.get("energy"))}]
    for name in ("momentum", "angular_momentum"):
        vals = np.array([getattr(r, name) for r in rows])
        for j in range(3):
            out.append({"charge": name, "component": j, "drift": _drift(vals[:, j]),
                        "conserved": j in which.get(name, [])})
    return out


def convergence_order(steps, errors):
    """Least-squares slope of log(error) against log(step)."""
    steps = np.log(np.asarray(steps, dtype=float))
    errors = np.log(np.asarray(errors, dtype=float))
    return float(np.polyfit(steps, errors, 1)[0])
