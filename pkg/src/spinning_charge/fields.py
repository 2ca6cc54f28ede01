"""Spectral Maxwell solver on the periodic cube.

Derivatives are exact on Fourier modes; the Nyquist wavenumber is zeroed in
every first derivative so that real fields stay real and the discrete curl is
a symmetric operator.  The box cannot carry net charge: Gauss's law is imposed
against rho minus its mean (uniform neutralizing background).
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from .charge import charge_cloud, sample_on_grid
from .errors import NonZeroMean

AXES = (-3, -2, -1)
MEAN_TOL = 1e-10
SNAPSHOT_MAGIC = b"ABRFLD01"
COMPONENTS = ("Ex", "Ey", "Ez", "Bx", "By", "Bz")


@dataclass
class FieldState:
    E: np.ndarray
    B: np.ndarray

    @classmethod
    def zeros(cls, grid):
        return cls(np.zeros((3,) + grid.shape), np.zeros((3,) + grid.shape))

    def copy(self):
        return FieldState(self.E.copy(), self.B.copy())


def _fwd(f):
    return sfft.rfftn(f, axes=AXES)


def _inv(F, grid):
    return sfft.irfftn(F, s=grid.shape, axes=AXES)


def curl(f, grid):
    kx, ky, kz = grid.k_diff
    F = _fwd(f)
    out = np.stack([1j * (ky * F[2] - kz * F[1]),
                    1j * (kz * F[0] - kx * F[2]),
                    1j * (kx * F[1] - ky * F[0])])
    return _inv(out, grid)


def divergence(f, grid):
    kx, ky, kz = grid.k_diff
    F = _fwd(f)
    return _inv(1j * (kx * F[0] + ky * F[1] + kz * F[2]), grid)


def gradient(s, grid):
    kx, ky, kz = grid.k_diff
    S = _fwd(s)
    return _inv(np.stack([1j * kx * S, 1j * ky * S, 1j * kz * S]), grid)


def laplacian(s, grid):
    return _inv(-grid.k2_full * _fwd(s), grid)


def poisson_solve(rhs, grid):
    """Zero-mean phi with -Laplacian(phi) = rhs."""
    rhs = np.asarray(rhs, dtype=float)
    mean = float(np.mean(rhs))
    if abs(mean) > MEAN_TOL * max(1.0, float(np.max(np.abs(rhs)))):
        raise NonZeroMean(f"right-hand side has mean {mean:.3e}; subtract the background first")
    R = _fwd(rhs)
    k2 = grid.k2_full.copy()
    k2[0, 0, 0] = 1.0
    R = R / k2
    R[0, 0, 0] = 0.0
    return _inv(R, grid)


def inverse_curl(B, grid):
    """Divergence-free A with curl A = B (k = 0 and Nyquist-only modes set to 0)."""
    kx, ky, kz = grid.k_diff
    F = _fwd(B)
    k2 = grid.k2_diff.copy()
    zero = k2 == 0
    k2[zero] = 1.0
    A = np.stack([1j * (ky * F[2] - kz * F[1]),
                  1j * (kz * F[0] - kx * F[2]),
                  1j * (kx * F[1] - ky * F[0])]) / k2
    A[:, zero] = 0.0
    return _inv(A, grid)


def current_from_cloud(cloud, v, w):
    """j = (v + w x d) rho on the nodes of a :class:`ChargeCloud`."""
    d = cloud.d
    v = np.asarray(v, dtype=float).reshape(3, 1, 1, 1)
    w = np.asarray(w, dtype=float)
    u = np.stack([w[1] * d[2] - w[2] * d[1],
                  w[2] * d[0] - w[0] * d[2],
                  w[0] * d[1] - w[1] * d[0]]) + v
    return u * cloud.rho


def deposit_current(p, grid, q, v, w):
    return current_from_cloud(charge_cloud(p, grid, q), v, w)


def maxwell_rhs(f, j, grid):
    """(dE/dt, dB/dt) = (curl B - j, -curl E)."""
    return curl(f.B, grid) - j, -curl(f.E, grid)


def coulomb_init(p, grid, q):
    """Electrostatic field of the charge at rest at ``q``; B = 0."""
    rho = sample_on_grid(p, grid, q)
    phi = poisson_solve(rho - rho.mean(), grid)
    E = -gradient(phi, grid)
    return FieldState(E, np.zeros_like(E))


def gauss_residual(f, rho_grid, grid):
    """||div E - (rho - <rho>)|| / ||rho|| in the grid L2 norm."""
    rho_grid = np.asarray(rho_grid, dtype=float)
    norm = grid.l2_norm(rho_grid)
    r = divergence(f.E, grid) - (rho_grid - rho_grid.mean())
    if norm == 0.0:
        return grid.l2_norm(r)
    return grid.l2_norm(r) / norm


def max_div_b(f, grid):
    return float(np.max(np.abs(divergence(f.B, grid))))


def field_energy(f, grid):
    return 0.5 * float(grid.integrate(f.E * f.E + f.B * f.B).sum())


def write_field_snapshot(f, grid, prefix, step):
    """One little-endian float64 file per component, 32-byte header first."""
    header = SNAPSHOT_MAGIC + struct.pack("<qd", grid.n, grid.length)
    header += b"\0" * (32 - len(header))
    paths = []
    for name, arr in zip(COMPONENTS, list(f.E) + list(f.B)):
        path = Path(f"{prefix}_{name}_{step}.bin")
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        paths.append(path)
    return paths


def read_field_component(path):
    """Returns (n, L, array) from one snapshot component file."""
    raw = Path(path).read_bytes()
    if raw[:8] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a field snapshot")
    n, L = struct.unpack("<qd", raw[8:24])
    arr = np.frombuffer(raw[32:], dtype="<f8")
    if arr.size != n**3:
        raise ValueError(f"{path}: expected {n**3} values, found {arr.size}")
    return n, L, arr.reshape(n, n, n).astype(float)


def read_field_snapshot(prefix, step):
    comps = [read_field_component(f"{prefix}_{name}_{step}.bin") for name in COMPONENTS]
    n, L = comps[0][0], comps[0][1]
    arrs = [c[2] for c in comps]
    return n, L, FieldState(np.stack(arrs[:3]), np.stack(arrs[3:]))
