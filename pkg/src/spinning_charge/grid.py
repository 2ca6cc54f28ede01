"""Periodic cubic grid and its Fourier wavevectors."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Cube [-L/2, L/2)^3 with ``n`` nodes per axis.

    Arrays on the grid are indexed ``[ix, iy, iz]`` (z fastest); vector fields
    carry a leading component axis, shape ``(3, n, n, n)``.
    """

    n: int
    length: float

    def __post_init__(self):
        if self.n < 16 or self.n & (self.n - 1):
            raise ValueError(f"grid.n must be a power of two >= 16, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"grid.length must be positive, got {self.length}")

    @property
    def h(self):
        return self.length / self.n

    @property
    def cell_volume(self):
        return self.h**3

    @property
    def shape(self):
        return (self.n, self.n, self.n)

    @cached_property
    def axis(self):
        return -0.5 * self.length + self.h * np.arange(self.n)

    @cached_property
    def nodes(self):
        """Node coordinates, shape (3, n, n, n)."""
        x = self.axis
        return np.stack(np.meshgrid(x, x, x, indexing="ij"))

    def displacement(self, q):
        """Minimum-image displacement x - q for every node, shape (3, n, n, n)."""
        q = np.asarray(q, dtype=float).reshape(3, 1, 1, 1)
        d = self.nodes - q
        return d - self.length * np.round(d / self.length)

    def _k1d(self, zero_nyquist, half):
        m = self.n // 2 + 1 if half else self.n
        k = 2.0 * np.pi * (np.fft.rfftfreq(self.n, self.h) if half else np.fft.fftfreq(self.n, self.h))
        if zero_nyquist:
            k = k.copy()
            k[self.n // 2] = 0.0
        return k[:m]

    @cached_property
    def k_diff(self):
        """Broadcastable (kx, ky, kz) for rfftn layouts with Nyquist entries zeroed."""
        kx = self._k1d(True, False)[:, None, None]
        ky = self._k1d(True, False)[None, :, None]
        kz = self._k1d(True, True)[None, None, :]
        return kx, ky, kz

    @cached_property
    def k2_full(self):
        """|k|^2 with Nyquist entries kept (exact symbol of the periodic Laplacian)."""
        kx = self._k1d(False, False)[:, None, None]
        ky = self._k1d(False, False)[None, :, None]
        kz = np.abs(self._k1d(False, True))[None, None, :]
        return kx**2 + ky**2 + kz**2

    @cached_property
    def k2_diff(self):
        kx, ky, kz = self.k_diff
        return kx**2 + ky**2 + kz**2

    def integrate(self, f):
        """Node sum times cell volume over the last three axes."""
        return np.sum(f, axis=(-3, -2, -1)) * self.cell_volume

    def l2_norm(self, f):
        return float(np.sqrt(np.sum(np.asarray(f) ** 2) * self.cell_volume))
