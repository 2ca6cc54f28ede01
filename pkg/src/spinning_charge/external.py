"""Analytic external potentials (A0_ext, A_ext) and the fields they generate.

All presets are static.  Each preset knows which of the symmetry hypotheses
behind the conservation laws it satisfies:

* ``zero``                 everything
* ``uniform_b``            B = b e_axis in the symmetric gauge A = (B x x) / 2
* ``axial``                Penning-type trap about ``axis``: uniform B plus the
                           quadrupole A0 = kappa/2 (r_perp^2 - 2 z^2)
* ``translation_invariant`` Landau gauge, varies only along axis+1:
                           A = b x_{a+1} e_{a+2}, A0 = kappa/2 x_{a+1}^2, B = b e_a
* ``custom_static``        uniform E0 and B0, A0 = -E0.x, A = (B0 x x) / 2;
                           params = (E0x, E0y, E0z, B0x, B0y, B0z)

Points are passed with the coordinate axis first, shape (3, ...).
"""

from dataclasses import dataclass

import numpy as np

KINDS = ("zero", "uniform_b", "axial", "translation_invariant", "custom_static")


@dataclass(frozen=True)
class ExternalField:
    kind: str = "zero"
    b: float = 0.0
    axis: int = 2
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"external.kind must be one of {KINDS}, got {self.kind!r}")
        if self.axis not in (0, 1, 2):
            raise ValueError(f"external.axis must be 0, 1 or 2, got {self.axis}")
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        if self.kind == "custom_static" and len(self.params) != 6:
            raise ValueError("custom_static needs params = (E0x, E0y, E0z, B0x, B0y, B0z)")

    @property
    def kappa(self):
        return self.params[0] if self.params else 0.0

    def _uniform(self):
        """(E0, B0) of the uniform part."""
        E0 = np.zeros(3)
        B0 = np.zeros(3)
        if self.kind in ("uniform_b", "axial", "translation_invariant"):
            B0[self.axis] = self.b
        elif self.kind == "custom_static":
            E0 = np.array(self.params[:3])
            B0 = np.array(self.params[3:])
        return E0, B0

    @property
    def is_static(self):
        return True

    def translation_axes(self):
        """Coordinates x_j the potentials do not depend on."""
        a = self.axis
        if self.kind == "zero":
            return {0, 1, 2}
        if self.kind == "uniform_b":
            return {a} if self.b else {0, 1, 2}
        if self.kind == "axial":
            if self.kappa:
                return set()
            return {a} if self.b else {0, 1, 2}
        if self.kind == "translation_invariant":
            if self.b == 0 and self.kappa == 0:
                return {0, 1, 2}
            return {a, (a + 2) % 3}
        E0, B0 = self._uniform()
        # A0 = -E0.x is free of x_j iff E0_j = 0; B0 x x is free of x_j iff B0 || e_j
        out = set()
        for j in range(3):
            e = np.eye(3)[j]
            if E0[j] == 0 and not np.any(np.cross(B0, e)):
                out.add(j)
        return out

    def axial_axes(self):
        """Axes k about which A_ext(U x) = U A_ext(x) for all rotations U."""
        a = self.axis
        if self.kind == "zero":
            return {0, 1, 2}
        if self.kind in ("uniform_b", "axial"):
            return {a} if (self.b or self.kappa) else {0, 1, 2}
        if self.kind == "translation_invariant":
            return set() if (self.b or self.kappa) else {0, 1, 2}
        E0, B0 = self._uniform()
        out = set()
        for k in range(3):
            e = np.eye(3)[k]
            if not np.any(np.cross(E0, e)) and not np.any(np.cross(B0, e)):
                out.add(k)
        return out


def _cross(a, x):
    """cross(a, x) for a constant 3-vector ``a`` and points ``x`` of shape (3, ...)."""
    return np.stack([a[1] * x[2] - a[2] * x[1],
                     a[2] * x[0] - a[0] * x[2],
                     a[0] * x[1] - a[1] * x[0]])


def potentials_ext(e, x, t=0.0):
    """(A0, A) at points ``x``; A0 has shape x.shape[1:], A has shape x.shape."""
    x = np.asarray(x, dtype=float)
    A0 = np.zeros(x.shape[1:])
    A = np.zeros_like(x)
    if e.kind == "zero":
        return A0, A
    a = e.axis
    E0, B0 = e._uniform()
    if e.kind == "translation_invariant":
        s = x[(a + 1) % 3]
        A[(a + 2) % 3] = e.b * s
        A0 = 0.5 * e.kappa * s * s
        return A0, A
    A = 0.5 * _cross(B0, x)
    if e.kind == "axial":
        z = x[a]
        r2 = np.sum(x * x, axis=0) - z * z
        A0 = 0.5 * e.kappa * (r2 - 2.0 * z * z)
    elif e.kind == "custom_static":
        A0 = -np.tensordot(E0, x, axes=1)
    return A0, A


def fields_ext(e, x, t=0.0):
    """(E_ext, B_ext) at points ``x``, from analytic derivatives of the presets."""
    x = np.asarray(x, dtype=float)
    E = np.zeros_like(x)
    B = np.zeros_like(x)
    if e.kind == "zero":
        return E, B
    a = e.axis
    E0, B0 = e._uniform()
    B += B0.reshape((3,) + (1,) * (x.ndim - 1))
    if e.kind == "translation_invariant":
        E[(a + 1) % 3] = -e.kappa * x[(a + 1) % 3]
    elif e.kind == "axial":
        E = -e.kappa * x
        E[a] = 2.0 * e.kappa * x[a]
    elif e.kind == "custom_static":
        E += E0.reshape((3,) + (1,) * (x.ndim - 1))
    return E, B
