"""Rotation-group toolkit: hat/vee maps, Rodrigues exponential, frame constants.

Vectors are length-3 arrays, matrices 3x3 arrays.  Rotations are stored as
plain orthogonal matrices with unit determinant.
"""

import numpy as np

from .errors import NonSkewInput

SKEW_TOL = 1e-10


def hat(w):
    """Skew matrix J w with hat(a) @ b == cross(a, b)."""
    w1, w2, w3 = np.asarray(w, dtype=float)
    return np.array([[0.0, -w3, w2],
                     [w3, 0.0, -w1],
                     [-w2, w1, 0.0]])


def vee(W, tol=SKEW_TOL):
    """Inverse of :func:`hat`.

    The symmetric part of ``W`` is checked against ``tol`` (absolute, scaled by
    ``max(1, |W|)``) and then discarded.
    """
    W = np.asarray(W, dtype=float)
    sym = 0.5 * (W + W.T)
    scale = max(1.0, float(np.max(np.abs(W))))
    if np.max(np.abs(sym)) > tol * scale:
        raise NonSkewInput(f"symmetric part {np.max(np.abs(sym)):.3e} exceeds {tol:.1e}")
    # (x - (-x)) / 2 == x exactly in floating point, so vee(hat(w)) == w bit for bit
    return np.array([W[2, 1] - W[1, 2], W[0, 2] - W[2, 0], W[1, 0] - W[0, 1]]) / 2.0


def exp_map(w, dt=1.0):
    """Rodrigues exponential exp(dt * hat(w))."""
    v = dt * np.asarray(w, dtype=float)
    theta = float(np.linalg.norm(v))
    K = hat(v)
    if theta < 1e-8:
        # series to second order; next term is O(theta^3)
        return np.eye(3) + K + 0.5 * K @ K
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + a * K + b * (K @ K)


def left_jacobian(x):
    """Matrix J with d/dt[exp(hat x)] exp(-hat x) = hat(J @ xdot)."""
    x = np.asarray(x, dtype=float)
    theta = float(np.linalg.norm(x))
    K = hat(x)
    if theta < 1e-5:
        return np.eye(3) + 0.5 * K + (K @ K) / 6.0
    a = (1.0 - np.cos(theta)) / theta**2
    b = (theta - np.sin(theta)) / theta**3
    return np.eye(3) + a * K + b * (K @ K)


def matrix_commutator(A, B):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    return A @ B - B @ A


def structure_constants():
    """Constants c[k, i, j] of the right-invariant frame, [v_i, v_j] = sum_k c^k_ij v_k.

    Indices are zero-based: ``c[k, i, j]`` holds c^{k+1}_{i+1, j+1}.  The
    right-invariant fields satisfy [v1, v2] = -v3 (cyclic), i.e. the opposite
    sign of the matrix commutator [hat e1, hat e2] = hat e3, so
    c^k_ij = -epsilon_ijk.

    The Poincare equations contract this table as sum_ij c^j_ik w_i p_j, which
    with these constants equals cross(w, p)_k.
    """
    c = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[k, i, j] = -1.0
        c[k, j, i] = 1.0
    return c


def poincare_contraction(c, w, p):
    """Vector with components sum_ij c[j, i, k] w_i p_j."""
    return np.einsum("jik,i,j->k", c, w, p)


def angular_velocity_from_frame(R_dot, R):
    """Space angular velocity vee(R_dot R^T)."""
    return vee(np.asarray(R_dot) @ np.asarray(R).T)


def reorthonormalize(R):
    """Nearest rotation matrix (polar factor) to ``R``."""
    U, _, Vt = np.linalg.svd(R)
    Q = U @ Vt
    if np.linalg.det(Q) < 0:
        U[:, -1] *= -1
        Q = U @ Vt
    return Q


def rotation_defect(R):
    """(max |R^T R - I|, |det R - 1|)."""
    R = np.asarray(R)
    return float(np.max(np.abs(R.T @ R - np.eye(3)))), abs(float(np.linalg.det(R)) - 1.0)
