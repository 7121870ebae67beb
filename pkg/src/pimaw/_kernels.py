"""Hot numeric kernels: cyclic-Jacobi eigensolver and RK4 trajectory loops.

Single source for both backends; :func:`pimaw._backend.jit` compiles these
with numba unless ``PIMAW_BACKEND=numpy`` is set. Keep the code inside this
module restricted to constructs both backends accept (no closures, no dicts,
float64 arrays only).
"""

import numpy as np

from ._backend import jit


@jit
def jacobi_eigh(A, max_sweeps, rel_tol):
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Returns ``(V, d, off, sweeps)`` where ``A ≈ V diag(d) V.T`` (columns of
    V are eigenvectors, unsorted), ``off`` is the final off-diagonal
    Frobenius norm and ``sweeps`` the number of full sweeps performed.
    Convergence: ``off <= rel_tol * ||A||_F``.
    """
    n = A.shape[0]
    a = A.copy()
    V = np.eye(n)
    fro = np.sqrt(np.sum(A * A))
    if n == 1 or fro == 0.0:
        return V, np.diag(a).copy(), 0.0, 0
    off = 0.0
    sweeps = 0
    for _sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += 2.0 * a[p, q] * a[p, q]
        off = np.sqrt(off)
        if off <= rel_tol * fro:
            return V, np.diag(a).copy(), off, sweeps
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-280:
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :].copy()
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    off = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            off += 2.0 * a[p, q] * a[p, q]
    off = np.sqrt(off)
    return V, np.diag(a).copy(), off, sweeps


# Projection modes for the internal-model loop.
PROJ_ORTHANT = 0     # x = max(y_c, 0)
PROJ_IDENTITY = 1    # x = y_c (unconstrained loop)
PROJ_EIGENBASIS = 2  # x = V.T @ max(V @ y_c, 0) (decoupled loop)


@jit
def _im_rhs(eta, b_vec, F_T, H, K, A, V, VT, rho, proj_mode):
    y_c = np.dot(eta, K)
    if proj_mode == 1:
        x = y_c
        w = np.zeros_like(y_c)
    elif proj_mode == 2:
        x = np.dot(VT, np.maximum(np.dot(V, y_c), 0.0))
        w = y_c - x
    else:
        x = np.maximum(y_c, 0.0)
        w = y_c - x
    u = np.dot(A, x) + b_vec + rho * w
    return np.dot(eta, F_T) + np.outer(u, H)


@jit
def im_loop(eta0, F_T, H, K, A, V, VT, b_half, rho, dt, n_steps, decim, proj_mode):
    """RK4 integration of the internal-model loop.

    ``eta0`` is the (n, m) controller state (one m-row per coordinate),
    ``b_half`` the forcing signal sampled on the half-step grid
    (2*n_steps+1, n). Records the state every ``decim`` steps; returns
    ``(rec, n_valid)`` with ``n_valid < rec.shape[0]`` when the state went
    non-finite (divergence).
    """
    n = eta0.shape[0]
    m = eta0.shape[1]
    n_rec = n_steps // decim + 1
    rec = np.empty((n_rec, n, m))
    rec[0] = eta0
    eta = eta0.copy()
    n_valid = 1
    for k in range(n_steps):
        b0 = b_half[2 * k]
        bh = b_half[2 * k + 1]
        b1 = b_half[2 * k + 2]
        k1 = _im_rhs(eta, b0, F_T, H, K, A, V, VT, rho, proj_mode)
        k2 = _im_rhs(eta + (0.5 * dt) * k1, bh, F_T, H, K, A, V, VT, rho, proj_mode)
        k3 = _im_rhs(eta + (0.5 * dt) * k2, bh, F_T, H, K, A, V, VT, rho, proj_mode)
        k4 = _im_rhs(eta + dt * k3, b1, F_T, H, K, A, V, VT, rho, proj_mode)
        eta = eta + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (k + 1) % decim == 0:
            if not np.isfinite(eta).all():
                return rec, n_valid
            rec[(k + 1) // decim] = eta
            n_valid += 1
    return rec, n_valid


@jit
def _opgd_rhs(q, b_vec, A, alpha):
    p = q - alpha * (np.dot(A, q) + b_vec)
    return -q + np.maximum(p, 0.0)


@jit
def opgd_loop(q0, A, b_half, alpha, dt, n_steps, decim):
    """RK4 integration of the online projected-gradient flow."""
    n_rec = n_steps // decim + 1
    rec = np.empty((n_rec, q0.shape[0]))
    rec[0] = q0
    q = q0.copy()
    n_valid = 1
    for k in range(n_steps):
        b0 = b_half[2 * k]
        bh = b_half[2 * k + 1]
        b1 = b_half[2 * k + 2]
        k1 = _opgd_rhs(q, b0, A, alpha)
        k2 = _opgd_rhs(q + (0.5 * dt) * k1, bh, A, alpha)
        k3 = _opgd_rhs(q + (0.5 * dt) * k2, bh, A, alpha)
        k4 = _opgd_rhs(q + dt * k3, b1, A, alpha)
        q = q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (k + 1) % decim == 0:
            if not np.isfinite(q).all():
                return rec, n_valid
            rec[(k + 1) // decim] = q
            n_valid += 1
    return rec, n_valid
