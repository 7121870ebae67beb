"""Domain types and dense symmetric linear algebra shared by all modules.

Hosts the quadratic-cost data, the signal-model realizations, the controller
record, the eigendecomposition used for loop decoupling, and the projection
nonlinearity with its almost-everywhere Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

# Tolerances for double precision at desk scale (n up to ~200).
TOL_ASYMMETRY = 1e-12       # relative asymmetry accepted on symmetric input
TOL_ORTHOGONALITY = 1e-8    # ||V.T V - I||_max accepted by phi / transforms
TOL_EIG_CACHE_ORTH = 1e-10  # orthogonality demanded of a cached eigenbasis
TOL_EIG_CACHE_RESID = 1e-8  # reconstruction residual factor (times lam_max)
TOL_EIG_BOUNDS = 1e-9       # eigenvalue interval slack factor (times lam_max)
TOL_KINK = 1e-12            # distance to the projection kink set
TOL_MARGINAL_ROOT = 1e-9    # accepted real part for signal-model roots


class EigenConvergenceError(RuntimeError):
    """Jacobi sweeps hit the iteration cap before the residual target."""

    def __init__(self, residual, sweeps):
        super().__init__(
            f"Jacobi iteration did not converge after {sweeps} sweeps "
            f"(off-diagonal residual {residual:.3e})"
        )
        self.residual = residual
        self.sweeps = sweeps


class KinkProximityError(ValueError):
    """The Jacobian of the projection is requested too close to a kink."""

    def __init__(self, distance):
        super().__init__(
            f"projection argument within {distance:.3e} of the kink set; "
            f"the Jacobian is not defined there (resample the input)"
        )
        self.distance = distance


def _as_matrix(A, name="A"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")
    return A


def _check_symmetric(A, name="A", tol=TOL_ASYMMETRY):
    scale = max(np.abs(A).max(), 1e-300)
    asym = np.abs(A - A.T).max()
    if asym > tol * scale:
        raise ValueError(
            f"{name} is not symmetric: relative asymmetry {asym / scale:.3e} "
            f"exceeds {tol:.1e}"
        )
    return 0.5 * (A + A.T)


def _check_orthogonal(V, tol=TOL_ORTHOGONALITY):
    V = _as_matrix(V, "V")
    err = np.abs(V.T @ V - np.eye(V.shape[0])).max()
    if err > tol:
        raise ValueError(
            f"V is not orthogonal: ||V.T V - I||_max = {err:.3e} > {tol:.1e}"
        )
    return V


def symmetric_eigendecomposition(A, max_sweeps=60, rel_tol=1e-14):
    """Eigendecomposition A = V diag(lam) V.T by cyclic Jacobi rotations.

    Parameters
    ----------
    A : (n, n) array_like
        Symmetric matrix (relative asymmetry up to 1e-12 is symmetrized).
    max_sweeps : int
        Sweep cap before :class:`EigenConvergenceError` is raised.
    rel_tol : float
        Off-diagonal Frobenius target relative to ``||A||_F``.

    Returns
    -------
    V : (n, n) ndarray
        Orthogonal; column signs fixed so the largest-magnitude entry of
        each eigenvector is positive (first such entry on ties).
    lam : (n,) ndarray
        Eigenvalues in ascending order.
    """
    A = _as_matrix(A)
    A = _check_symmetric(A)
    V, d, off, sweeps = _kernels.jacobi_eigh(A, max_sweeps, rel_tol)
    fro = np.sqrt(np.sum(A * A))
    if off > rel_tol * fro and sweeps >= max_sweeps:
        raise EigenConvergenceError(off, sweeps)
    order = np.argsort(d, kind="stable")
    lam = d[order]
    V = V[:, order]
    for j in range(V.shape[1]):
        i = int(np.argmax(np.abs(V[:, j])))
        if V[i, j] < 0.0:
            V[:, j] = -V[:, j]
    return V, lam


@dataclass
class QuadraticProblem:
    """Time-varying quadratic cost data: curvature A plus spectral bounds.

    ``lambda_min``/``lambda_max`` are the design bounds assumed known a
    priori; the spectrum of A must lie inside them (within
    ``TOL_EIG_BOUNDS * lambda_max``). The constant cost offset never enters
    any computation and is not stored.
    """

    A: np.ndarray
    lambda_min: float
    lambda_max: float
    eig: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        self.A = _as_matrix(self.A)
        if not np.array_equal(self.A, self.A.T):
            raise ValueError("A must be stored exactly symmetric; "
                             "use QuadraticProblem.from_matrix to symmetrize")
        if not (0.0 < self.lambda_min <= self.lambda_max):
            raise ValueError("need 0 < lambda_min <= lambda_max")
        tol = TOL_EIG_BOUNDS * self.lambda_max
        evals = np.linalg.eigvalsh(self.A)
        if evals[0] < self.lambda_min - tol or evals[-1] > self.lambda_max + tol:
            raise ValueError(
                f"spectrum [{evals[0]:.6g}, {evals[-1]:.6g}] outside the "
                f"declared interval [{self.lambda_min:.6g}, {self.lambda_max:.6g}]"
            )
        if self.eig is not None:
            V, lam = self.eig
            self._validate_eig(V, np.asarray(lam, dtype=float))

    def _validate_eig(self, V, lam):
        n = self.n
        if np.abs(V.T @ V - np.eye(n)).max() > TOL_EIG_CACHE_ORTH:
            raise ValueError("cached eigenbasis is not orthogonal")
        if np.any(np.diff(lam) < 0):
            raise ValueError("cached eigenvalues must be ascending")
        resid = np.abs(self.A - (V * lam) @ V.T).max()
        if resid > TOL_EIG_CACHE_RESID * self.lambda_max:
            raise ValueError(
                f"cached eigendecomposition residual {resid:.3e} too large"
            )

    @property
    def n(self):
        return self.A.shape[0]

    @classmethod
    def from_matrix(cls, A, lambda_min=None, lambda_max=None):
        """Build a problem from a near-symmetric matrix.

        Missing bounds default to the actual extreme eigenvalues.
        """
        A = _check_symmetric(_as_matrix(A))
        evals = np.linalg.eigvalsh(A)
        if lambda_min is None:
            lambda_min = float(evals[0])
        if lambda_max is None:
            lambda_max = float(evals[-1])
        return cls(A=A, lambda_min=float(lambda_min), lambda_max=float(lambda_max))

    def eig_pair(self):
        """Return (V, lam), computing and caching the decomposition on first use."""
        if self.eig is None:
            V, lam = symmetric_eigendecomposition(self.A)
            self._validate_eig(V, lam)
            self.eig = (V, lam)
        return self.eig


@dataclass
class ExosystemModel:
    """Marginally stable SISO signal model in controllable canonical form.

    ``d_coeffs`` holds the monic characteristic polynomial in descending
    powers. ``H_row`` (e_1) is the signal-model output row; ``H_col`` (e_m)
    is the input column of the controller realization. Only ``H_col``
    enters synthesis and simulation.
    """

    m: int
    d_coeffs: np.ndarray
    F: np.ndarray
    H_col: np.ndarray
    H_row: np.ndarray
    roots: np.ndarray = field(repr=False, default=None)

    def char_poly(self):
        """Coefficients of det(sI - F), descending, recomputed from F."""
        return np.poly(self.F)


def companion_realization(d_coeffs):
    """Build the canonical signal-model realization for a monic polynomial.

    F carries ones on the superdiagonal and the negated coefficients on the
    last row; all roots must satisfy Re <= 1e-9 (marginal stability;
    repeated imaginary-axis roots are accepted).
    """
    c = np.asarray(d_coeffs, dtype=float).ravel()
    if c.size < 2:
        raise ValueError("polynomial must have degree >= 1")
    if abs(c[0] - 1.0) > 1e-12:
        raise ValueError(f"polynomial must be monic, leading coefficient {c[0]!r}")
    c = c.copy()
    c[0] = 1.0
    m = c.size - 1
    roots = np.roots(c)
    max_re = float(np.max(roots.real)) if m else 0.0
    if max_re > TOL_MARGINAL_ROOT:
        raise ValueError(
            f"signal-model polynomial has a root with Re = {max_re:.3e} > 0; "
            f"the generated signals would grow exponentially"
        )
    F = np.zeros((m, m))
    for i in range(m - 1):
        F[i, i + 1] = 1.0
    # last row: -a_0 ... -a_{m-1} for d(s) = s^m + a_{m-1} s^{m-1} + ... + a_0
    F[m - 1, :] = -c[1:][::-1]
    H_col = np.zeros(m)
    H_col[m - 1] = 1.0
    H_row = np.zeros(m)
    H_row[0] = 1.0
    return ExosystemModel(m=m, d_coeffs=c, F=F, H_col=H_col, H_row=H_row,
                          roots=roots)


@dataclass
class ExtendedRealization:
    """Kronecker-extended controller matrices: one model copy per coordinate."""

    n: int
    m: int
    F_ext: np.ndarray
    H_ext: np.ndarray
    K_ext: np.ndarray


def kron_extend(model, K, n):
    """Extend (F, H_col, K) to the n-coordinate realization I_n kron (.)."""
    K = np.asarray(K, dtype=float).ravel()
    if K.size != model.m:
        raise ValueError(f"gain row has {K.size} entries, model order is {model.m}")
    if n < 1:
        raise ValueError("n must be positive")
    eye = np.eye(n)
    F_ext = np.kron(eye, model.F)
    H_ext = np.kron(eye, model.H_col.reshape(model.m, 1))
    K_ext = np.kron(eye, K.reshape(1, model.m))
    return ExtendedRealization(n=n, m=model.m, F_ext=F_ext, H_ext=H_ext,
                               K_ext=K_ext)


@dataclass
class ControllerDesign:
    """Synthesized internal-model controller with anti-windup gain.

    ``cert`` carries the feasibility evidence: closed-loop eigenvalue
    margins at the interval vertices and the anti-windup LMI solution
    (needed to re-verify the design independently of the solver).
    """

    model: ExosystemModel
    K: np.ndarray
    rho: float
    gamma: float
    lambda_min: float
    lambda_max: float
    cert: dict = field(default_factory=dict)

    def __post_init__(self):
        self.K = np.asarray(self.K, dtype=float).ravel()
        if self.K.size != self.model.m:
            raise ValueError("gain row length must equal the model order")


def gradient_oracle(prob, b, x):
    """Gradient of the quadratic cost at x: A x + b."""
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    if b.shape != (prob.n,) or x.shape != (prob.n,):
        raise ValueError(f"b and x must be vectors of length {prob.n}")
    return prob.A @ x + b


def project_nonneg(v):
    """Componentwise projection onto the nonnegative orthant."""
    return np.maximum(np.asarray(v, dtype=float), 0.0)


def phi(V, u):
    """Projection conjugated by an orthogonal change of basis: V.T proj(V u)."""
    V = _check_orthogonal(V)
    u = np.asarray(u, dtype=float)
    return V.T @ project_nonneg(V @ u)


def phi_jacobian(V, u, tol_kink=TOL_KINK):
    """Almost-everywhere Jacobian of :func:`phi`: V.T diag(Vu >= 0) V.

    Raises :class:`KinkProximityError` when a component of V u lies within
    ``tol_kink`` of zero, where the Jacobian is undefined.
    """
    V = _check_orthogonal(V)
    u = np.asarray(u, dtype=float)
    v = V @ u
    dist = np.abs(v).min()
    if dist < tol_kink:
        raise KinkProximityError(dist)
    X = (v >= 0.0).astype(float)
    return (V.T * X) @ V


def transform_signals(V, vec):
    """Coordinates of a loop signal in the eigenbasis: V.T vec."""
    V = _check_orthogonal(V)
    vec = np.asarray(vec, dtype=float)
    return V.T @ vec
