"""Steady-state covariance from the Lyapunov equation ``M V + V M^T = -D``.

The steady state is obtained by a direct dense solve of the vectorized
equation. :func:`integrate_covariance` is an independent route through the
transient equation ``dV/dt = M V + V M^T + D`` and serves as a cross-check.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from omentangle.errors import IntegrationDivergence, NumericalError, UnstableSystemError
from omentangle.model import SystemParams, build_diffusion_matrix, build_drift_matrix, check_stability

#: Reciprocal condition numbers below this are treated as singular.
RCOND_MIN = 1e-14
#: Pre-symmetrization asymmetry (relative) that triggers a warning.
ASYMMETRY_WARN = 1e-8
#: Physicality floor for symplectic eigenvalues (vacuum is 1/2).
PHYSICAL_FLOOR = 0.5 - 1e-9
#: Entry magnitude treated as blow-up during transient integration.
BLOWUP = 1e12


def lyapunov_residual(m, d, v) -> float:
    """Max-norm of ``M V + V M^T + D``."""
    return float(np.max(np.abs(m @ v + v @ m.T + d)))


def solve_steady_covariance(m, d, *, check_physical: bool = True) -> np.ndarray:
    """Solve ``M V + V M^T = -D`` for the steady-state covariance.

    The equation is vectorized to the 64x64 system
    ``(M (x) I + I (x) M) vec(V) = -vec(D)`` and solved by LU with partial
    pivoting; the result is symmetrized.

    Raises:
        UnstableSystemError: ``M`` has an eigenvalue with real part >= 0.
        NumericalError: the linear system is singular/ill-conditioned, or the
            solution violates the uncertainty bound.
    """
    m = np.asarray(m, dtype=float)
    d = np.asarray(d, dtype=float)
    report = check_stability(m)
    if not report.stable:
        raise UnstableSystemError(
            f"no steady state: drift matrix unstable (max Re = {report.max_real_part:.3e})",
            max_real_part=report.max_real_part,
            eigenvalues=report.eigenvalues,
        )

    n = m.shape[0]
    eye = np.eye(n)
    op = np.kron(m, eye) + np.kron(eye, m)
    lu, piv, info = lapack.dgetrf(op)
    if info != 0:
        raise NumericalError(f"Lyapunov operator is singular (dgetrf info={info})")
    anorm = np.max(np.sum(np.abs(op), axis=0))
    rcond, info = lapack.dgecon(lu, anorm, norm="1")
    if info != 0 or rcond < RCOND_MIN:
        raise NumericalError(f"Lyapunov operator ill-conditioned (rcond={rcond:.3e})")
    vec, info = lapack.dgetrs(lu, piv, -d.reshape(-1))
    if info != 0:
        raise NumericalError(f"Lyapunov back-substitution failed (info={info})")
    v = vec.reshape(n, n)

    asym = np.max(np.abs(v - v.T)) / max(1.0, float(np.max(np.abs(v))))
    if asym > ASYMMETRY_WARN:
        warnings.warn(
            f"Lyapunov solution asymmetric by {asym:.2e} before symmetrization; "
            "system may be ill-conditioned",
            RuntimeWarning,
            stacklevel=2,
        )
    v = (v + v.T) / 2

    if check_physical:
        # local import keeps the solver usable without the entanglement module
        from omentangle.gaussian import symplectic_eigenvalues

        nu = symplectic_eigenvalues(v)
        if nu[0] < PHYSICAL_FLOOR:
            raise NumericalError(
                f"steady-state covariance is unphysical: smallest symplectic "
                f"eigenvalue {nu[0]:.6g} < 1/2"
            )
    return v


def steady_state(params: SystemParams, **kwargs) -> np.ndarray:
    """Convenience wrapper: build M and D from ``params`` and solve."""
    return solve_steady_covariance(
        build_drift_matrix(params), build_diffusion_matrix(params), **kwargs
    )


def _rk4_step_map(m, d, dt):
    """Affine one-step RK4 map on ``[vec(V), 1]`` as a 65x65 matrix.

    Built by pushing the basis matrices through an ordinary RK4 step, so it
    does not share code with the Kronecker solve.
    """
    n = m.shape[0]
    size = n * n
    basis = np.zeros((size + 1, n, n))
    basis[:size].reshape(size, size)[:] = np.eye(size)
    # last slot carries the inhomogeneous term: V = 0 with D switched on
    forcing = np.zeros((size + 1, 1, 1))
    forcing[size] = 1.0

    def f(v):
        return m @ v + v @ m.T + forcing * d

    k1 = f(basis)
    k2 = f(basis + dt / 2 * k1)
    k3 = f(basis + dt / 2 * k2)
    k4 = f(basis + dt * k3)
    out = basis + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    step = np.zeros((size + 1, size + 1))
    step[:size, :] = out.reshape(size + 1, size).T
    step[size, size] = 1.0
    return step


def _too_big(state):
    return not np.all(np.isfinite(state)) or np.max(np.abs(state)) > BLOWUP


def integrate_covariance(m, d, v0, t_final: float, dt: float | None = None) -> np.ndarray:
    """Integrate ``dV/dt = M V + V M^T + D`` from ``v0`` with fixed-step RK4.

    ``dt`` defaults to ``0.01 / max|eig(M)|`` and is shrunk slightly so that
    an integer number of steps lands on ``t_final``. Because the equation is
    linear, one RK4 step is an affine map; the ``N``-step evolution is applied
    as products of its powers ``step**(2**k)``. This reproduces the plain
    step-by-step iterates up to rounding while making ``t_final ~ 1e7`` cheap.

    Raises:
        IntegrationDivergence: an entry exceeded ``1e12`` in magnitude; the
            exception carries the (step-resolved) blow-up time.
    """
    m = np.asarray(m, dtype=float)
    d = np.asarray(d, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    n = m.shape[0]
    if t_final < 0:
        raise ValueError("t_final must be >= 0")
    if dt is None:
        scale = float(np.max(np.abs(np.linalg.eigvals(m))))
        dt = 0.01 / scale if scale > 0 else 0.01
    if dt <= 0:
        raise ValueError("dt must be > 0")
    steps = math.ceil(t_final / dt - 1e-9) if t_final > 0 else 0
    if steps == 0:
        return (v0 + v0.T) / 2
    h = t_final / steps

    powers = [_rk4_step_map(m, d, h)]
    while (1 << len(powers)) <= steps:
        with np.errstate(over="ignore", invalid="ignore"):
            powers.append(powers[-1] @ powers[-1])

    state = np.append(v0.reshape(-1), 1.0)
    done = 0
    for k in range(len(powers) - 1, -1, -1):
        if not steps & (1 << k):
            continue
        with np.errstate(over="ignore", invalid="ignore"):
            trial = powers[k] @ state
        if _too_big(trial):
            # walk smaller chunks to resolve the first step that blows up
            for j in range(k - 1, -1, -1):
                with np.errstate(over="ignore", invalid="ignore"):
                    probe = powers[j] @ state
                if not _too_big(probe):
                    state = probe
                    done += 1 << j
            t_blow = (done + 1) * h
            raise IntegrationDivergence(
                f"covariance integration diverged at t = {t_blow:.6g} (|V| > {BLOWUP:g})",
                time=t_blow,
            )
        state = trial
        done += 1 << k

    v = state[:-1].reshape(n, n)
    return (v + v.T) / 2
