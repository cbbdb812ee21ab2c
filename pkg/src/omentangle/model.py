"""System parameters, linearized drift/diffusion matrices and stability.

Quadrature ordering used everywhere in the package::

    (I_h, Y_h, I_v, Y_v, X_1, P_1, X_2, P_2)

i.e. the horizontally polarized optical mode first, then the vertical one,
then the two mechanical resonators.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from omentangle.errors import ConvergenceError, NumericalError

#: Real parts with magnitude below this are reported as marginal.
MARGINAL_TOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Physical and control parameters, rates in units of ``omega_m``.

    ``G_m`` may be complex; ``delta_h`` / ``delta_v`` are the effective
    (mean-field shifted) detunings, red sideband at ``-1``.
    """

    omega_1: float = 1.0
    omega_2: float = 1.0
    kappa: float = 0.2
    gamma_m: float = 1e-5
    delta_h: float = -1.0
    delta_v: float = -1.0
    G_m: complex = 0.2
    J_m: float = 0.2
    phi: float = math.pi / 4
    theta: float = math.pi / 2
    n_th1: float = 0.0
    n_th2: float = 0.0

    def __post_init__(self):
        for name in ("omega_1", "omega_2", "kappa", "gamma_m", "delta_h", "delta_v",
                     "J_m", "phi", "theta", "n_th1", "n_th2"):
            value = getattr(self, name)
            if isinstance(value, complex) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite real number, got {value!r}")
        if not np.isfinite(complex(self.G_m)):
            raise ValueError(f"G_m must be finite, got {self.G_m!r}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.gamma_m <= 0:
            raise ValueError(f"gamma_m must be > 0, got {self.gamma_m}")
        if self.J_m < 0:
            raise ValueError(f"J_m must be >= 0, got {self.J_m}")
        if self.n_th1 < 0 or self.n_th2 < 0:
            raise ValueError("thermal occupations must be >= 0")

    def replace(self, **changes) -> "SystemParams":
        """Copy with fields changed. ``n_th`` sets both baths, ``delta`` both
        detunings."""
        if "n_th" in changes:
            n = changes.pop("n_th")
            changes.setdefault("n_th1", n)
            changes.setdefault("n_th2", n)
        if "delta" in changes:
            d = changes.pop("delta")
            changes.setdefault("delta_h", d)
            changes.setdefault("delta_v", d)
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        g = complex(self.G_m)
        out["G_m"] = g.real
        out["G_m_imag"] = g.imag
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SystemParams":
        data = dict(data)
        imag = data.pop("G_m_imag", 0.0)
        if "G_m" in data and imag:
            data["G_m"] = complex(data["G_m"], imag)
        return cls().replace(**data)


class StabilityReport(NamedTuple):
    max_real_part: float
    stable: bool
    marginal: bool
    eigenvalues: np.ndarray


class MeanField(NamedTuple):
    alpha: np.ndarray
    """Intracavity amplitudes ``(alpha_h, alpha_v)``."""
    beta: np.ndarray
    """Mechanical amplitudes ``(beta_1, beta_2)``."""
    delta_eff: np.ndarray
    """Effective detunings ``(delta_h, delta_v)``."""
    iterations: int


def effective_couplings(G_m, phi):
    """Split the drive coupling between the two polarizations.

    Returns ``(G_v, G_h) = (G_m cos(phi), G_m sin(phi))``.
    """
    return G_m * math.cos(phi), G_m * math.sin(phi)


def build_drift_matrix(params: SystemParams) -> np.ndarray:
    """8x8 drift matrix of the linearized quadrature fluctuations."""
    p = params
    G_v, G_h = effective_couplings(complex(p.G_m), p.phi)
    k2 = p.kappa / 2
    g2 = p.gamma_m / 2
    s = p.J_m * math.sin(p.theta)
    c = p.J_m * math.cos(p.theta)

    m = np.zeros((8, 8))
    # optical blocks
    m[0:2, 0:2] = [[-k2, -p.delta_h], [p.delta_h, -k2]]
    m[2:4, 2:4] = [[-k2, -p.delta_v], [p.delta_v, -k2]]
    # radiation pressure; each optical mode drives both X_1 and X_2, and
    # both mechanical modes see the two intensity quadratures I_h, I_v
    for col in (4, 6):
        m[0, col] = 2 * G_h.imag
        m[1, col] = -2 * G_h.real
        m[2, col] = 2 * G_v.imag
        m[3, col] = -2 * G_v.real
    for row in (4, 6):
        m[row, 0] = 2 * G_h.imag
        m[row + 1, 0] = -2 * G_h.real
        m[row, 2] = 2 * G_v.imag
        m[row + 1, 2] = -2 * G_v.real
    # mechanics with phase-modulated hopping
    m[4:8, 4:8] = [
        [-g2, p.omega_1, s, c],
        [-p.omega_1, -g2, -c, s],
        [-s, c, -g2, p.omega_2],
        [-c, -s, -p.omega_2, -g2],
    ]
    return m


def build_diffusion_matrix(params: SystemParams) -> np.ndarray:
    """Diagonal 8x8 diffusion matrix (vacuum optical input, thermal mechanics)."""
    k2 = params.kappa / 2
    d1 = params.gamma_m * (2 * params.n_th1 + 1) / 2
    d2 = params.gamma_m * (2 * params.n_th2 + 1) / 2
    return np.diag([k2, k2, k2, k2, d1, d1, d2, d2])


def check_stability(m: np.ndarray) -> StabilityReport:
    """Routh-Hurwitz check via the eigenvalues of the drift matrix.

    Stable means every eigenvalue has a strictly negative real part. Reports
    with ``|max_real_part| < 1e-12`` are additionally flagged ``marginal``.
    """
    try:
        eig = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue solver failed on drift matrix: {exc}") from exc
    if not np.all(np.isfinite(eig)):
        raise NumericalError("drift matrix has non-finite eigenvalues")
    max_re = float(np.max(eig.real))
    return StabilityReport(
        max_real_part=max_re,
        stable=max_re < 0,
        marginal=abs(max_re) < MARGINAL_TOL,
        eigenvalues=eig,
    )


def mean_field_steady_state(
    params: SystemParams,
    g: float,
    alpha_in,
    bare_detunings=None,
    *,
    rtol: float = 1e-12,
    max_iter: int = 1000,
) -> MeanField:
    """Self-consistent fixed point of the classical mean-field equations.

    ``alpha_in`` is the drive amplitude pair ``(alpha_h_in, alpha_v_in)`` and
    ``bare_detunings`` the pair ``(Delta_h, Delta_v)`` before the radiation
    pressure shift (defaults to ``params.delta_h, params.delta_v``). Rates,
    mechanical frequencies, ``J_m`` and ``theta`` are taken from ``params``;
    ``params.G_m`` and ``params.phi`` are ignored.

    Each sweep solves the linear optical steady state at the current effective
    detunings, then the linear 2x2 mechanical steady state driven by the
    intracavity intensity, and updates the detunings until the relative
    change drops below ``rtol``.
    """
    p = params
    bare = np.asarray(
        bare_detunings if bare_detunings is not None else (p.delta_h, p.delta_v), dtype=float
    )
    a_in = np.asarray(alpha_in, dtype=complex)
    sk = math.sqrt(p.kappa)
    e = np.exp(1j * p.theta)
    mech = np.array([
        [-(1j * p.omega_1 + p.gamma_m / 2), -1j * p.J_m * e],
        [-1j * p.J_m * np.conj(e), -(1j * p.omega_2 + p.gamma_m / 2)],
    ])

    delta = bare.copy()
    alpha = beta = None
    residual = math.inf
    for it in range(1, max_iter + 1):
        alpha = sk * a_in / (p.kappa / 2 - 1j * delta)
        intensity = float(np.sum(np.abs(alpha) ** 2))
        beta = np.linalg.solve(mech, np.full(2, 1j * g * intensity))
        new_delta = bare - 2 * g * np.sum(beta.real)
        scale = max(float(np.max(np.abs(new_delta))), 1e-300)
        residual = float(np.max(np.abs(new_delta - delta))) / scale
        delta = new_delta
        if residual < rtol:
            alpha = sk * a_in / (p.kappa / 2 - 1j * delta)
            return MeanField(alpha, beta, delta, it)
    raise ConvergenceError(
        f"mean-field iteration did not converge in {max_iter} iterations "
        f"(relative change {residual:.3e})",
        last_iterate=MeanField(alpha, beta, delta, max_iter),
        residual=residual,
    )
