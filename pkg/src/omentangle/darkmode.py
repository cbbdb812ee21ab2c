"""Bright/dark optical hybrid modes and dark-mode regime classification.

With ``J_m = 0`` the two polarized cavity modes can be rotated into a bright
mode ``B+`` that couples to the mechanics with strength ``G = |(G_v, G_h)|``
and a dark mode ``B-`` that only talks to ``B+`` through
``G- = G_v G_h (delta_h - delta_v) / |G|**2``. The optical dark mode is
unbroken (ODMU) whenever ``G-`` vanishes.

The mechanical dark-mode rule (``J_m > 0`` and ``sin(theta) != 0``) is this
package's formalization; no quantitative criterion beyond ``theta != n pi``
is implied by the underlying model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from omentangle.model import SystemParams, effective_couplings

ODMU = "ODMU"
ODMB = "ODMB"

REGIME_TOL = 1e-12


@dataclass(frozen=True)
class DarkModeReport:
    g_plus: float
    g_minus: complex
    omega_plus: complex
    omega_minus: complex
    optical_regime: str
    mechanical_dark_broken: bool


def _bright_dark_basis(G_v, G_h):
    """Columns are the (h, v) components of B+ and B-."""
    g = math.sqrt(abs(G_v) ** 2 + abs(G_h) ** 2)
    return np.array([[G_h, np.conj(G_v)], [G_v, -np.conj(G_h)]], dtype=complex) / g


def hybrid_optical_block(params: SystemParams) -> np.ndarray:
    """Optical frequency matrix ``diag(delta_p + i kappa/2)`` expressed in the
    (B+, B-) basis. Its diagonal holds ``omega_+`` and ``omega_-``."""
    G_v, G_h = effective_couplings(complex(params.G_m), params.phi)
    if abs(G_v) ** 2 + abs(G_h) ** 2 == 0:
        raise ValueError("hybridization undefined for G_m = 0")
    t = _bright_dark_basis(G_v, G_h)
    k = np.diag([params.delta_h + 0.5j * params.kappa, params.delta_v + 0.5j * params.kappa])
    return t.conj().T @ k @ t


def hybridized_couplings(params: SystemParams, tol: float = REGIME_TOL) -> DarkModeReport:
    """Hybrid couplings ``G+``, ``G-`` and frequencies ``omega+-``.

    Raises:
        ValueError: ``G_m = 0`` (the bright/dark split is 0/0).
    """
    G_v, G_h = effective_couplings(complex(params.G_m), params.phi)
    norm2 = abs(G_v) ** 2 + abs(G_h) ** 2
    if norm2 == 0:
        raise ValueError("hybridization undefined for G_m = 0")
    g_minus = G_v * G_h / norm2 * (params.delta_h - params.delta_v)
    block = hybrid_optical_block(params)
    regime, broken = classify_regime(params, tol)
    return DarkModeReport(
        g_plus=math.sqrt(norm2),
        g_minus=complex(g_minus),
        omega_plus=complex(block[0, 0]),
        omega_minus=complex(block[1, 1]),
        optical_regime=regime,
        mechanical_dark_broken=broken,
    )


def classify_regime(params: SystemParams, tol: float = REGIME_TOL):
    """Return ``(optical_regime, mechanical_dark_broken)``.

    ODMU when ``|G-| < tol * max(G+, tol)`` or when one polarization carries
    no coupling (``min(|G_v|, |G_h|) < tol * max(|G_m|, tol)``); ODMB
    otherwise. The mechanical dark mode counts as broken when
    ``J_m > tol`` and ``|sin(theta)| > tol``.
    """
    G_v, G_h = effective_couplings(complex(params.G_m), params.phi)
    g_m = abs(complex(params.G_m))
    broken = params.J_m > tol and abs(math.sin(params.theta)) > tol
    if g_m == 0:
        return ODMU, broken
    g_plus = math.sqrt(abs(G_v) ** 2 + abs(G_h) ** 2)
    g_minus = abs(G_v * G_h) / g_plus**2 * abs(params.delta_h - params.delta_v)
    unbroken = g_minus < tol * max(g_plus, tol) or min(abs(G_v), abs(G_h)) < tol * max(g_m, tol)
    return (ODMU if unbroken else ODMB), broken
