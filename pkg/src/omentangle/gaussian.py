"""Gaussian entanglement measures on quadrature covariance matrices.

Convention: quadratures carry a 1/sqrt(2) normalization, so the vacuum
covariance is ``I/2``, separable states have PT symplectic eigenvalues
``>= 1/2`` and ``E_N = max(0, -ln(2 nu_min))``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from omentangle.errors import MonogamyWarning, NumericalError

#: Margin below 1/2 required before a PT eigenvalue counts as entangled.
ENTANGLED_TOL = 1e-12
#: Negative residual contangles within this are clamped to zero.
MONOGAMY_TOL = 1e-9


class Mode(enum.IntEnum):
    """The four bosonic modes, valued by their position in the mode list."""

    H = 0
    V = 1
    M1 = 2
    M2 = 3

    @property
    def offset(self) -> int:
        """Index of the mode's first quadrature in the 8x8 covariance."""
        return 2 * int(self)

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, token) -> "Mode":
        if isinstance(token, cls):
            return token
        if isinstance(token, int):
            return cls(token)
        key = str(token).strip().upper()
        aliases = {"OPTICALH": "H", "OPTICALV": "V", "MECH1": "M1", "MECH2": "M2",
                   "ALPHA_H": "H", "ALPHA_V": "V", "B1": "M1", "B2": "M2"}
        key = aliases.get(key, key)
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown mode {token!r}; expected one of h, v, m1, m2") from None


@dataclass
class EntanglementResult:
    value: float
    nu_min: float
    partition: tuple
    meta: dict = field(default_factory=dict)

    @property
    def entangled(self) -> bool:
        return self.value > 0


def _omega(k: int) -> np.ndarray:
    return np.kron(np.eye(k), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def extract_submatrix(v, modes: Sequence) -> np.ndarray:
    """Reduced covariance of ``modes`` (in the listed order)."""
    modes = [Mode.parse(x) for x in modes]
    if not 1 <= len(modes) <= 4:
        raise ValueError("between 1 and 4 modes required")
    if len(set(modes)) != len(modes):
        raise ValueError(f"duplicate modes in {[x.label for x in modes]}")
    idx = [i for mode in modes for i in (mode.offset, mode.offset + 1)]
    return np.asarray(v)[np.ix_(idx, idx)]


def partial_transpose(chi, flip: Iterable[int]) -> np.ndarray:
    """Flip the momentum quadrature of each mode position in ``flip``."""
    chi = np.asarray(chi)
    k = chi.shape[0] // 2
    signs = np.ones(2 * k)
    for pos in flip:
        if not 0 <= pos < k:
            raise ValueError(f"flip position {pos} out of range for {k} modes")
        signs[2 * pos + 1] = -1.0
    return chi * signs[:, None] * signs[None, :]


def symplectic_eigenvalues(chi) -> np.ndarray:
    """Ascending symplectic spectrum, the moduli of ``eig(i Omega chi)``."""
    chi = np.asarray(chi, dtype=float)
    k = chi.shape[0] // 2
    try:
        ev = np.linalg.eigvals(1j * _omega(k) @ chi)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symplectic eigenvalue solve failed: {exc}") from exc
    if not np.all(np.isfinite(ev)):
        raise NumericalError("non-finite symplectic eigenvalues")
    # eigenvalues come in +/- nu pairs
    return np.sort(np.abs(ev))[::2]


def nu_minus_two_mode(chi) -> float:
    """Smallest PT symplectic eigenvalue of a two-mode covariance, closed form.

    ``chi`` is the *untransposed* covariance; the sign flip of the partial
    transpose is carried by the ``- 2 det C`` term. With blocks ``chi = [[A, C], [C^T, B]]``::

        s = det A + det B - 2 det C
        nu_min**2 = (s - sqrt(s**2 - 4 det chi)) / 2
    """
    chi = np.asarray(chi, dtype=float)
    a, b, c = chi[:2, :2], chi[2:, 2:], chi[:2, 2:]
    s = np.linalg.det(a) + np.linalg.det(b) - 2 * np.linalg.det(c)
    disc = max(s * s - 4 * np.linalg.det(chi), 0.0)
    return math.sqrt(max((s - math.sqrt(disc)) / 2, 0.0))


def _negativity_from_nu(nu: float, tol: float) -> float:
    return -math.log(2 * nu) if nu < 0.5 - tol else 0.0


def _one_vs_rest(v, focus, rest, tol):
    modes = [Mode.parse(focus)] + [Mode.parse(x) for x in rest]
    chi = partial_transpose(extract_submatrix(v, modes), [0])
    nu = float(symplectic_eigenvalues(chi)[0])
    return _negativity_from_nu(nu, tol), nu, modes


def log_negativity(v, a, b, *, tol: float = ENTANGLED_TOL) -> EntanglementResult:
    """Bipartite logarithmic negativity between modes ``a`` and ``b``.

    Mode ``a`` is partially transposed. The pair counts as entangled only when
    ``nu_min < 1/2 - tol``.
    """
    a, b = Mode.parse(a), Mode.parse(b)
    if a == b:
        raise ValueError("log_negativity needs two distinct modes")
    value, nu, _ = _one_vs_rest(v, a, [b], tol)
    return EntanglementResult(value, nu, ((a,), (b,)))


def contangle(v, a, b, *, tol: float = ENTANGLED_TOL) -> float:
    """Squared logarithmic negativity of ``a`` against the mode set ``b``.

    ``a`` is a single mode (or a one-element collection), ``b`` holds one or
    two modes.
    """
    a_modes = _as_modes(a)
    b_modes = _as_modes(b)
    if len(a_modes) != 1 or len(b_modes) not in (1, 2):
        raise ValueError("contangle needs |a| = 1 and |b| in {1, 2}")
    if set(a_modes) & set(b_modes):
        raise ValueError("partitions must be disjoint")
    value, _, _ = _one_vs_rest(v, a_modes[0], b_modes, tol)
    return value * value


def _as_modes(x) -> list:
    if isinstance(x, (str, Mode, int)):
        return [Mode.parse(x)]
    return [Mode.parse(m) for m in x]


def _residual_parts(v, u, w1, w2, tol):
    whole = contangle(v, u, (w1, w2), tol=tol)
    return whole - contangle(v, u, w1, tol=tol) - contangle(v, u, w2, tol=tol)


def residual_contangle(v, u, w1, w2, *, tol: float = ENTANGLED_TOL,
                       monogamy_tol: float = MONOGAMY_TOL) -> float:
    """``R^{u|(w1 w2)} - R^{u|w1} - R^{u|w2}`` with ``u`` as the focus mode.

    Negative values beyond ``-monogamy_tol`` emit a :class:`MonogamyWarning`.
    """
    modes = [Mode.parse(u), Mode.parse(w1), Mode.parse(w2)]
    if len(set(modes)) != 3:
        raise ValueError("residual contangle needs three distinct modes")
    r = _residual_parts(v, *modes, tol)
    if r < -monogamy_tol:
        warnings.warn(
            f"monogamy violated: R^{{{modes[0].label}|{modes[1].label}|{modes[2].label}}} = {r:.3e}",
            MonogamyWarning,
            stacklevel=2,
        )
    return r


def min_residual_contangle(v, triple, *, tol: float = ENTANGLED_TOL,
                           monogamy_tol: float = MONOGAMY_TOL) -> EntanglementResult:
    """Minimum residual contangle over the three choices of focus mode.

    Values in ``[-monogamy_tol, 0)`` are clamped to 0. Larger violations are
    kept negative and flagged with ``meta['monogamy_ok'] = False``.
    """
    modes = tuple(Mode.parse(x) for x in triple)
    if len(modes) != 3 or len(set(modes)) != 3:
        raise ValueError("min_residual_contangle needs three distinct modes")
    residuals = {}
    nus = {}
    for i, focus in enumerate(modes):
        others = [m for j, m in enumerate(modes) if j != i]
        residuals[focus] = _residual_parts(v, focus, *others, tol)
        nus[focus] = _one_vs_rest(v, focus, others, tol)[1]
    focus = min(residuals, key=residuals.get)
    value = residuals[focus]
    ok = value >= -monogamy_tol
    if ok and value < 0:
        value = 0.0
    if not ok:
        warnings.warn(f"monogamy violated: R_min = {value:.3e}", MonogamyWarning, stacklevel=2)
    return EntanglementResult(
        value,
        nus[focus],
        ((focus,), tuple(m for m in modes if m != focus)),
        meta={"residuals": {m.label: r for m, r in residuals.items()}, "monogamy_ok": ok},
    )
