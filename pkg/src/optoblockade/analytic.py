"""Weak-drive amplitudes of the truncated two-mode wavefunction.

The steady state is expanded as ``sum_{n1+n2<=2} c_{n1 n2} |n1 n2>`` with
``c00 = 1``; one- and two-photon amplitudes follow from linear equations whose
complex detunings ``D'_j = D_j - i kappa_j / 2`` carry the cavity loss.
These closed forms serve as an oracle independent of the master equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correlations import UndefinedCorrelationError
from .hilbert import HilbertSpec
from .model import ModelParams

SQRT2 = math.sqrt(2.0)
AMPLITUDE_THRESHOLD = 1e-12
TWO_PHOTON_THRESHOLD = 1e-15
MANIFOLD_THRESHOLD = 1e-18


class SingularSystemError(ArithmeticError):
    """The amplitude equations have no unique solution."""


@dataclass(frozen=True)
class AmplitudeSet:
    c10: complex
    c01: complex
    c11: complex
    c20: complex
    c02: complex
    c00: complex = 1.0

    @property
    def hierarchy_ok(self) -> bool:
        """Weak-drive ordering ``|c00| > |c10|,|c01| > |c11|,|c20|,|c02|``."""
        one = max(abs(self.c10), abs(self.c01))
        two = max(abs(self.c11), abs(self.c20), abs(self.c02))
        return abs(self.c00) > one and min(abs(self.c10), abs(self.c01)) > two

    def state_vector(self, spec: HilbertSpec | None = None) -> np.ndarray:
        """Normalized two-mode ket built from the amplitudes."""
        spec = spec or HilbertSpec.optical(3)
        psi = np.zeros(spec.dim, dtype=complex)
        for occ, c in (
            ((0, 0), self.c00), ((1, 0), self.c10), ((0, 1), self.c01),
            ((1, 1), self.c11), ((2, 0), self.c20), ((0, 2), self.c02),
        ):
            psi[spec.basis_index(occ)] = c
        return psi / np.linalg.norm(psi)


def _detunings(params: ModelParams) -> tuple[complex, complex]:
    return (
        params.delta1 - 0.5j * params.kappa1,
        params.delta2 - 0.5j * params.kappa2,
    )


def single_excitation_amplitudes(params: ModelParams) -> tuple[complex, complex]:
    """``(c10, c01)`` from the two coupled one-photon equations."""
    d1, d2 = _detunings(params)
    u1, u2, j = params.u1, params.u2, params.j_hop
    f1, f2 = params.drive1, params.drive2
    den = (d1 - u1) * (d2 - u2) - j * j
    if abs(den) < 1e-300:
        raise SingularSystemError("one-photon determinant (D1'-U1)(D2'-U2) - J^2 vanishes")
    c10 = (j * f2 - f1 * (d2 - u2)) / den
    c01 = (j * f1 - f2 * (d1 - u1)) / den
    return complex(c10), complex(c01)


def two_photon_matrix(params: ModelParams) -> np.ndarray:
    """Coefficient matrix acting on ``(c20, c02, c11)``."""
    d1, d2 = _detunings(params)
    sj = SQRT2 * params.j_hop
    return np.array(
        [
            [2 * (d1 - 2 * params.u1), 0, sj],
            [0, 2 * (d2 - 2 * params.u2), sj],
            [sj, sj, d1 + d2 - params.u1 - params.u2],
        ],
        dtype=complex,
    )


def two_excitation_amplitudes(
    params: ModelParams, c10: complex, c01: complex
) -> tuple[complex, complex, complex]:
    """``(c20, c02, c11)`` from one 3x3 complex solve."""
    m = two_photon_matrix(params)
    f1, f2 = params.drive1, params.drive2
    rhs = -np.array([SQRT2 * f1 * c10, SQRT2 * f2 * c01, f1 * c01 + f2 * c10], dtype=complex)
    if np.linalg.cond(m) > 1e14:
        raise SingularSystemError(
            f"two-photon coefficient matrix is singular (det = {np.linalg.det(m):.3e})"
        )
    c20, c02, c11 = np.linalg.solve(m, rhs)
    return complex(c20), complex(c02), complex(c11)


def amplitudes(params: ModelParams) -> AmplitudeSet:
    c10, c01 = single_excitation_amplitudes(params)
    c20, c02, c11 = two_excitation_amplitudes(params, c10, c01)
    return AmplitudeSet(c10=c10, c01=c01, c11=c11, c20=c20, c02=c02)


def analytic_g2(params: ModelParams, amps: AmplitudeSet | None = None) -> tuple[float, float, float]:
    """Leading-order ``(g2_a1, g2_a2, g2_cross)``.

    ``2|c20|^2/|c10|^4``, ``2|c02|^2/|c01|^4`` and ``|c11|^2/(|c10|^2 |c01|^2)``.
    """
    a = amps or amplitudes(params)
    p10, p01 = abs(a.c10) ** 2, abs(a.c01) ** 2
    if not abs(a.c10) > AMPLITUDE_THRESHOLD:
        raise UndefinedCorrelationError(f"|c10| = {abs(a.c10):.3e}; g2 of mode 1 undefined")
    if not abs(a.c01) > AMPLITUDE_THRESHOLD:
        raise UndefinedCorrelationError(f"|c01| = {abs(a.c01):.3e}; g2 of mode 2 undefined")
    return (
        2 * abs(a.c20) ** 2 / p10**2,
        2 * abs(a.c02) ** 2 / p01**2,
        abs(a.c11) ** 2 / (p10 * p01),
    )


def analytic_photon_numbers(params: ModelParams, amps: AmplitudeSet | None = None) -> tuple[float, float]:
    """``<n1>, <n2>`` of the truncated wavefunction with ``c00 = 1``."""
    a = amps or amplitudes(params)
    n1 = abs(a.c10) ** 2 + abs(a.c11) ** 2 + 2 * abs(a.c20) ** 2
    n2 = abs(a.c01) ** 2 + abs(a.c11) ** 2 + 2 * abs(a.c02) ** 2
    return n1, n2


def analytic_csi(params: ModelParams, amps: AmplitudeSet | None = None) -> float:
    """Cauchy-Schwarz ratio ``|c11|^2 / (2 |c20| |c02|)``."""
    a = amps or amplitudes(params)
    if not (abs(a.c20) > TWO_PHOTON_THRESHOLD and abs(a.c02) > TWO_PHOTON_THRESHOLD):
        raise UndefinedCorrelationError(
            f"|c20| = {abs(a.c20):.3e}, |c02| = {abs(a.c02):.3e}; CSI ratio undefined"
        )
    return abs(a.c11) ** 2 / (2 * abs(a.c20) * abs(a.c02))


def analytic_chsh(
    params: ModelParams,
    amps: AmplitudeSet | None = None,
    *,
    cross_term: str = "phase",
) -> float:
    """CHSH value of the two-photon manifold.

    ``|2|c20|^2 + 2|c02|^2 - X - 4|c11|^2| / (sqrt(2) (|c20|^2+|c02|^2+|c11|^2))``
    with ``X = 4 Re(conj(c20) c02)`` (``cross_term="phase"``, what the
    normally ordered correlators give) or ``X = 4 |c20||c02|``
    (``cross_term="modulus"``).
    """
    a = amps or amplitudes(params)
    p20, p02, p11 = abs(a.c20) ** 2, abs(a.c02) ** 2, abs(a.c11) ** 2
    norm = p20 + p02 + p11
    if not norm > MANIFOLD_THRESHOLD:
        raise UndefinedCorrelationError("two-photon manifold is empty; CHSH undefined")
    if cross_term == "phase":
        cross = 4 * (np.conj(a.c20) * a.c02).real
    elif cross_term == "modulus":
        cross = 4 * abs(a.c20) * abs(a.c02)
    else:
        raise ValueError(f"cross_term must be 'phase' or 'modulus', got {cross_term!r}")
    return abs(2 * p20 + 2 * p02 - cross - 4 * p11) / (SQRT2 * norm)


def blockade_condition_residual(params: ModelParams) -> complex:
    """Residual of the optimal-blockade condition; zero marks the analytic blockade point.

    ``(D1 - 2U1 - i k1/2)(D1 + D2 - U1 - U2 - i(k1+k2)/2) - (E1/J)^2 (D2 - U2 - i k2/2)``
    """
    if params.j_hop == 0:
        raise ValueError("blockade condition needs J != 0")
    p = params
    left = (p.delta1 - 2 * p.u1 - 0.5j * p.kappa1) * (
        p.delta1 + p.delta2 - p.u1 - p.u2 - 0.5j * (p.kappa1 + p.kappa2)
    )
    return complex(left - (p.e1 / p.j_hop) ** 2 * (p.delta2 - p.u2 - 0.5j * p.kappa2))
