"""Intensity-correlation CHSH test and Bell-state fidelities for two optical modes.

The two cavity fields are mixed by rotations

    A+ =  cos(th) a1 + sin(th) a2      B+ = cos(ph) a1 - sin(ph) a2
    A- = -sin(th) a1 + cos(th) a2      B- = sin(ph) a1 + cos(ph) a2

and the correlation ``E(th, ph)`` is the normally ordered intensity-difference
correlation normalized by the total coincidence rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .correlations import UndefinedCorrelationError, spec_for
from .hilbert import HilbertSpec, dag, destroy, embed, expect, mode_destroy

SQRT2 = math.sqrt(2.0)
MANIFOLD_THRESHOLD = 1e-15
BELL_LABELS = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")


@dataclass(frozen=True)
class AngleSet:
    theta: float = 0.0
    theta_prime: float = math.pi / 4
    phi: float = math.pi / 8
    phi_prime: float = 3 * math.pi / 8


@dataclass(frozen=True)
class NormalMoments:
    """Normally ordered second moments entering the CHSH correlator."""

    n11: float  # <a1^dag2 a1^2>
    n22: float  # <a2^dag2 a2^2>
    n12: float  # <a1^dag a2^dag a2 a1>
    m12: complex  # <a1^dag2 a2^2>
    zx: float  # <:(n1 - n2)(a1^dag a2 + a2^dag a1):>

    @property
    def zz(self) -> float:
        return self.n11 + self.n22 - 2 * self.n12

    @property
    def xx(self) -> float:
        return 2 * self.m12.real + 2 * self.n12

    @property
    def total(self) -> float:
        return self.n11 + self.n22 + 2 * self.n12


def normal_moments(rho: np.ndarray, spec: HilbertSpec | None = None) -> NormalMoments:
    spec = spec_for(rho, spec)
    a1 = mode_destroy(spec, "a1")
    a2 = mode_destroy(spec, "a2")
    c1, c2 = dag(a1), dag(a2)
    e = lambda op: expect(op, rho)  # noqa: E731
    zx = (
        e(c1 @ c1 @ a1 @ a2) + e(c1 @ c2 @ a1 @ a1)
        - e(c1 @ c2 @ a2 @ a2) - e(c2 @ c2 @ a2 @ a1)
    )
    return NormalMoments(
        n11=e(c1 @ c1 @ a1 @ a1).real,
        n22=e(c2 @ c2 @ a2 @ a2).real,
        n12=e(c1 @ c2 @ a2 @ a1).real,
        m12=e(c1 @ c1 @ a2 @ a2),
        zx=zx.real,
    )


def _correlator(m: NormalMoments, theta: float, phi: float) -> float:
    if not m.total > MANIFOLD_THRESHOLD:
        raise UndefinedCorrelationError(
            f"two-photon coincidence rate {m.total:.3e} vanishes; CHSH correlator undefined"
        )
    c2t, s2t = math.cos(2 * theta), math.sin(2 * theta)
    c2p, s2p = math.cos(2 * phi), math.sin(2 * phi)
    num = (
        m.zz * c2t * c2p
        - m.xx * s2t * s2p
        - m.zx * c2t * s2p
        + m.zx * s2t * c2p
    )
    return num / m.total


def chsh_correlator(
    rho: np.ndarray, theta: float, phi: float, spec: HilbertSpec | None = None
) -> float:
    """Normalized intensity correlation ``E(theta, phi)`` in ``[-1, 1]``."""
    return _correlator(normal_moments(rho, spec), theta, phi)


def chsh_from_state(
    rho: np.ndarray, angles: AngleSet | None = None, spec: HilbertSpec | None = None
) -> float:
    """``|E(th,ph) + E(th',ph') + E(th',ph) - E(th,ph')|``."""
    ang = angles or AngleSet()
    m = normal_moments(rho, spec)
    return abs(
        _correlator(m, ang.theta, ang.phi)
        + _correlator(m, ang.theta_prime, ang.phi_prime)
        + _correlator(m, ang.theta_prime, ang.phi)
        - _correlator(m, ang.theta, ang.phi_prime)
    )


def chsh_closed_form(rho: np.ndarray, spec: HilbertSpec | None = None) -> float:
    """CHSH value at the standard angles written directly in mode moments."""
    m = normal_moments(rho, spec)
    if not m.total > MANIFOLD_THRESHOLD:
        raise UndefinedCorrelationError("two-photon coincidence rate vanishes")
    num = m.n11 + m.n22 - 2 * m.m12.real - 4 * m.n12
    return SQRT2 * abs(num / m.total)


@dataclass
class TransformationReport:
    theta: float
    phi: float
    residuals: dict[str, float] = field(default_factory=dict)
    tol: float = 1e-13

    @property
    def ok(self) -> bool:
        return all(r <= self.tol for r in self.residuals.values())


def mode_transformation_check(theta: float, phi: float, cutoff: int = 3, tol: float = 1e-13) -> TransformationReport:
    """Verify the sum and difference rules of the rotated detection modes.

    Checked as matrix identities on a two-mode space of the given cutoff:
    ``A+^dag A+ + A-^dag A- = n1 + n2`` (same for B) and the difference forms
    ``(n1-n2) cos 2th + X sin 2th`` and ``(n1-n2) cos 2ph - X sin 2ph`` with
    ``X = a1^dag a2 + a2^dag a1``.
    """
    spec = HilbertSpec.optical(cutoff)
    a1 = embed(destroy(cutoff), 0, spec)
    a2 = embed(destroy(cutoff), 1, spec)
    ct, st, cp, sp_ = math.cos(theta), math.sin(theta), math.cos(phi), math.sin(phi)
    ap, am = ct * a1 + st * a2, -st * a1 + ct * a2
    bp, bm = cp * a1 - sp_ * a2, sp_ * a1 + cp * a2
    n = lambda x: dag(x) @ x  # noqa: E731
    z = n(a1) - n(a2)
    x = dag(a1) @ a2 + dag(a2) @ a1
    dist = lambda p, q: float(np.max(np.abs(p - q)))  # noqa: E731
    report = TransformationReport(theta, phi, tol=tol)
    report.residuals = {
        "A_sum": dist(n(ap) + n(am), n(a1) + n(a2)),
        "B_sum": dist(n(bp) + n(bm), n(a1) + n(a2)),
        "A_difference": dist(n(ap) - n(am), z * math.cos(2 * theta) + x * math.sin(2 * theta)),
        "B_difference": dist(n(bp) - n(bm), z * math.cos(2 * phi) - x * math.sin(2 * phi)),
    }
    return report


def bell_state(which: str, spec: HilbertSpec | None = None) -> np.ndarray:
    """Bell ket in the photon-number qubit ``{|0>, |1>}`` of each mode."""
    spec = spec or HilbertSpec.optical(2)
    if min(spec.mode_dims[:2]) < 2:
        raise ValueError("Bell states need optical cutoffs >= 2")
    pairs = {
        "phi_plus": (((0, 0), 1), ((1, 1), 1)),
        "phi_minus": (((0, 0), 1), ((1, 1), -1)),
        "psi_plus": (((0, 1), 1), ((1, 0), 1)),
        "psi_minus": (((0, 1), 1), ((1, 0), -1)),
    }
    if which not in pairs:
        raise ValueError(f"unknown Bell state {which!r}; choose from {BELL_LABELS}")
    extra = (0,) * (len(spec.mode_dims) - 2)
    psi = np.zeros(spec.dim, dtype=complex)
    for occ, sign in pairs[which]:
        psi[spec.basis_index(occ + extra)] = sign / SQRT2
    return psi


def bell_fidelity(rho: np.ndarray, which: str, spec: HilbertSpec | None = None) -> float:
    """``<B| rho |B>`` without renormalizing to the two-qubit subspace."""
    spec = spec_for(rho, spec)
    psi = bell_state(which, spec)
    return float(np.real(psi.conj() @ rho @ psi))


def qubit_subspace_weight(rho: np.ndarray, spec: HilbertSpec | None = None) -> float:
    spec = spec_for(rho, spec)
    idx = [spec.basis_index((i, j)) for i in (0, 1) for j in (0, 1)]
    return float(np.real(np.trace(rho[np.ix_(idx, idx)])))


def bell_fidelity_renormalized(rho: np.ndarray, which: str, spec: HilbertSpec | None = None) -> float:
    """Bell overlap divided by the weight of the ``n <= 1`` two-qubit block."""
    w = qubit_subspace_weight(rho, spec)
    if not w > 0:
        raise UndefinedCorrelationError("state has no weight in the two-qubit subspace")
    return bell_fidelity(rho, which, spec) / w


def bell_fidelities(rho: np.ndarray, spec: HilbertSpec | None = None) -> dict[str, float]:
    return {label: bell_fidelity(rho, label, spec) for label in BELL_LABELS}
