"""Hamiltonians and dissipators of two coupled, driven optomechanical cavities.

All rates are in units of the optical decay rate (kappa = 1 by default).
The effective model replaces the mechanics by a Kerr term ``-U (a^dag a)^2``
with ``U = g^2 / omega_m``; the lab-frame model keeps both mechanical modes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields, replace

import numpy as np

from .hilbert import HilbertSpec, dag, destroy, embed

#: mechanical quality factor omega_m / gamma used when gamma is not given
DEFAULT_MECHANICAL_Q = 1e6


class ValidityWarning(UserWarning):
    """The effective Kerr description is used outside omega_m > g."""


@dataclass(frozen=True)
class ModelParams:
    delta1: float = 0.0
    delta2: float = 0.0
    u1: float = 0.09
    u2: float = 0.09
    j_hop: float = 1.5
    e1: float = 0.1
    e2: float = 0.01
    theta1: float = 0.0
    theta2: float = 0.0
    kappa1: float = 1.0
    kappa2: float = 1.0
    gamma: float | None = None  # None -> omega_m / DEFAULT_MECHANICAL_Q
    n_th: float = 0.0
    omega_m: float = 100.0
    g_om: float = 3.0
    include_mechanics: bool = False

    def __post_init__(self):
        if self.gamma is None:
            object.__setattr__(self, "gamma", self.omega_m / DEFAULT_MECHANICAL_Q)
        for name in ("kappa1", "kappa2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.n_th < 0:
            raise ValueError(f"n_th must be >= 0, got {self.n_th}")
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v}")
        if self.include_mechanics and not self.omega_m > self.g_om:
            raise ValueError(
                f"omega_m={self.omega_m} must exceed g_om={self.g_om} "
                "for the mechanical model to map onto a Kerr interaction"
            )

    @classmethod
    def from_optomechanics(cls, g_om: float, omega_m: float, **kwargs) -> "ModelParams":
        """Parameters with ``u1 = u2 = g_om**2 / omega_m``."""
        u = effective_kerr_u(g_om, omega_m)
        return cls(u1=u, u2=u, g_om=g_om, omega_m=omega_m, **kwargs)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def swapped(self) -> "ModelParams":
        """Exchange the roles of cavity 1 and cavity 2."""
        return replace(
            self,
            delta1=self.delta2, delta2=self.delta1,
            u1=self.u2, u2=self.u1,
            e1=self.e2, e2=self.e1,
            theta1=self.theta2, theta2=self.theta1,
            kappa1=self.kappa2, kappa2=self.kappa1,
        )

    @property
    def drive1(self) -> complex:
        return self.e1 * np.exp(1j * self.theta1)

    @property
    def drive2(self) -> complex:
        return self.e2 * np.exp(1j * self.theta2)


def effective_kerr_u(g_om: float, omega_m: float) -> float:
    """Kerr coefficient ``g^2 / omega_m`` left after eliminating the mechanics.

    Warns with :class:`ValidityWarning` when ``omega_m <= g_om``.
    """
    if not omega_m > 0:
        raise ValueError(f"omega_m must be > 0, got {omega_m}")
    if omega_m <= g_om:
        warnings.warn(
            f"omega_m={omega_m} <= g={g_om}: effective Kerr model not valid",
            ValidityWarning,
            stacklevel=2,
        )
    return g_om**2 / omega_m


def drive_amplitude_from_power(power: float, kappa: float, omega_laser: float) -> float:
    """Drive amplitude ``sqrt(P kappa / omega_L)`` for input power ``P``."""
    for name, v in (("power", power), ("kappa", kappa), ("omega_laser", omega_laser)):
        if not v > 0:
            raise ValueError(f"{name} must be > 0, got {v}")
    return math.sqrt(power * kappa / omega_laser)


def bose_occupation(omega_m: float, temperature_ratio: float) -> float:
    """Thermal phonon number ``1/(exp(omega_m/T) - 1)``, with T in the same units as omega_m."""
    if temperature_ratio <= 0:
        return 0.0
    return 1.0 / math.expm1(omega_m / temperature_ratio)


def _optical_ops(spec: HilbertSpec):
    try:
        i1, i2 = spec.index("a1"), spec.index("a2")
    except KeyError as exc:
        raise ValueError(f"expected optical modes a1 and a2: {exc}") from None
    a1 = embed(destroy(spec.mode_dims[i1]), i1, spec)
    a2 = embed(destroy(spec.mode_dims[i2]), i2, spec)
    return a1, a2


def _optical_part(params: ModelParams, a1: np.ndarray, a2: np.ndarray, kerr: bool):
    h = np.zeros_like(a1)
    for a, delta, u, drive in (
        (a1, params.delta1, params.u1, params.drive1),
        (a2, params.delta2, params.u2, params.drive2),
    ):
        n = dag(a) @ a
        h += delta * n
        if kerr:
            h -= u * (n @ n)
        h += drive * dag(a) + np.conj(drive) * a
    h += params.j_hop * (dag(a1) @ a2 + dag(a2) @ a1)
    return h


def build_effective_hamiltonian(params: ModelParams, spec: HilbertSpec) -> np.ndarray:
    """Two-mode Kerr Hamiltonian in the frame rotating at the laser frequency.

    ``sum_j [D_j n_j - U_j n_j^2 + E_j e^{i th_j} a_j^dag + h.c.] + J (a1^dag a2 + h.c.)``.
    The decoupled mechanical energy is left out.
    """
    if len(spec.mode_dims) != 2:
        raise ValueError(
            f"effective model needs exactly two optical modes, got {len(spec.mode_dims)}"
        )
    a1, a2 = _optical_ops(spec)
    h = _optical_part(params, a1, a2, kerr=True)
    return (h + dag(h)) / 2


def build_lab_hamiltonian(params: ModelParams, spec: HilbertSpec) -> np.ndarray:
    """Rotating-frame Hamiltonian with both mechanical modes kept explicitly."""
    if len(spec.mode_dims) != 4:
        raise ValueError(
            f"lab-frame model needs modes a1, a2, b1, b2; got {spec.mode_labels}"
        )
    if not params.include_mechanics:
        raise ValueError("lab-frame model requires include_mechanics=True")
    a1, a2 = _optical_ops(spec)
    h = _optical_part(params, a1, a2, kerr=False)
    for a, label in ((a1, "b1"), (a2, "b2")):
        i = spec.index(label)
        b = embed(destroy(spec.mode_dims[i]), i, spec)
        h += params.omega_m * (dag(b) @ b)
        h -= params.g_om * (dag(a) @ a) @ (b + dag(b))
    return (h + dag(h)) / 2


def collapse_operators(
    params: ModelParams, spec: HilbertSpec
) -> list[tuple[np.ndarray, float]]:
    """``(operator, rate)`` pairs; channels with zero rate are dropped."""
    a1, a2 = _optical_ops(spec)
    ops = [(a1, params.kappa1), (a2, params.kappa2)]
    if params.include_mechanics:
        for label in ("b1", "b2"):
            i = spec.index(label)
            b = embed(destroy(spec.mode_dims[i]), i, spec)
            ops.append((b, (params.n_th + 1) * params.gamma))
            ops.append((dag(b), params.n_th * params.gamma))
    return [(op, float(rate)) for op, rate in ops if rate > 0]


def default_spec(params: ModelParams, optical_cutoff: int = 5, phonon_cutoff: int = 3) -> HilbertSpec:
    if params.include_mechanics:
        return HilbertSpec.lab(optical_cutoff, phonon_cutoff)
    return HilbertSpec.optical(optical_cutoff)


def build_hamiltonian(params: ModelParams, spec: HilbertSpec) -> np.ndarray:
    if params.include_mechanics:
        return build_lab_hamiltonian(params, spec)
    return build_effective_hamiltonian(params, spec)
