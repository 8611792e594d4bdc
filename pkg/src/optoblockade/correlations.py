"""Photon statistics of two-mode density matrices."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .hilbert import HilbertSpec, dag, expect, mode_destroy
from .lindblad import propagate, stationarity_residual, unvec, vec

#: photon numbers below this make every normalized correlator undefined
PHOTON_THRESHOLD = 1e-12
IMAG_TOL = 1e-10
STATIONARY_INPUT_TOL = 1e-8


class UndefinedCorrelationError(ArithmeticError):
    """A normalized correlator would divide by a vanishing photon number."""


@dataclass(frozen=True)
class CorrelationReport:
    n1: float
    n2: float
    g2_a1: float
    g2_a2: float
    g2_cross: float
    csi: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def spec_for(rho: np.ndarray, spec: HilbertSpec | None) -> HilbertSpec:
    """Use ``spec`` or assume two equal optical modes."""
    if spec is not None:
        if spec.dim != rho.shape[0]:
            raise ValueError(f"state dim {rho.shape[0]} does not match spec dim {spec.dim}")
        return spec
    d = math.isqrt(rho.shape[0])
    if d * d != rho.shape[0]:
        raise ValueError("pass a HilbertSpec for states that are not two equal modes")
    return HilbertSpec.optical(d)


def _label(spec: HilbertSpec, mode) -> str:
    if isinstance(mode, str):
        spec.index(mode)
        return mode
    if not 0 <= mode < len(spec.mode_dims):
        raise IndexError(f"mode {mode} out of range for {len(spec.mode_dims)} modes")
    return spec.mode_labels[mode]


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > IMAG_TOL:
        raise ValueError(f"{what} has imaginary part {z.imag:.3e}")
    return z.real


def mean_photon(rho: np.ndarray, mode=0, spec: HilbertSpec | None = None) -> float:
    spec = spec_for(rho, spec)
    a = mode_destroy(spec, _label(spec, mode))
    return _real(expect(dag(a) @ a, rho), "<n>")


def _require_photons(n: float, label: str) -> None:
    if not n > PHOTON_THRESHOLD:
        raise UndefinedCorrelationError(
            f"<n_{label}> = {n:.3e} is below {PHOTON_THRESHOLD}; correlation undefined"
        )


def g2_auto(rho: np.ndarray, mode=0, spec: HilbertSpec | None = None) -> float:
    """``<a^dag a^dag a a> / <a^dag a>^2``."""
    spec = spec_for(rho, spec)
    label = _label(spec, mode)
    a = mode_destroy(spec, label)
    ad = dag(a)
    n = _real(expect(ad @ a, rho), "<n>")
    _require_photons(n, label)
    return _real(expect(ad @ ad @ a @ a, rho), "<a^dag2 a^2>") / n**2


def g2_cross(rho: np.ndarray, mode_i=0, mode_j=1, spec: HilbertSpec | None = None) -> float:
    """``<a_i^dag a_j^dag a_j a_i> / (<n_i> <n_j>)``."""
    spec = spec_for(rho, spec)
    li, lj = _label(spec, mode_i), _label(spec, mode_j)
    if li == lj:
        raise ValueError("g2_cross needs two different modes")
    ai, aj = mode_destroy(spec, li), mode_destroy(spec, lj)
    ni = _real(expect(dag(ai) @ ai, rho), "<n_i>")
    nj = _real(expect(dag(aj) @ aj, rho), "<n_j>")
    _require_photons(ni, li)
    _require_photons(nj, lj)
    num = _real(expect(dag(ai) @ dag(aj) @ aj @ ai, rho), "<a_i^dag a_j^dag a_j a_i>")
    return num / (ni * nj)


def csi_witness(rho: np.ndarray, spec: HilbertSpec | None = None) -> float:
    """Cauchy-Schwarz ratio ``g2_cross / sqrt(g2_a1 g2_a2)``; values above 1 are nonclassical."""
    g1 = g2_auto(rho, 0, spec)
    g2 = g2_auto(rho, 1, spec)
    gx = g2_cross(rho, 0, 1, spec)
    return _csi(g1, g2, gx)


def _csi(g1: float, g2: float, gx: float) -> float:
    prod = g1 * g2
    if not prod > 0:
        raise UndefinedCorrelationError(
            f"autocorrelation product {prod:.3e} vanishes; Cauchy-Schwarz ratio undefined"
        )
    return gx / math.sqrt(prod)


def photon_covariance(rho: np.ndarray, spec: HilbertSpec | None = None) -> float:
    """``<n1 n2> - <n1><n2>``."""
    spec = spec_for(rho, spec)
    a1, a2 = mode_destroy(spec, spec.mode_labels[0]), mode_destroy(spec, spec.mode_labels[1])
    n1, n2 = dag(a1) @ a1, dag(a2) @ a2
    return _real(expect(n1 @ n2, rho) - expect(n1, rho) * expect(n2, rho), "covariance")


def correlation_report(rho: np.ndarray, spec: HilbertSpec | None = None) -> CorrelationReport:
    g1 = g2_auto(rho, 0, spec)
    g2 = g2_auto(rho, 1, spec)
    gx = g2_cross(rho, 0, 1, spec)
    return CorrelationReport(
        n1=mean_photon(rho, 0, spec),
        n2=mean_photon(rho, 1, spec),
        g2_a1=g1,
        g2_a2=g2,
        g2_cross=gx,
        csi=_csi(g1, g2, gx),
    )


def g2_tau(
    rho_ss: np.ndarray,
    l,
    mode,
    tau_grid: Sequence[float],
    spec: HilbertSpec | None = None,
    *,
    dt: float = 0.01,
) -> np.ndarray:
    """Delayed autocorrelation from the quantum regression theorem.

    ``g2(tau) = Tr[n exp(L tau)(a rho a^dag)] / <n>^2``; the conditioned
    operator is propagated unnormalized and divided once at the end.
    """
    spec = spec_for(rho_ss, spec)
    resid = stationarity_residual(l, rho_ss)
    if resid > STATIONARY_INPUT_TOL:
        raise ValueError(f"rho_ss is not stationary under l (residual {resid:.3e})")
    label = _label(spec, mode)
    a = mode_destroy(spec, label)
    ad = dag(a)
    n = _real(expect(ad @ a, rho_ss), "<n>")
    _require_photons(n, label)
    conditioned = a @ rho_ss @ ad
    traj = propagate(vec(conditioned), l, tau_grid, dt=dt)
    num = ad @ a
    d = rho_ss.shape[0]
    return np.array([expect(num, unvec(v, d)).real for v in traj]) / n**2
