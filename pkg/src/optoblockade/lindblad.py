"""Liouvillian construction, time evolution and steady states.

Density matrices are vectorized by column stacking, ``vec(rho)[i + j*d] = rho[i, j]``,
so that ``vec(A rho B) = (B^T kron A) vec(rho)``.
"""

from __future__ import annotations

import math
import warnings
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .hilbert import InvalidDimensionError, dag

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-9
POSITIVITY_TOL = -1e-8
STATIONARY_TOL = 1e-10
DEFAULT_DT = 0.01
MAX_CONDITION = 1e12
MIN_STEP = 1e-12


class InvariantError(ValueError):
    """A density matrix broke trace, Hermiticity or positivity bounds."""


class StepSizeError(RuntimeError):
    """Adaptive step control shrank the step below ``MIN_STEP``."""


class SteadyStateError(RuntimeError):
    """No unique stationary state could be extracted from a Liouvillian."""


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = _side(v.shape[0])
    return v.reshape(dim, dim, order="F")


def _side(n: int) -> int:
    d = math.isqrt(n)
    if d * d != n:
        raise InvalidDimensionError(f"superoperator size {n} is not a perfect square")
    return d


def trace_row(dim: int) -> np.ndarray:
    """Row vector ``w`` with ``w @ vec(rho) = Tr rho``."""
    return vec(np.eye(dim, dtype=complex))


def liouvillian(
    h: np.ndarray,
    collapses: Sequence[tuple[np.ndarray, float]] = (),
    *,
    sparse: bool = False,
):
    """Generator ``L`` with ``d/dt vec(rho) = L vec(rho)``.

    ``L = -i(I kron H - H^T kron I) + sum_k r_k [conj(A) kron A - (I kron A^dag A)/2 - ((A^dag A)^T kron I)/2]``.
    With ``sparse=True`` a CSR matrix is returned; the dense form of a
    225-dimensional system would not fit in memory.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InvalidDimensionError(f"Hamiltonian must be square, got {h.shape}")
    d = h.shape[0]
    for op, _ in collapses:
        if np.shape(op) != (d, d):
            raise InvalidDimensionError(
                f"collapse operator shape {np.shape(op)} does not match Hamiltonian {h.shape}"
            )
    if sparse:
        kron, eye, conv = sp.kron, sp.identity(d, dtype=complex, format="csr"), sp.csr_matrix
    else:
        kron, eye, conv = np.kron, np.eye(d, dtype=complex), np.asarray
    hh = conv(h)
    L = -1j * (kron(eye, hh) - kron(hh.T, eye))
    for op, rate in collapses:
        if rate == 0:
            continue
        a = conv(op)
        ada = conv(dag(np.asarray(op)))
        ada = ada @ a
        L = L + rate * (kron(a.conj(), a) - 0.5 * kron(eye, ada) - 0.5 * kron(ada.T, eye))
    return L.tocsr() if sparse else np.ascontiguousarray(L)


def apply(l, rho: np.ndarray) -> np.ndarray:
    """``L[rho]`` as a matrix."""
    return unvec(l @ vec(rho), rho.shape[0])


def check_density_matrix(rho: np.ndarray, *, where: str = "") -> None:
    """Raise :class:`InvariantError` unless ``rho`` is a valid density matrix."""
    rho = np.asarray(rho)
    tag = f" ({where})" if where else ""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvariantError(f"density matrix must be square, got {rho.shape}{tag}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITICITY_TOL:
        raise InvariantError(f"Hermiticity violated by {herm:.3e}{tag}")
    tr = np.trace(rho)
    if abs(tr - 1) > TRACE_TOL:
        raise InvariantError(f"trace is {tr:.12g}, expected 1{tag}")
    lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
    if lam < POSITIVITY_TOL:
        raise InvariantError(f"smallest eigenvalue {lam:.3e} below {POSITIVITY_TOL}{tag}")


def clamped_eigenvalues(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues with roundoff negatives set to zero, for reporting only."""
    return np.clip(np.linalg.eigvalsh((rho + rho.conj().T) / 2), 0.0, None)


def _rk4_map(l: np.ndarray, h: float) -> np.ndarray:
    # one classic RK4 step of a linear ODE is the degree-4 Taylor polynomial of exp(hL)
    x = h * l
    out = np.eye(l.shape[0], dtype=complex)
    term = np.eye(l.shape[0], dtype=complex)
    for k in range(1, 5):
        term = term @ x / k
        out += term
    return out


def _rk4_step(l, y: np.ndarray, h: float) -> np.ndarray:
    k1 = l @ y
    k2 = l @ (y + 0.5 * h * k1)
    k3 = l @ (y + 0.5 * h * k2)
    k4 = l @ (y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _substeps(span: float, dt: float) -> tuple[int, float]:
    n = max(1, math.ceil(span / dt - 1e-9))
    return n, span / n


def propagate(
    v0: np.ndarray,
    l,
    t_grid: Sequence[float],
    *,
    dt: float = DEFAULT_DT,
    adaptive: bool = False,
    tol: float = 1e-8,
) -> np.ndarray:
    """Integrate ``dv/dt = L v`` and return ``v`` at every grid time.

    Works on any vector, including non-physical ones such as the conditioned
    operators used for delayed correlations. ``t_grid`` must start at 0 and
    increase strictly.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d sequence")
    if t[0] != 0.0:
        raise ValueError(f"t_grid must start at 0, got {t[0]}")
    if np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    y = np.asarray(v0, dtype=complex).copy()
    out = np.empty((t.size, y.size), dtype=complex)
    out[0] = y
    dense = isinstance(l, np.ndarray)
    maps: dict[float, np.ndarray] = {}
    for k in range(1, t.size):
        span = t[k] - t[k - 1]
        if adaptive:
            y = _adaptive_interval(l, y, span, dt, tol)
        else:
            n, h = _substeps(span, dt)
            if dense:
                key = round(h, 15)
                if key not in maps:
                    maps[key] = _rk4_map(l, h)
                m = maps[key]
                for _ in range(n):
                    y = m @ y
            else:
                for _ in range(n):
                    y = _rk4_step(l, y, h)
        out[k] = y
    return out


def _adaptive_interval(l, y, span, dt, tol):
    t, h = 0.0, min(dt, span)
    while t < span - 1e-15:
        h = min(h, span - t)
        full = _rk4_step(l, y, h)
        half = _rk4_step(l, _rk4_step(l, y, h / 2), h / 2)
        err = np.max(np.abs(full - half))
        if err > tol:
            h /= 2
            if h < MIN_STEP:
                raise StepSizeError(f"step size fell below {MIN_STEP} at t+{t:.6g}")
            continue
        y = half
        t += h
        h = min(2 * h, dt)
    return y


def evolve(
    rho0: np.ndarray,
    l,
    t_grid: Sequence[float],
    *,
    dt: float = DEFAULT_DT,
    adaptive: bool = False,
    tol: float = 1e-8,
) -> list[np.ndarray]:
    """Density matrices ``rho(t_k)`` under the Liouvillian ``l``.

    Every snapshot is checked against the density-matrix invariants; a breach
    raises :class:`InvariantError` naming the offending time.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    check_density_matrix(rho0, where="initial state")
    d = rho0.shape[0]
    if l.shape != (d * d, d * d):
        raise InvalidDimensionError(
            f"Liouvillian shape {l.shape} does not match state dimension {d}"
        )
    traj = propagate(vec(rho0), l, t_grid, dt=dt, adaptive=adaptive, tol=tol)
    states = []
    for t, v in zip(np.asarray(t_grid, dtype=float), traj):
        rho = unvec(v, d)
        check_density_matrix(rho, where=f"t={t:.6g}")
        states.append(rho)
    return states


def steady_state(l) -> np.ndarray:
    """Unique stationary density matrix of ``l``.

    One row of ``L`` is replaced by the trace functional and the system is
    solved directly. If that system is ill-conditioned the null eigenvector of
    ``L`` is used instead; several null eigenvalues raise :class:`SteadyStateError`.
    """
    n = l.shape[0]
    d = _side(n)
    b = np.zeros(n, dtype=complex)
    b[0] = 1.0
    if sp.issparse(l):
        m = sp.vstack([sp.csr_matrix(trace_row(d)[None, :]), sp.csr_matrix(l)[1:]]).tocsc()
        try:
            x = spla.splu(m).solve(b)
        except RuntimeError as exc:
            raise SteadyStateError(f"replaced Liouvillian is singular: {exc}") from None
    else:
        m = np.array(l, dtype=complex)
        m[0, :] = trace_row(d)
        try:
            with warnings.catch_warnings():
                # singularity is detected below through the condition estimate
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu, piv = sla.lu_factor(m, check_finite=False)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise SteadyStateError(str(exc)) from None
        anorm = np.max(np.sum(np.abs(m), axis=0))
        rcond, info = sla.lapack.zgecon(lu, anorm)
        if info == 0 and rcond > 1.0 / MAX_CONDITION:
            x = sla.lu_solve((lu, piv), b, check_finite=False)
        else:
            x = _null_vector(l, d)
    rho = unvec(x, d)
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.trace(rho).real
    resid = np.max(np.abs(l @ vec(rho)))
    if not resid < STATIONARY_TOL:
        raise SteadyStateError(f"steady-state residual {resid:.3e} exceeds {STATIONARY_TOL}")
    check_density_matrix(rho, where="steady state")
    return rho


def _null_vector(l: np.ndarray, d: int) -> np.ndarray:
    w, v = np.linalg.eig(l)
    zero = np.flatnonzero(np.abs(w) < 1e-8)
    if zero.size != 1:
        raise SteadyStateError(
            f"Liouvillian has {zero.size} eigenvalues with |lambda| < 1e-8; "
            "the stationary state is not unique"
        )
    x = v[:, zero[0]]
    tr = trace_row(d) @ x
    if abs(tr) < 1e-14:
        raise SteadyStateError("null eigenvector is traceless")
    return x / tr


def stationarity_residual(l, rho: np.ndarray) -> float:
    """``max |L vec(rho)|``."""
    return float(np.max(np.abs(l @ vec(rho))))
