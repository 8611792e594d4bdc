"""Dense Fock-space operator algebra for a handful of truncated bosonic modes."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np


class InvalidDimensionError(ValueError):
    """Raised for truncation dimensions or operator shapes that do not fit."""


@dataclass(frozen=True)
class HilbertSpec:
    """Ordered per-mode truncation dimensions with matching labels.

    A mode of dimension ``d`` holds the Fock levels ``0 .. d-1``.
    """

    mode_dims: tuple[int, ...]
    mode_labels: tuple[str, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.mode_dims)
        labels = tuple(self.mode_labels)
        if not dims:
            raise InvalidDimensionError("a Hilbert space needs at least one mode")
        if len(labels) != len(dims):
            raise InvalidDimensionError(
                f"{len(dims)} mode dims but {len(labels)} labels"
            )
        if len(set(labels)) != len(labels):
            raise InvalidDimensionError(f"duplicate mode labels {labels}")
        for label, d in zip(labels, dims):
            if d < 2:
                raise InvalidDimensionError(f"mode {label!r} has dimension {d} < 2")
        object.__setattr__(self, "mode_dims", dims)
        object.__setattr__(self, "mode_labels", labels)

    @classmethod
    def optical(cls, cutoff: int = 5, cutoff2: int | None = None) -> "HilbertSpec":
        """Two optical modes ``a1, a2``."""
        return cls((cutoff, cutoff if cutoff2 is None else cutoff2), ("a1", "a2"))

    @classmethod
    def lab(cls, optical_cutoff: int = 3, phonon_cutoff: int = 3) -> "HilbertSpec":
        """Two optical plus two mechanical modes ``a1, a2, b1, b2``."""
        return cls(
            (optical_cutoff, optical_cutoff, phonon_cutoff, phonon_cutoff),
            ("a1", "a2", "b1", "b2"),
        )

    @property
    def dim(self) -> int:
        return int(np.prod(self.mode_dims))

    def index(self, label: str) -> int:
        try:
            return self.mode_labels.index(label)
        except ValueError:
            raise KeyError(f"no mode labelled {label!r} in {self.mode_labels}") from None

    def require_two_photon_levels(self, labels: Sequence[str] = ("a1", "a2")) -> None:
        """g2 needs the n=2 Fock level on every optical mode involved."""
        for label in labels:
            d = self.mode_dims[self.index(label)]
            if d < 3:
                raise InvalidDimensionError(
                    f"mode {label!r} has dimension {d}; two-photon correlators need >= 3"
                )

    def basis_index(self, occupations: Sequence[int]) -> int:
        """Flat index of the product Fock state ``|n_0, n_1, ...>``."""
        if len(occupations) != len(self.mode_dims):
            raise InvalidDimensionError("one occupation number per mode is required")
        for n, d in zip(occupations, self.mode_dims):
            if not 0 <= n < d:
                raise InvalidDimensionError(f"occupation {n} outside 0..{d - 1}")
        return int(np.ravel_multi_index(tuple(occupations), self.mode_dims))


def destroy(dim: int) -> np.ndarray:
    """Truncated bosonic lowering operator with ``a[n-1, n] = sqrt(n)``."""
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"ladder operators need dim >= 2, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def create(dim: int) -> np.ndarray:
    return destroy(dim).conj().T


def number(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def dag(op: np.ndarray) -> np.ndarray:
    return op.conj().T


def tensor(ops: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of ``ops`` in list order."""
    ops = list(ops)
    if not ops:
        raise ValueError("tensor() needs at least one operator")
    for op in ops:
        _check_square(op)
    return reduce(np.kron, ops).astype(complex, copy=False)


def embed(op: np.ndarray, mode_index: int, spec: HilbertSpec) -> np.ndarray:
    """Place a single-mode operator on mode ``mode_index``, identity elsewhere."""
    n_modes = len(spec.mode_dims)
    if not 0 <= mode_index < n_modes:
        raise IndexError(f"mode index {mode_index} out of range for {n_modes} modes")
    _check_square(op)
    if op.shape[0] != spec.mode_dims[mode_index]:
        raise InvalidDimensionError(
            f"operator of dim {op.shape[0]} does not fit mode {mode_index} "
            f"of dim {spec.mode_dims[mode_index]}"
        )
    factors = [identity(d) for d in spec.mode_dims]
    factors[mode_index] = np.asarray(op, dtype=complex)
    return tensor(factors)


def mode_destroy(spec: HilbertSpec, label: str) -> np.ndarray:
    """Lowering operator of the mode called ``label`` on the full space."""
    i = spec.index(label)
    return embed(destroy(spec.mode_dims[i]), i, spec)


def expect(op: np.ndarray, rho: np.ndarray) -> complex:
    """``Tr[op rho]``."""
    op = np.asarray(op)
    rho = np.asarray(rho)
    if op.shape != rho.shape or op.ndim != 2:
        raise InvalidDimensionError(
            f"operator shape {op.shape} does not match state shape {rho.shape}"
        )
    # Tr[A B] without forming the product
    return complex(np.einsum("ij,ji->", op, rho))


def basis(dim: int, n: int) -> np.ndarray:
    if not 0 <= n < dim:
        raise InvalidDimensionError(f"Fock level {n} outside 0..{dim - 1}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def fock_dm(spec: HilbertSpec, occupations: Sequence[int]) -> np.ndarray:
    """Projector onto the product Fock state ``|n_0, n_1, ...>``."""
    rho = np.zeros((spec.dim, spec.dim), dtype=complex)
    i = spec.basis_index(occupations)
    rho[i, i] = 1.0
    return rho


def ket2dm(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def coherent(dim: int, alpha: complex) -> np.ndarray:
    """Truncated coherent-state vector, renormalized after the cut."""
    n = np.arange(dim)
    log_fact = np.cumsum(np.log(np.maximum(n, 1)))
    amps = np.exp(-abs(alpha) ** 2 / 2 - 0.5 * log_fact) * np.power(complex(alpha), n)
    return amps / np.linalg.norm(amps)


def _check_square(op: np.ndarray) -> None:
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise InvalidDimensionError(f"operator must be square, got shape {op.shape}")


def partial_trace(rho: np.ndarray, spec: HilbertSpec, keep: Sequence[str]) -> np.ndarray:
    """Reduced density matrix on the modes ``keep`` (in spec order)."""
    keep_idx = sorted(spec.index(k) for k in keep)
    n = len(spec.mode_dims)
    t = np.asarray(rho).reshape(spec.mode_dims + spec.mode_dims)
    # trace out the highest-index modes first so remaining axis numbers stay valid
    for i in sorted(set(range(n)) - set(keep_idx), reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + m)
    d = int(np.prod([spec.mode_dims[i] for i in keep_idx]))
    return t.reshape(d, d)
