"""Truncated two-mode Fock space.

Two-mode kets |n_a, n_b> are flattened row-major with mode b fastest, so
``index = n_a * (n_max_b + 1) + n_b``. Partial transposes and subspace
extraction rely on this layout, so it must not change.

Operators and density matrices are plain ``numpy`` complex arrays of shape
``(D, D)``; :class:`TruncatedSpace` carries the cutoffs they refer to.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class TruncatedSpace:
    """Per-mode photon cutoffs (inclusive) of the two-mode Fock space."""

    n_max_a: int = 5
    n_max_b: int = 5

    def __post_init__(self):
        for mode, n_max in (("a", self.n_max_a), ("b", self.n_max_b)):
            if int(n_max) != n_max or n_max < 2:
                raise ValueError(
                    f"cutoff for mode {mode} must be an integer >= 2, got {n_max!r}"
                )

    @property
    def dim_a(self) -> int:
        return self.n_max_a + 1

    @property
    def dim_b(self) -> int:
        return self.n_max_b + 1

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    def index(self, n_a: int, n_b: int) -> int:
        return basis_index(n_a, n_b, self)

    def pair(self, index: int) -> tuple[int, int]:
        return basis_pair(index, self)

    def labels(self) -> list[tuple[int, int]]:
        return [self.pair(k) for k in range(self.dim)]

    def ket(self, n_a: int, n_b: int) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(n_a, n_b)] = 1.0
        return psi

    def projector(self, n_a: int, n_b: int) -> np.ndarray:
        psi = self.ket(n_a, n_b)
        return np.outer(psi, psi.conj())

    # Two-mode ladder operators, built once per space.
    @cached_property
    def a(self) -> np.ndarray:
        return tensor_product(annihilation_matrix(self.dim_a), np.eye(self.dim_b), self)

    @cached_property
    def b(self) -> np.ndarray:
        return tensor_product(np.eye(self.dim_a), annihilation_matrix(self.dim_b), self)

    @cached_property
    def n_a(self) -> np.ndarray:
        return self.a.conj().T @ self.a

    @cached_property
    def n_b(self) -> np.ndarray:
        return self.b.conj().T @ self.b


def basis_index(n_a: int, n_b: int, space: TruncatedSpace) -> int:
    """Flat index of |n_a, n_b>."""
    if not 0 <= n_a <= space.n_max_a:
        raise IndexError(f"mode a photon count {n_a} outside [0, {space.n_max_a}]")
    if not 0 <= n_b <= space.n_max_b:
        raise IndexError(f"mode b photon count {n_b} outside [0, {space.n_max_b}]")
    return n_a * space.dim_b + n_b


def basis_pair(index: int, space: TruncatedSpace) -> tuple[int, int]:
    if not 0 <= index < space.dim:
        raise IndexError(f"basis index {index} outside [0, {space.dim})")
    n_a, n_b = divmod(index, space.dim_b)
    return n_a, n_b


def annihilation_matrix(dim: int) -> np.ndarray:
    """Single-mode lowering operator with <n-1|a|n> = sqrt(n)."""
    if dim < 1:
        raise ValueError(f"single-mode dimension must be >= 1, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def number_matrix(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def tensor_product(A: np.ndarray, B: np.ndarray, space: TruncatedSpace) -> np.ndarray:
    """Two-mode operator A (mode a) x B (mode b) in the flat basis."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != (space.dim_a, space.dim_a):
        raise ValueError(f"mode-a operator has shape {A.shape}, expected {(space.dim_a,) * 2}")
    if B.shape != (space.dim_b, space.dim_b):
        raise ValueError(f"mode-b operator has shape {B.shape}, expected {(space.dim_b,) * 2}")
    # np.kron puts the second factor on the fast index, matching basis_index.
    return np.kron(A, B).astype(complex)


def hermiticity_residual(M: np.ndarray) -> float:
    return float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0


def hermitize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.conj().T)


def hermitian_eigensystem(
    H: np.ndarray, tol: float = HERMITIAN_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and unitary eigenvectors of a Hermitian matrix.

    Raises ``ValueError`` if ``H`` deviates from Hermitian by more than ``tol``
    in any entry.
    """
    H = np.asarray(H)
    residual = hermiticity_residual(H)
    if residual > tol:
        raise ValueError(f"matrix is not Hermitian (max |H - H^dag| = {residual:.3e})")
    return np.linalg.eigh(hermitize(H))


def density_violations(
    rho: np.ndarray,
    herm_tol: float = HERMITIAN_TOL,
    trace_tol: float = 1e-8,
    eig_floor: float = -1e-7,
) -> list[str]:
    """Empty list if ``rho`` is a valid density matrix, otherwise the reasons."""
    problems = []
    residual = hermiticity_residual(rho)
    if residual > herm_tol:
        problems.append(f"hermiticity residual {residual:.3e} > {herm_tol:.0e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        problems.append(f"trace {tr.real:.12g}{tr.imag:+.3g}j differs from 1 by > {trace_tol:.0e}")
    lam_min = float(np.linalg.eigvalsh(hermitize(rho))[0])
    if lam_min < eig_floor:
        problems.append(f"minimum eigenvalue {lam_min:.3e} < {eig_floor:.0e}")
    return problems
