"""Hamiltonian, Bell kets and Werner-like initial states of the coupler."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .fock import TruncatedSpace


@dataclass(frozen=True)
class ModelParams:
    """Kerr nonlinearities and parametric pump strength, in units of chi."""

    chi_a: float = 1.0
    chi_b: float = 1.0
    g: complex = 0.6

    def __post_init__(self):
        if self.chi_a < 0 or self.chi_b < 0:
            raise ValueError("Kerr nonlinearities must be non-negative")


class BellFamily(enum.Enum):
    B1 = "B1"  # (|0,0> +- |i,i>)/sqrt(2)
    B2 = "B2"  # (|0,i> +- |i,0>)/sqrt(2)


class Sign(enum.Enum):
    plus = "plus"
    minus = "minus"

    @property
    def factor(self) -> float:
        return 1.0 if self is Sign.plus else -1.0


@dataclass(frozen=True)
class BellSpec:
    family: BellFamily = BellFamily.B1
    i: int = 1
    sign: Sign = Sign.plus

    def __post_init__(self):
        object.__setattr__(self, "family", BellFamily(self.family))
        object.__setattr__(self, "sign", Sign(self.sign))
        if self.i not in (1, 2):
            raise ValueError(f"Bell photon index must be 1 or 2, got {self.i!r}")

    def components(self) -> tuple[tuple[int, int], tuple[int, int]]:
        """The two basis labels carrying amplitude, in (first, signed) order."""
        if self.family is BellFamily.B1:
            return (0, 0), (self.i, self.i)
        return (0, self.i), (self.i, 0)

    def support(self) -> list[tuple[int, int]]:
        """The four two-qubit basis states spanned by the local levels {0, i}."""
        levels = (0, self.i)
        return [(x, y) for x in levels for y in levels]


@dataclass(frozen=True)
class WernerSpec:
    s: float = 1.0
    bell: BellSpec = field(default_factory=BellSpec)
    d: int = 2
    n: int = 2

    def __post_init__(self):
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"Werner weight s must lie in [0, 1], got {self.s!r}")
        if (self.d, self.n) != (2, 2):
            raise ValueError("only two-qubit Werner-like states (d = n = 2) are supported")


def build_hamiltonian(params: ModelParams, space: TruncatedSpace) -> np.ndarray:
    """(chi_a/2) a+^2 a^2 + (chi_b/2) b+^2 b^2 + g a+ b+ + g* a b."""
    a, b = space.a, space.b
    ad, bd = a.conj().T, b.conj().T
    g = complex(params.g)
    H = (
        0.5 * params.chi_a * (ad @ ad @ a @ a)
        + 0.5 * params.chi_b * (bd @ bd @ b @ b)
        + g * (ad @ bd)
        + g.conjugate() * (a @ b)
    )
    # Exact-zero the round-off so the operator is Hermitian bit for bit.
    return 0.5 * (H + H.conj().T)


def bell_ket(spec: BellSpec, space: TruncatedSpace) -> np.ndarray:
    if spec.i > min(space.n_max_a, space.n_max_b):
        raise ValueError(f"Bell index i={spec.i} exceeds the cutoff")
    first, second = spec.components()
    psi = (space.ket(*first) + spec.sign.factor * space.ket(*second)) / np.sqrt(2.0)
    return psi


def werner_density(spec: WernerSpec, space: TruncatedSpace) -> np.ndarray:
    """(1-s)/4 * (uniform mixture on the Bell levels) + s |B><B|."""
    psi = bell_ket(spec.bell, space)
    rho = spec.s * np.outer(psi, psi.conj())
    for label in spec.bell.support():
        k = space.index(*label)
        rho[k, k] += (1.0 - spec.s) / 4.0
    return rho


def coupling_chain(start: tuple[int, int], space: TruncatedSpace) -> list[tuple[int, int]]:
    """Orbit of ``start`` under repeated a+ b+ until either cutoff is hit."""
    n_a, n_b = start
    space.index(n_a, n_b)
    chain = []
    while n_a <= space.n_max_a and n_b <= space.n_max_b:
        chain.append((n_a, n_b))
        n_a, n_b = n_a + 1, n_b + 1
    return chain
