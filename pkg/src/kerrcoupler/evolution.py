"""Closed and damped time evolution of the two-mode density matrix.

Damped runs integrate the master equation with classic fixed-step RK4. For a
time-independent generator L, one RK4 step of size h is exactly the map
``1 + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24``; :func:`integrate_master` builds
L as a superoperator, restricts it to the matrix elements reachable from the
initial state (all others stay exactly zero), and applies the stride-th power
of the step map between samples. :func:`rk4_step` is the same scheme written
on matrices and is kept as the reference path.
"""

from __future__ import annotations

import enum
import logging
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .fock import TruncatedSpace, hermitian_eigensystem, hermitize, hermiticity_residual

log = logging.getLogger(__name__)

TRACE_DRIFT_LIMIT = 1e-6
EIGENVALUE_FLOOR = -1e-7
MAX_DT = 0.01


class ReservoirKind(enum.Enum):
    none = "none"
    amplitude = "amplitude"
    phase = "phase"


@dataclass(frozen=True)
class ReservoirSpec:
    kind: ReservoirKind = ReservoirKind.none
    gamma_a: float = 0.005
    gamma_b: float = 0.005
    nbar_a: float = 0.0
    nbar_b: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ReservoirKind(self.kind))
        for name in ("gamma_a", "gamma_b", "nbar_a", "nbar_b"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 1500.0
    sample_stride: int = 100
    method: str = "rk4_fixed"

    def __post_init__(self):
        if not self.dt > 0 or not self.t_end > 0:
            raise ValueError("dt and t_end must be positive")
        if self.dt > MAX_DT:
            raise ValueError(f"dt = {self.dt} exceeds the accuracy guard {MAX_DT}")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise ValueError("sample_stride must be an integer >= 1")
        if self.method != "rk4_fixed":
            raise ValueError(f"unknown integration method {self.method!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


class IntegrationError(RuntimeError):
    """Integration aborted; carries the step and time of the failure."""

    def __init__(self, message: str, step: int, time: float):
        super().__init__(f"{message} (step {step}, t = {time:.6g})")
        self.step = step
        self.time = time


class _StateSeries(Sequence):
    # Density matrices rebuilt on demand from the packed nonzero entries.
    def __init__(self, packed: np.ndarray, support: np.ndarray, dim: int):
        self._packed = packed
        self._support = support
        self._dim = dim

    def __len__(self):
        return len(self._packed)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return [self[j] for j in range(*k.indices(len(self)))]
        flat = np.zeros(self._dim * self._dim, dtype=complex)
        flat[self._support] = self._packed[k]
        return flat.reshape(self._dim, self._dim)


@dataclass
class Trajectory:
    """Sampled density matrices with per-sample diagnostics.

    ``trace_log`` holds the trace before renormalization, ``leak_log`` the
    population outside ``tracked`` (by default the population on the top Fock
    level of either mode), ``herm_log`` the hermiticity residual before the
    hermitization pass and ``min_eig_log`` the smallest eigenvalue.
    """

    times: np.ndarray
    packed: np.ndarray
    support: np.ndarray
    space: TruncatedSpace
    trace_log: np.ndarray
    leak_log: np.ndarray
    herm_log: np.ndarray = field(default=None)
    min_eig_log: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.times)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        for name in ("packed", "trace_log", "leak_log"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length does not match times")

    @property
    def states(self) -> Sequence:
        return _StateSeries(self.packed, self.support, self.space.dim)

    def populations(self) -> np.ndarray:
        """Diagonal of every sample, shape (n_samples, D)."""
        D = self.space.dim
        diag = np.arange(D) * (D + 1)
        pos = np.full(D * D, -1)
        pos[self.support] = np.arange(len(self.support))
        out = np.zeros((len(self.times), D))
        present = pos[diag] >= 0
        out[:, present] = self.packed[:, pos[diag][present]].real
        return out


def unitary_propagator(H: np.ndarray, t: float) -> np.ndarray:
    lam, V = hermitian_eigensystem(H)
    return (V * np.exp(-1j * lam * t)) @ V.conj().T


def _edge_labels(space: TruncatedSpace) -> list[tuple[int, int]]:
    return [(x, y) for x in range(space.n_max_a) for y in range(space.n_max_b)]


def leakage(rho: np.ndarray, tracked: Iterable[tuple[int, int]], space: TruncatedSpace) -> float:
    """1 - total population of the ``tracked`` basis states."""
    idx = [space.index(*label) for label in tracked]
    return float(1.0 - np.sum(np.real(np.diagonal(rho)[idx])))


def evolve_closed(
    rho0: np.ndarray,
    H: np.ndarray,
    times: Sequence[float],
    space: TruncatedSpace,
    tracked: Iterable[tuple[int, int]] | None = None,
) -> Trajectory:
    """rho(t) = U(t) rho0 U(t)^dag with U from the eigensystem of H."""
    times = np.asarray(times, dtype=float)
    tracked = list(tracked) if tracked is not None else _edge_labels(space)
    lam, V = hermitian_eigensystem(H)
    rho_eig = V.conj().T @ rho0 @ V
    D = space.dim
    packed = np.empty((len(times), D * D), dtype=complex)
    traces = np.empty(len(times))
    leaks = np.empty(len(times))
    for k, t in enumerate(times):
        phase = np.exp(-1j * lam * t)
        rho = V @ (phase[:, None] * rho_eig * phase.conj()[None, :]) @ V.conj().T
        packed[k] = rho.ravel()
        traces[k] = np.trace(rho).real
        leaks[k] = leakage(rho, tracked, space)
    return Trajectory(times, packed, np.arange(D * D), space, traces, leaks)


def _check_kind(res: ReservoirSpec, kind: ReservoirKind):
    if res.kind is not kind:
        raise ValueError(f"reservoir kind {res.kind.value!r} does not match {kind.value!r} RHS")


def lindblad_rhs_amplitude(
    rho: np.ndarray, H: np.ndarray, res: ReservoirSpec, space: TruncatedSpace
) -> np.ndarray:
    """Amplitude-damping master equation with thermal occupations.

    The thermal part is written with the anticommutator of (c+c + c c+)/2,
    which equals the one-sided form ``-c+c rho - rho c c+`` whenever
    [c, c+] = 1 and keeps the right-hand side Hermitian in the truncated space.
    """
    _check_kind(res, ReservoirKind.amplitude)
    out = -1j * (H @ rho - rho @ H)
    for c, gamma, nbar in ((space.a, res.gamma_a, res.nbar_a), (space.b, res.gamma_b, res.nbar_b)):
        cd = c.conj().T
        n = cd @ c
        out += gamma * (c @ rho @ cd - 0.5 * (rho @ n + n @ rho))
        if nbar:
            m = 0.5 * (n + c @ cd)
            out += nbar * gamma * (cd @ rho @ c + c @ rho @ cd - m @ rho - rho @ m)
    return out


def lindblad_rhs_phase(
    rho: np.ndarray, H: np.ndarray, res: ReservoirSpec, space: TruncatedSpace
) -> np.ndarray:
    """Phase-damping master equation.

    With diagonal number operators the dissipator 2 n rho n - n^2 rho - rho n^2
    is an entrywise damping of rho_mn by (n_m - n_n)^2, applied here directly
    so that populations are left exactly untouched.
    """
    _check_kind(res, ReservoirKind.phase)
    return -1j * (H @ rho - rho @ H) - _dephasing_rates(res, space) * rho


def _dephasing_rates(res: ReservoirSpec, space: TruncatedSpace) -> np.ndarray:
    # Rate matrix r_mn with d rho_mn/dt = -r_mn rho_mn from the dissipator.
    rates = np.zeros((space.dim, space.dim))
    for n, gamma, nbar in ((space.n_a, res.gamma_a, res.nbar_a), (space.n_b, res.gamma_b, res.nbar_b)):
        occ = np.diagonal(n).real
        rates += 0.5 * gamma * (nbar + 1.0) * (occ[:, None] - occ[None, :]) ** 2
    return rates


def lindblad_rhs(
    rho: np.ndarray, H: np.ndarray, res: ReservoirSpec, space: TruncatedSpace
) -> np.ndarray:
    """Dispatch on ``res.kind``; ``none`` is the bare commutator."""
    if res.kind is ReservoirKind.amplitude:
        return lindblad_rhs_amplitude(rho, H, res, space)
    if res.kind is ReservoirKind.phase:
        return lindblad_rhs_phase(rho, H, res, space)
    return -1j * (H @ rho - rho @ H)


def rk4_step(rho: np.ndarray, dt: float, rhs: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    k1 = rhs(rho)
    k2 = rhs(rho + 0.5 * dt * k1)
    k3 = rhs(rho + 0.5 * dt * k2)
    k4 = rhs(rho + dt * k3)
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def liouvillian(H: np.ndarray, res: ReservoirSpec, space: TruncatedSpace) -> np.ndarray:
    """Superoperator L with vec(drho/dt) = L vec(rho), row-major vec."""
    D = space.dim
    eye = np.eye(D)

    def left(A):
        return np.kron(A, eye)

    def right(B):
        return np.kron(eye, B.T)

    def sandwich(A, B):
        return np.kron(A, B.T)

    L = -1j * (left(H) - right(H))
    if res.kind is ReservoirKind.amplitude:
        for c, gamma, nbar in ((space.a, res.gamma_a, res.nbar_a), (space.b, res.gamma_b, res.nbar_b)):
            cd = c.conj().T
            n = cd @ c
            L += gamma * (sandwich(c, cd) - 0.5 * (right(n) + left(n)))
            if nbar:
                m = 0.5 * (n + c @ cd)
                L += nbar * gamma * (sandwich(cd, c) + sandwich(c, cd) - left(m) - right(m))
    elif res.kind is ReservoirKind.phase:
        L -= np.diag(_dephasing_rates(res, space).ravel())
    return L


def reachable_support(L: np.ndarray, seed: np.ndarray, dim: int) -> np.ndarray:
    """Sorted flat indices reachable from ``seed`` under L, closed under transpose."""
    coupled = L != 0
    reach = np.zeros(L.shape[0], dtype=bool)
    reach[seed] = True
    transpose = np.arange(dim * dim).reshape(dim, dim).T.ravel()
    while True:
        grown = reach | coupled[:, reach].any(axis=1)
        grown |= grown[transpose]
        if np.array_equal(grown, reach):
            return np.flatnonzero(reach)
        reach = grown


def _rk4_map(L: np.ndarray, dt: float) -> np.ndarray:
    hL = dt * L
    term = np.eye(L.shape[0], dtype=complex)
    T = term.copy()
    for k in range(1, 5):
        term = term @ hL / k
        T += term
    return T


def integrate_master(
    rho0: np.ndarray,
    H: np.ndarray,
    res: ReservoirSpec,
    cfg: IntegratorConfig,
    space: TruncatedSpace,
    tracked: Iterable[tuple[int, int]] | None = None,
) -> Trajectory:
    """Fixed-step RK4 integration of the selected master equation.

    At every sample the state is hermitized, its raw trace logged and then
    renormalized to one. Raises :class:`IntegrationError` when the trace
    drifts by more than 1e-6 between samples or an eigenvalue falls below
    -1e-7.
    """
    D = space.dim
    tracked_idx = [space.index(*t) for t in (list(tracked) if tracked is not None else _edge_labels(space))]
    L = liouvillian(H, res, space)
    vec0 = np.asarray(rho0, dtype=complex).ravel()
    support = reachable_support(L, np.flatnonzero(vec0), D)
    L_s = L[np.ix_(support, support)]
    step = _rk4_map(L_s, cfg.dt)
    stride = int(cfg.sample_stride)
    n_steps = cfg.n_steps
    n_full, remainder = divmod(n_steps, stride)
    sample_steps = [k * stride for k in range(n_full + 1)]
    if remainder:
        sample_steps.append(n_steps)
    maps = {stride: np.linalg.matrix_power(step, stride)}
    if remainder:
        maps[remainder] = np.linalg.matrix_power(step, remainder)
    log.debug("integrating %d steps on %d of %d matrix elements", n_steps, len(support), D * D)

    n = len(sample_steps)
    packed = np.empty((n, len(support)), dtype=complex)
    traces = np.empty(n)
    leaks = np.empty(n)
    herms = np.empty(n)
    min_eigs = np.empty(n)
    flat = np.zeros(D * D, dtype=complex)
    v = vec0[support]
    for k, step_no in enumerate(sample_steps):
        if k:
            v = maps[step_no - sample_steps[k - 1]] @ v
        flat[support] = v
        rho = flat.reshape(D, D)
        tr = np.trace(rho)
        t = step_no * cfg.dt
        if abs(tr - 1.0) > TRACE_DRIFT_LIMIT:
            raise IntegrationError(f"trace drifted to {tr.real:.12g}; reduce dt or raise the cutoff", step_no, t)
        herms[k] = hermiticity_residual(rho)
        rho = hermitize(rho) / tr.real
        lam_min = float(np.linalg.eigvalsh(rho)[0])
        if lam_min < EIGENVALUE_FLOOR:
            raise IntegrationError(f"density matrix lost positivity (min eigenvalue {lam_min:.3e})", step_no, t)
        traces[k] = tr.real
        min_eigs[k] = lam_min
        leaks[k] = 1.0 - np.sum(np.diagonal(rho).real[tracked_idx])
        v = rho.ravel()[support]
        packed[k] = v
    times = np.asarray(sample_steps, dtype=float) * cfg.dt
    return Trajectory(times, packed, support, space, traces, leaks, herms, min_eigs)
