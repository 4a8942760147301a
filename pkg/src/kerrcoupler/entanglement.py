"""Two-qubit reductions of the two-mode state and their entanglement.

A :class:`QubitSubspace` picks two photon numbers per mode; the reduced 4x4
matrix uses the basis order (la0 lb0), (la0 lb1), (la1 lb0), (la1 lb1), so
``a14`` is the coherence between |la0 lb0> and |la1 lb1> and ``a23`` the one
between |la0 lb1> and |la1 lb0>. Matrix elements below are quoted 1-based in
that layout (``a14`` is ``entries[0, 3]``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .fock import TruncatedSpace

DEGENERATE_TRACE = 1e-10
EIGEN_CLIP = 1e-12
CLASSIFY_REL_TOL = 1e-8
BORDER_TOL = 1e-12


class Convention(enum.Enum):
    paper = "paper"  # maximally entangled two-qubit state -> 1
    standard = "standard"  # (||rho^TA||_1 - 1) / 2, maximally entangled -> 1/2

    @property
    def scale(self) -> float:
        return 2.0 if self is Convention.paper else 1.0


@dataclass(frozen=True)
class QubitSubspace:
    levels_a: tuple[int, int]
    levels_b: tuple[int, int]

    def __post_init__(self):
        for mode, lv in (("a", self.levels_a), ("b", self.levels_b)):
            if len(lv) != 2 or not lv[0] < lv[1] or lv[0] < 0:
                raise ValueError(f"mode {mode} levels must be two increasing photon numbers, got {lv!r}")
        object.__setattr__(self, "levels_a", tuple(self.levels_a))
        object.__setattr__(self, "levels_b", tuple(self.levels_b))

    @classmethod
    def from_name(cls, name: str) -> "QubitSubspace":
        """Parse a label such as ``"0220"``: the pair of kets |0,2> and |2,0>."""
        digits = name.strip("{}")
        if len(digits) != 4 or not digits.isdigit():
            raise ValueError(f"subspace label must be four digits, got {name!r}")
        n = [int(c) for c in digits]
        return cls(tuple(sorted((n[0], n[2]))), tuple(sorted((n[1], n[3]))))

    @property
    def name(self) -> str:
        (a0, a1), (b0, b1) = self.levels_a, self.levels_b
        return f"{a0}{b1}{a1}{b0}"

    def labels(self) -> list[tuple[int, int]]:
        return [(x, y) for x in self.levels_a for y in self.levels_b]

    def indices(self, space: TruncatedSpace) -> list[int]:
        if self.levels_a[1] > space.n_max_a or self.levels_b[1] > space.n_max_b:
            raise ValueError(f"subspace {{{self.name}}} does not fit the cutoffs ({space.n_max_a}, {space.n_max_b})")
        return [space.index(*label) for label in self.labels()]


@dataclass(frozen=True)
class ReducedState:
    entries: np.ndarray
    raw_trace: float
    renormalized: bool
    degenerate: bool = False

    def a(self, k: int, l: int) -> complex:
        """1-based matrix element a_kl."""
        return self.entries[k - 1, l - 1]


class XForm(enum.Enum):
    A1 = "A1"
    A2 = "A2"
    Ph1 = "Ph1"
    Ph2 = "Ph2"
    general = "general"


# Entries allowed to be nonzero in each X form (0-based).
_ALLOWED = {
    XForm.Ph1: {(0, 0), (3, 3), (0, 3), (3, 0)},
    XForm.Ph2: {(1, 1), (2, 2), (1, 2), (2, 1)},
    XForm.A1: {(0, 0), (1, 1), (2, 2), (3, 3), (0, 3), (3, 0)},
    XForm.A2: {(0, 0), (1, 1), (2, 2), (3, 3), (0, 3), (3, 0), (1, 2), (2, 1)},
}
_ZERO_MASK = {
    form: np.array([[(r, c) not in allowed for c in range(4)] for r in range(4)])
    for form, allowed in _ALLOWED.items()
}


@dataclass(frozen=True)
class XClass:
    form: XForm
    residual: float

    @property
    def code(self) -> str:
        return self.form.value


class EventKind(enum.Enum):
    sudden_death = "sudden_death"
    rebirth = "rebirth"
    delayed_birth = "delayed_birth"


@dataclass(frozen=True)
class Event:
    kind: EventKind
    death_time: float | None = None
    birth_time: float | None = None

    @property
    def time(self) -> float:
        return self.death_time if self.kind is EventKind.sudden_death else self.birth_time


@dataclass
class NegativitySeries:
    """Negativity of one subspace sampled on a uniform time grid.

    ``margins`` optionally holds the signed PT margin (see :func:`pt_margin`),
    which lets :func:`detect_events` tell a finite-time death from a value
    that merely decays below the threshold.
    """

    times: np.ndarray
    values: np.ndarray
    convention: Convention = Convention.paper
    subspace: str = ""
    margins: np.ndarray | None = None
    events: list[Event] = field(default_factory=list)


def reduce_to_qubits(
    rho: np.ndarray, sub: QubitSubspace, space: TruncatedSpace, renormalize: bool = True
) -> ReducedState:
    idx = sub.indices(space)
    block = np.array(rho[np.ix_(idx, idx)], dtype=complex)
    raw_trace = float(np.trace(block).real)
    degenerate = raw_trace <= DEGENERATE_TRACE
    if renormalize and not degenerate:
        return ReducedState(block / raw_trace, raw_trace, True, False)
    return ReducedState(block, raw_trace, False, degenerate)


def partial_transpose(red: ReducedState | np.ndarray) -> np.ndarray:
    """Transpose on the mode-a qubit; also accepts stacks of shape (..., 4, 4)."""
    m = red.entries if isinstance(red, ReducedState) else np.asarray(red)
    lead = m.shape[:-2]
    return m.reshape(lead + (2, 2, 2, 2)).swapaxes(-4, -2).reshape(lead + (4, 4))


def pt_eigenvalues(red: ReducedState | np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of the partial transpose (stack-aware)."""
    pt = partial_transpose(red)
    return np.linalg.eigvalsh(0.5 * (pt + np.swapaxes(pt, -1, -2).conj()))


def negativity(red: ReducedState, convention: Convention | str = Convention.paper) -> float:
    convention = Convention(convention)
    if isinstance(red, ReducedState) and red.degenerate:
        return 0.0
    lam = pt_eigenvalues(red)
    return convention.scale * float(-np.sum(lam[lam < -EIGEN_CLIP]))


def pt_margin(red: ReducedState, convention: Convention | str = Convention.paper) -> float:
    """-scale * (smallest PT eigenvalue); positive iff the reduction is NPT."""
    if isinstance(red, ReducedState) and red.degenerate:
        return 0.0
    return -Convention(convention).scale * float(pt_eigenvalues(red)[0])


def _entries(red: ReducedState | np.ndarray) -> np.ndarray:
    return red.entries if isinstance(red, ReducedState) else np.asarray(red)


def form_residual(red: ReducedState | np.ndarray, form: XForm):
    """Largest |entry| among those the form requires to vanish (stack-aware)."""
    m = _entries(red)
    res = np.max(np.abs(m[..., _ZERO_MASK[form]]), axis=-1)
    return float(res) if np.ndim(res) == 0 else res


def x_classify(red: ReducedState | np.ndarray, tol: float | None = None) -> XClass:
    """Most restrictive X form the matrix fits: Ph1, Ph2, A1, A2, else general."""
    m = _entries(red)
    if tol is None:
        tol = CLASSIFY_REL_TOL * max(abs(np.trace(m)), np.finfo(float).tiny)
    for form in (XForm.Ph1, XForm.Ph2, XForm.A1, XForm.A2):
        residual = form_residual(m, form)
        if residual <= tol:
            return XClass(form, residual)
    return XClass(XForm.general, form_residual(m, XForm.A2))


def _x_elements(m: np.ndarray):
    a11, a22, a33, a44 = np.real(np.diagonal(m))
    p14 = float((m[0, 3] * m[3, 0]).real)
    p23 = float((m[1, 2] * m[2, 1]).real)
    return a11, a22, a33, a44, p14, p23


def eigs_analytic(
    red: ReducedState | np.ndarray, form: XClass | XForm | str, tol: float | None = None
) -> np.ndarray:
    """Closed-form PT eigenvalues (lambda_1..lambda_4) of an X-form matrix."""
    form = form.form if isinstance(form, XClass) else XForm(form)
    m = _entries(red)
    if form is XForm.general:
        raise ValueError("no closed form for a general two-qubit matrix")
    if tol is None:
        tol = CLASSIFY_REL_TOL * max(abs(np.trace(m)), np.finfo(float).tiny)
    residual = form_residual(m, form)
    if residual > tol:
        raise ValueError(f"matrix is not of form {form.value} (residual {residual:.3e})")
    a11, a22, a33, a44, p14, p23 = _x_elements(m)
    if form is XForm.A1:
        root = np.sqrt(max((a22 - a33) ** 2 + 4.0 * p14, 0.0))
        return np.array([a11, 0.5 * (a22 + a33 - root), 0.5 * (a22 + a33 + root), a44])
    if form is XForm.A2:
        root_b = np.sqrt(max(a11**2 + a44**2 - 2.0 * (a11 * a44 - 2.0 * p23), 0.0))
        root_a = np.sqrt(max(a22**2 + a33**2 - 2.0 * (a22 * a33 - 2.0 * p14), 0.0))
        return np.array([
            0.5 * (a11 + a44 - root_b),
            0.5 * (a11 + a44 + root_b),
            0.5 * (a22 + a33 - root_a),
            0.5 * (a22 + a33 + root_a),
        ])
    if form is XForm.Ph1:
        c = np.sqrt(max(p14, 0.0))
        return np.array([-c, c, a11, a44])
    c = np.sqrt(max(p23, 0.0))
    return np.array([-c, c, a22, a33])


def _relation(x: float, y: float, tol: float) -> str:
    if abs(x - y) <= tol:
        return "="
    return ">" if x > y else "<"


@dataclass(frozen=True)
class EsdReport:
    """Population/coherence products governing zero negativity of X states.

    ``border_a`` compares a22*a33 with a14*a41, ``border_b`` compares
    a11*a44 with a23*a32; each relation string reads populations-vs-coherences.
    ``huang_zhu`` is True when all four populations are nonzero, the
    precondition for finite-time death under pure dephasing.
    """

    pop_a: float
    coh_a: float
    border_a: str
    pop_b: float
    coh_b: float
    border_b: str
    diag_product: float
    huang_zhu: bool


def esd_conditions(red: ReducedState | np.ndarray, tol: float = BORDER_TOL) -> EsdReport:
    a11, a22, a33, a44, p14, p23 = _x_elements(_entries(red))
    pop_a, pop_b = a22 * a33, a11 * a44
    diag = a11 * a22 * a33 * a44
    return EsdReport(
        pop_a, p14, _relation(pop_a, p14, tol),
        pop_b, p23, _relation(pop_b, p23, tol),
        diag, abs(diag) > tol,
    )


def _runs(mask: np.ndarray) -> list[tuple[int, int, bool]]:
    if len(mask) == 0:
        return []
    edges = np.flatnonzero(np.diff(mask.astype(np.int8))) + 1
    starts = np.concatenate(([0], edges))
    ends = np.concatenate((edges, [len(mask)]))
    return [(int(s), int(e), bool(mask[s])) for s, e in zip(starts, ends)]


def entangled_mask(
    values: np.ndarray, threshold: float, margins: np.ndarray | None = None
) -> np.ndarray:
    """Per-sample entangled verdict.

    Without margins this is ``values > threshold``. With margins a sample is
    entangled above ``+threshold``, separable below ``-threshold`` and keeps
    the previous verdict inside the band, so a negativity decaying towards zero
    never counts as a death.
    """
    values = np.asarray(values, dtype=float)
    if margins is None:
        return values > threshold
    margins = np.asarray(margins, dtype=float)
    out = np.empty(len(margins), dtype=bool)
    state = bool(len(values) and values[0] > threshold)
    for k, m in enumerate(margins):
        if m > threshold:
            state = True
        elif m < -threshold:
            state = False
        out[k] = state
    return out


def detect_events(
    series: NegativitySeries,
    threshold: float = 1e-6,
    min_gap: int = 100,
    min_width: int | None = None,
) -> list[Event]:
    """Sudden deaths, rebirths and delayed births in a negativity series.

    Separable stretches shorter than ``min_gap`` samples between entangled
    stretches are zero crossings, not deaths. A death needs a separable
    stretch of at least ``min_gap`` samples after it; a delayed birth needs
    the series to start with one. Interior entangled stretches shorter than
    ``min_width`` samples can optionally be discarded as flickers; by default
    every entangled sample counts.
    """
    if min_width is None:
        min_width = 1
    t = np.asarray(series.times, dtype=float)
    mask = entangled_mask(series.values, threshold, series.margins)
    n = len(mask)
    for s, e, up in _runs(mask):
        if not up and s > 0 and e < n and e - s < min_gap:
            mask[s:e] = True
    for s, e, up in _runs(mask):
        if up and s > 0 and e < n and e - s < min_width:
            mask[s:e] = False

    events: list[Event] = []
    last_death = None
    seen_entangled = False
    runs = _runs(mask)
    for k, (s, e, up) in enumerate(runs):
        if up:
            if s > 0:
                if seen_entangled:
                    events.append(Event(EventKind.rebirth, last_death, float(t[s])))
                elif runs[k - 1][1] - runs[k - 1][0] >= min_gap:
                    events.append(Event(EventKind.delayed_birth, None, float(t[s])))
            seen_entangled = True
        elif seen_entangled and e - s >= min_gap:
            last_death = float(t[s])
            events.append(Event(EventKind.sudden_death, last_death, None))
    series.events = events
    return events
