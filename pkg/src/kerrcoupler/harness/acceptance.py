"""Acceptance criteria, runnable from the CLI (``kerrcoupler check``) and pytest.

Each ``criterion_N`` returns a :class:`CriterionResult`; tolerances are the
fixed exit criteria and are not tuned per run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from ..entanglement import (
    EventKind,
    QubitSubspace,
    XForm,
    eigs_analytic,
    esd_conditions,
    negativity,
    pt_eigenvalues,
    reduce_to_qubits,
    x_classify,
)
from ..evolution import IntegratorConfig, ReservoirKind, ReservoirSpec, evolve_closed, integrate_master
from ..fock import TruncatedSpace
from ..model import BellSpec, ModelParams, WernerSpec, build_hamiltonian, werner_density
from .config import SEVEN_STATES, preset
from .runner import ScenarioResult, run_scenario


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.number}: {self.title}: {self.detail} ({self.seconds:.1f} s)"


@lru_cache(maxsize=64)
def run_preset(name: str, s: float | None = None, dt: float | None = None, stride: int | None = None) -> ScenarioResult:
    cfg = preset(name)
    if s is not None:
        cfg = cfg.with_s(s)
    if dt is not None or stride is not None:
        it = cfg.integrator
        cfg = replace(cfg, integrator=IntegratorConfig(dt or it.dt, it.t_end, stride or it.sample_stride))
    return run_scenario(cfg, write=False)


def _kinds(events) -> list[str]:
    return [e.kind.value for e in events]


def criterion_1() -> CriterionResult:
    """Initial negativity of every Werner-like state matches max(0, (3s-1)/2)."""
    space = TruncatedSpace()
    worst = 0.0
    for family in ("B1", "B2"):
        for i in (1, 2):
            bell = BellSpec(family, i)
            sub = QubitSubspace((0, i), (0, i))
            for s in (0.0, 0.1, 1 / 3, 0.5, 0.9, 1.0):
                rho = werner_density(WernerSpec(s, bell), space)
                n = negativity(reduce_to_qubits(rho, sub, space))
                worst = max(worst, abs(n - max(0.0, (3 * s - 1) / 2)))
    return CriterionResult(1, "Werner threshold oracle", worst <= 1e-10, f"max deviation {worst:.2e} (tol 1e-10)")


def random_x_matrix(form: XForm, rng: np.random.Generator) -> np.ndarray:
    """Random Hermitian matrix with the zero pattern of ``form``, unit trace."""
    m = np.zeros((4, 4), dtype=complex)
    diag = rng.random(4)
    if form is XForm.Ph1:
        diag[[1, 2]] = 0.0
    elif form is XForm.Ph2:
        diag[[0, 3]] = 0.0
    m[np.diag_indices(4)] = diag
    pairs = {XForm.A1: [(0, 3)], XForm.A2: [(0, 3), (1, 2)], XForm.Ph1: [(0, 3)], XForm.Ph2: [(1, 2)]}[form]
    for r, c in pairs:
        z = 0.6 * complex(rng.normal(), rng.normal())
        m[r, c] = z
        m[c, r] = z.conjugate()
    return m / np.trace(m).real


def _border_verdict(m: np.ndarray, form: XForm) -> bool:
    """True when the border conditions say the PT has no negative eigenvalue."""
    rep = esd_conditions(m, tol=0.0)
    ok_a = rep.pop_a >= rep.coh_a
    ok_b = rep.pop_b >= rep.coh_b
    if form is XForm.A1 or form is XForm.Ph1:
        return ok_a
    if form is XForm.Ph2:
        return ok_b
    return ok_a and ok_b


def criterion_2(n: int = 1000, seed: int = 20140613) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    mismatches = 0
    misclassified = 0
    for form in (XForm.A1, XForm.A2, XForm.Ph1, XForm.Ph2):
        for _ in range(n):
            m = random_x_matrix(form, rng)
            if x_classify(m).form is not form:
                misclassified += 1
            analytic = np.sort(eigs_analytic(m, form))
            worst = max(worst, float(np.max(np.abs(analytic - pt_eigenvalues(m)))))
            numeric_zero = negativity_of(m) == 0.0
            if numeric_zero != _border_verdict(m, form):
                mismatches += 1
    passed = worst <= 1e-10 and mismatches == 0 and misclassified == 0
    return CriterionResult(
        2, "X-state oracle equivalence", passed,
        f"4x{n} matrices, max |analytic - numeric| {worst:.2e} (tol 1e-10), "
        f"verdict mismatches {mismatches}, misclassified {misclassified}",
    )


def negativity_of(m: np.ndarray) -> float:
    from ..entanglement import ReducedState

    return negativity(ReducedState(m, float(np.trace(m).real), True))


def criterion_3() -> CriterionResult:
    space = TruncatedSpace()
    H0 = np.zeros((space.dim, space.dim), dtype=complex)
    rho = space.projector(1, 0)
    amp = ReservoirSpec(ReservoirKind.amplitude, 0.005, 0.005)
    traj = integrate_master(rho, H0, amp, IntegratorConfig(1e-3, 100.0, 1000), space)
    p10 = traj.states[-1][space.index(1, 0), space.index(1, 0)].real
    decay_err = abs(p10 - np.exp(-0.5))

    phase = ReservoirSpec(ReservoirKind.phase, 0.005, 0.005)
    rho_ph = werner_density(WernerSpec(0.5, BellSpec("B2", 2)), space)
    rng = np.random.default_rng(7)
    X = rng.normal(size=(space.dim, space.dim)) + 1j * rng.normal(size=(space.dim, space.dim))
    rho_rand = X @ X.conj().T
    rho_rand /= np.trace(rho_rand).real
    diag_drift = 0.0
    for r0 in (rho_ph, rho_rand):
        tr = integrate_master(r0, H0, phase, IntegratorConfig(1e-3, 100.0, 1000), space)
        pops = tr.populations()
        diag_drift = max(diag_drift, float(np.max(np.abs(pops - pops[0]))))

    coarse = run_preset("fig2", dt=2e-3, stride=50)
    fine = run_preset("fig2")
    halving = max(
        float(np.max(np.abs(coarse.analyses[k].negativity - fine.analyses[k].negativity)))
        for k in fine.analyses
    )
    passed = decay_err <= 1e-6 and diag_drift <= 1e-12 and halving < 1e-7
    return CriterionResult(
        3, "integrator correctness", passed,
        f"decay error {decay_err:.2e} (tol 1e-6), phase-damping diagonal drift {diag_drift:.2e} (tol 1e-12), "
        f"dt-halving negativity change {halving:.2e} (tol 1e-7)",
    )


def criterion_4() -> CriterionResult:
    parts = []
    passed = True
    for name in ("fig2", "fig3", "fig5a", "fig5b"):
        t0 = time.perf_counter()
        res = run_preset(name)
        elapsed = time.perf_counter() - t0
        traj = res.trajectory
        drift = float(np.max(np.abs(traj.trace_log - 1.0)))
        herm = float(np.max(traj.herm_log))
        lam = float(np.min(traj.min_eig_log))
        ok = drift < 1e-8 and herm < 1e-10 and lam > -1e-7 and elapsed < 180.0
        passed &= ok
        parts.append(f"{name}: drift {drift:.1e}, herm {herm:.1e}, min eig {lam:.1e}")
    return CriterionResult(4, "conservation suite", passed, "; ".join(parts))


def criterion_5() -> CriterionResult:
    wer = WernerSpec(0.1, BellSpec("B1", 1))
    times = np.linspace(0.0, 25.0, 2501)
    pops = {}
    leak = None
    for n_max in (5, 7):
        space = TruncatedSpace(n_max, n_max)
        H = build_hamiltonian(ModelParams(), space)
        traj = evolve_closed(werner_density(wer, space), H, times, space, tracked=SEVEN_STATES)
        p = traj.populations()
        pops[n_max] = np.stack([p[:, space.index(*lab)] for lab in SEVEN_STATES], axis=1)
        if n_max == 5:
            leak = float(np.max(traj.leak_log))
    diff = float(np.max(np.abs(pops[5] - pops[7])))
    passed = leak < 0.05 and diff < 1e-4
    return CriterionResult(
        5, "truncation claim (fig1)", passed,
        f"max leakage outside seven states {leak:.4f} (tol 0.05), cutoff 5 vs 7 population difference {diff:.2e} (tol 1e-4)",
    )


def criterion_6() -> CriterionResult:
    bad = []
    for s in (0.25, 0.5, 0.75, 1.0):
        ev = run_preset("fig2", s).events
        k1 = _kinds(ev["0110"])
        ok1 = "sudden_death" in k1 and "rebirth" not in k1
        k2 = _kinds(ev["0220"])
        ok2 = "sudden_death" in k2 and "rebirth" in k2[k2.index("sudden_death"):]
        if not (ok1 and ok2):
            bad.append(f"s={s}: N_0110 {k1}, N_0220 {k2}")
    return CriterionResult(
        6, "fig2 event structure", not bad,
        "all s in {0.25, 0.5, 0.75, 1}: N_0110 death without rebirth, N_0220 death then rebirth" if not bad else "; ".join(bad),
    )


def delayed_birth_first(events) -> bool:
    return bool(events) and events[0].kind is EventKind.delayed_birth


def fig3_crossover(grid=None) -> tuple[float | None, list[tuple[float, bool]]]:
    """Midpoint between the last delayed-birth s and the first s without one."""
    grid = grid if grid is not None else [round(0.01 * k, 2) for k in range(0, 31)]
    table = [(s, delayed_birth_first(run_preset("fig3", s).events["0220"])) for s in grid]
    for (s_lo, ok_lo), (s_hi, ok_hi) in zip(table, table[1:]):
        if ok_lo and not ok_hi:
            return 0.5 * (s_lo + s_hi), table
    return None, table


def criterion_7() -> CriterionResult:
    ev_low = run_preset("fig3", 0.1).events["0220"]
    ev_mid = run_preset("fig3", 0.5).events["0220"]
    k_mid = _kinds(ev_mid)
    ok_low = delayed_birth_first(ev_low)
    ok_mid = "delayed_birth" not in k_mid and "sudden_death" in k_mid and "rebirth" in k_mid[k_mid.index("sudden_death"):]
    crossover, table = fig3_crossover()
    ok_cross = crossover is not None and abs(crossover - 0.15) <= 0.02
    present = [s for s, ok in table if ok]
    detail = (
        f"s=0.1 N_0220 {_kinds(ev_low)}; s=0.5 N_0220 {k_mid}; "
        f"crossover {'none' if crossover is None else f'{crossover:.3f}'} (target 0.15 +- 0.02); "
        f"delayed birth at s in [{min(present) if present else '-'}, {max(present) if present else '-'}]"
    )
    return CriterionResult(7, "fig3 delayed birth", ok_low and ok_mid and ok_cross, detail)


def criterion_8() -> CriterionResult:
    bad = []
    for name, sub in (("fig5a", "0110"), ("fig5b", "0220")):
        for s in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9):
            res = run_preset(name, s)
            a = res.analyses[sub]
            hz = esd_conditions(a.blocks[0]).huang_zhu
            died = "sudden_death" in _kinds(a.events)
            if not (hz and died):
                bad.append(f"{name} s={s}: all-populations-nonzero {hz}, death {died}")
        a = run_preset(name, 1.0).analyses[sub]
        forms = set(a.forms[~a.degenerate])
        hz = esd_conditions(a.blocks[0]).huang_zhu
        died = "sudden_death" in _kinds(a.events)
        if forms != {XForm.Ph2.value} or hz or died:
            bad.append(f"{name} s=1: forms {sorted(forms)}, all-populations-nonzero {hz}, death {died}")
    detail = "s<1: populations nonzero and finite-time death; s=1: Ph2, zero populations, asymptotic decay" if not bad else "; ".join(bad)
    return CriterionResult(8, "fig5 dephasing death condition", not bad, detail)


def criterion_9() -> CriterionResult:
    a = run_preset("fig4").analyses["0110"]
    mask = a.forms == XForm.A1.value
    m = a.blocks[mask]
    coh = (m[:, 0, 3] * m[:, 3, 0]).real
    pop = m[:, 1, 1].real * m[:, 2, 2].real
    entangled = a.negativity[mask] > 0.0
    bad = int(np.sum(entangled != (coh > pop)))
    n = int(mask.sum())
    passed = n > 0 and bad == 0
    return CriterionResult(
        9, "fig4 coherence/population correlation", passed,
        f"{n} A1 samples of {len(mask)}, {int(entangled.sum())} entangled, counterexamples {bad}",
    )


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
}


def run_criterion(number: int) -> CriterionResult:
    t0 = time.perf_counter()
    res = CRITERIA[number]()
    res.seconds = time.perf_counter() - t0
    return res


def run_all(only=None, echo: bool = True) -> list[CriterionResult]:
    results = []
    for number in sorted(only or CRITERIA):
        res = run_criterion(number)
        if echo:
            print(res.line(), flush=True)
        results.append(res)
    return results
