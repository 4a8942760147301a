"""Scenario execution: integrate, analyze every subspace, write CSV and events."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..entanglement import (
    CLASSIFY_REL_TOL,
    DEGENERATE_TRACE,
    EIGEN_CLIP,
    Event,
    NegativitySeries,
    QubitSubspace,
    XForm,
    detect_events,
    form_residual,
    pt_eigenvalues,
)
from ..evolution import ReservoirKind, Trajectory, evolve_closed, integrate_master
from ..model import build_hamiltonian, werner_density
from .config import ScenarioConfig

log = logging.getLogger(__name__)

_FORM_ORDER = (XForm.Ph1, XForm.Ph2, XForm.A1, XForm.A2)


@dataclass
class SubspaceAnalysis:
    subspace: QubitSubspace
    blocks: np.ndarray  # (n, 4, 4), renormalized unless degenerate or disabled
    raw_trace: np.ndarray
    degenerate: np.ndarray
    negativity: np.ndarray
    margin: np.ndarray
    forms: np.ndarray  # XForm codes as strings
    series: NegativitySeries
    events: list[Event] = field(default_factory=list)


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    trajectory: Trajectory
    analyses: dict[str, SubspaceAnalysis]
    leakage: np.ndarray
    csv_path: Path | None = None
    summary: str = ""

    @property
    def events(self) -> dict[str, list[Event]]:
        return {name: a.events for name, a in self.analyses.items()}


@dataclass
class SweepResult:
    config: ScenarioConfig
    s_values: list[float]
    events: list[dict[str, list[Event]]]
    initial_negativity: list[dict[str, float]]
    table_path: Path | None = None

    def rows(self) -> list[dict]:
        out = []
        for s, evs, n0 in zip(self.s_values, self.events, self.initial_negativity):
            for name, lst in evs.items():
                base = {"s": s, "subspace": name, "N0": n0[name]}
                if not lst:
                    out.append({**base, "kind": "none", "death_time": None, "birth_time": None})
                for ev in lst:
                    out.append({**base, "kind": ev.kind.value, "death_time": ev.death_time, "birth_time": ev.birth_time})
        return out


def simulate(cfg: ScenarioConfig) -> Trajectory:
    space = cfg.cutoffs
    H = build_hamiltonian(cfg.model, space)
    rho0 = werner_density(cfg.werner, space)
    if cfg.reservoir.kind is ReservoirKind.none:
        it = cfg.integrator
        n_samples = it.n_steps // it.sample_stride + 1
        times = np.arange(n_samples) * it.sample_stride * it.dt
        return evolve_closed(rho0, H, times, space)
    return integrate_master(rho0, H, cfg.reservoir, cfg.integrator, space)


def subspace_blocks(traj: Trajectory, sub: QubitSubspace) -> np.ndarray:
    """Raw 4x4 reductions of every sample, shape (n, 4, 4)."""
    D = traj.space.dim
    idx = np.array(sub.indices(traj.space))
    flat = (idx[:, None] * D + idx[None, :]).ravel()
    pos = np.full(D * D, -1)
    pos[traj.support] = np.arange(len(traj.support))
    cols = pos[flat]
    blocks = np.zeros((len(traj.times), 16), dtype=complex)
    present = cols >= 0
    blocks[:, present] = traj.packed[:, cols[present]]
    return blocks.reshape(-1, 4, 4)


def classify_blocks(blocks: np.ndarray) -> np.ndarray:
    tol = CLASSIFY_REL_TOL * np.maximum(np.abs(np.trace(blocks, axis1=1, axis2=2)), np.finfo(float).tiny)
    forms = np.full(len(blocks), XForm.general.value, dtype=object)
    open_ = np.ones(len(blocks), dtype=bool)
    for form in _FORM_ORDER:
        fits = open_ & (form_residual(blocks, form) <= tol)
        forms[fits] = form.value
        open_ &= ~fits
    return forms


def analyze(traj: Trajectory, cfg: ScenarioConfig) -> dict[str, SubspaceAnalysis]:
    scale = cfg.convention.scale
    out = {}
    for sub in cfg.subspaces:
        blocks = subspace_blocks(traj, sub)
        raw = np.trace(blocks, axis1=1, axis2=2).real
        degenerate = raw <= DEGENERATE_TRACE
        if cfg.renormalize:
            norm = np.where(degenerate, 1.0, raw)
            blocks = blocks / norm[:, None, None]
        lam = pt_eigenvalues(blocks)
        neg = scale * -np.sum(np.where(lam < -EIGEN_CLIP, lam, 0.0), axis=1)
        neg[degenerate] = 0.0
        margin = -scale * lam[:, 0]
        margin[degenerate] = 0.0
        series = NegativitySeries(traj.times, neg, cfg.convention, sub.name, margin)
        events = detect_events(series, cfg.threshold, cfg.min_gap, cfg.min_width)
        out[sub.name] = SubspaceAnalysis(sub, blocks, raw, degenerate, neg, margin, classify_blocks(blocks), series, events)
    return out


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def csv_columns(cfg: ScenarioConfig) -> list[str]:
    names = [s.name for s in cfg.subspaces]
    cols = ["t"] + [f"N_{n}" for n in names]
    cols += [f"P_{a}{b}" for a, b in cfg.tracked]
    cols += ["leakage"] + [f"trace_{n}" for n in names] + [f"class_{n}" for n in names]
    if cfg.coherence_columns:
        for n in names:
            cols += [f"a11a44_{n}", f"a23a32_{n}", f"a22a33_{n}", f"a14a41_{n}"]
    return cols


def write_csv(path: Path, result: ScenarioResult):
    cfg = result.config
    traj = result.trajectory
    pops = traj.populations()
    tracked_idx = [cfg.cutoffs.index(*label) for label in cfg.tracked]
    analyses = [result.analyses[s.name] for s in cfg.subspaces]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(csv_columns(cfg))
        for k, t in enumerate(traj.times):
            row = [_fmt(t)] + [_fmt(a.negativity[k]) for a in analyses]
            row += [_fmt(pops[k, i]) for i in tracked_idx]
            row += [_fmt(result.leakage[k])] + [_fmt(a.raw_trace[k]) for a in analyses]
            row += [a.forms[k] for a in analyses]
            if cfg.coherence_columns:
                for a in analyses:
                    m = a.blocks[k]
                    row += [
                        _fmt(m[0, 0].real * m[3, 3].real),
                        _fmt((m[1, 2] * m[2, 1]).real),
                        _fmt(m[1, 1].real * m[2, 2].real),
                        _fmt((m[0, 3] * m[3, 0]).real),
                    ]
            writer.writerow(row)


def format_events(events: list[Event]) -> str:
    if not events:
        return "no events"
    parts = []
    for ev in events:
        if ev.kind.value == "rebirth":
            parts.append(f"rebirth at t={ev.birth_time:.6g} (dead since t={ev.death_time:.6g})")
        else:
            parts.append(f"{ev.kind.value} at t={ev.time:.6g}")
    return "; ".join(parts)


def summarize(result: ScenarioResult) -> str:
    cfg = result.config
    w = cfg.werner
    lines = [
        f"scenario {cfg.name}: s={w.s:g} {w.bell.family.value} i={w.bell.i} {w.bell.sign.value}, "
        f"reservoir={cfg.reservoir.kind.value}, g={cfg.model.g:g}, cutoffs=({cfg.cutoffs.n_max_a},{cfg.cutoffs.n_max_b}), "
        f"convention={cfg.convention.value}",
    ]
    for name, a in result.analyses.items():
        lines.append(f"  N_{name}: {format_events(a.events)}")
    lines.append(f"  final leakage outside tracked states: {result.leakage[-1]:.6g}")
    lines.append(f"  max population on truncation edge: {np.max(result.trajectory.leak_log):.3g}")
    return "\n".join(lines)


def _stem(cfg: ScenarioConfig) -> str:
    return f"{cfg.name}_s{cfg.werner.s:.4f}"


def run_scenario(cfg: ScenarioConfig, out_dir: str | Path | None = None, write: bool = True) -> ScenarioResult:
    """Integrate one scenario, analyze it and (optionally) write CSV + events."""
    traj = simulate(cfg)
    pops = traj.populations()
    tracked_idx = [cfg.cutoffs.index(*label) for label in cfg.tracked]
    leak = 1.0 - pops[:, tracked_idx].sum(axis=1)
    result = ScenarioResult(cfg, traj, analyze(traj, cfg), leak)
    result.summary = summarize(result)
    if write:
        out = Path(out_dir if out_dir is not None else cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        result.csv_path = out / f"{_stem(cfg)}.csv"
        write_csv(result.csv_path, result)
        (out / f"{_stem(cfg)}_events.txt").write_text(result.summary + "\n")
    return result


def _sweep_one(args):
    cfg, out_dir, write = args
    res = run_scenario(cfg, out_dir, write)
    events = {name: a.events for name, a in res.analyses.items()}
    n0 = {name: float(a.negativity[0]) for name, a in res.analyses.items()}
    return events, n0


def sweep_s(
    cfg: ScenarioConfig,
    s_values: list[float] | None = None,
    workers: int = 1,
    out_dir: str | Path | None = None,
    write: bool = True,
) -> SweepResult:
    """Run ``cfg`` for each s (only s varies) and tabulate the events."""
    s_values = list(cfg.s_values if s_values is None else s_values)
    for s in s_values:
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"s = {s} outside [0, 1]")
    jobs = [(cfg.with_s(s), out_dir, write) for s in s_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(job) for job in jobs]
    sweep = SweepResult(cfg, s_values, [r[0] for r in results], [r[1] for r in results])
    if write:
        out = Path(out_dir if out_dir is not None else cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        sweep.table_path = out / f"{cfg.name}_sweep.csv"
        with open(sweep.table_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["s", "subspace", "N0", "kind", "death_time", "birth_time"])
            for row in sweep.rows():
                writer.writerow([
                    _fmt(row["s"]), row["subspace"], _fmt(row["N0"]), row["kind"],
                    "" if row["death_time"] is None else _fmt(row["death_time"]),
                    "" if row["birth_time"] is None else _fmt(row["birth_time"]),
                ])
    return sweep
