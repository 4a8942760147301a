import csv
import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest

from kerrcoupler.entanglement import Convention, XForm, eigs_analytic, esd_conditions, pt_eigenvalues
from kerrcoupler.evolution import IntegratorConfig
from kerrcoupler.harness.cli import main
from kerrcoupler.harness.config import PRESETS, ConfigError, config_from_mapping, parse_config, preset
from kerrcoupler.harness.runner import csv_columns, run_scenario, sweep_s


def short(name, t_end=5.0, stride=100, **kw):
    cfg = preset(name)
    return replace(cfg, integrator=IntegratorConfig(1e-3, t_end, stride), **kw)


def kinds(events):
    return [e.kind.value for e in events]


def event_times(result):
    return {k: [(e.kind.value, e.time) for e in a.events] for k, a in result.analyses.items()}


@pytest.fixture(scope="module")
def full_runs():
    cache = {}

    def get(name, s, **kw):
        key = (name, s, tuple(sorted(kw.items())))
        if key not in cache:
            cache[key] = run_scenario(replace(preset(name).with_s(s), **kw), write=False)
        return cache[key]

    return get


# --- configuration -----------------------------------------------------------

def test_minimal_preset_file_is_fully_populated(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("preset: fig2\n")
    cfg = parse_config(path)
    assert cfg.name == "fig2"
    assert cfg.reservoir.kind.value == "amplitude"
    assert cfg.reservoir.gamma_a == cfg.reservoir.gamma_b == 0.005
    assert cfg.model.g == 0.6 and cfg.model.chi_a == cfg.model.chi_b == 1.0
    assert cfg.werner.bell.family.value == "B1" and cfg.werner.bell.i == 1
    assert cfg.integrator.dt == 1e-3 and cfg.integrator.t_end == 1500.0
    assert [s.name for s in cfg.subspaces] == ["0110", "0220", "1221"]
    assert cfg.convention is Convention.paper and cfg.threshold == 1e-6 and cfg.min_gap == 100


@pytest.mark.parametrize(
    "text,match",
    [
        ("werner: {s: 1.2}\n", "outside"),
        ("cutoffs: {n_max_a: 1, n_max_b: 1}\nsubspaces: ['0220']\n", "mode a"),
        ("cutoffs: {n_max_a: 2, n_max_b: 2}\nsubspaces: ['0330']\n", "cutoffs"),
        ("preset: fig2\nwerner: {s: 0.5, colour: red}\n", "colour"),
        ("bogus: 1\n", "bogus"),
        ("preset: fig9\n", "unknown preset"),
        ("integrator: {dt: 0.1}\n", "dt"),
        ("werner: [1, 2\n", "malformed"),
        ("- 1\n- 2\n", "mapping"),
        ("model: {g: abc}\n", "model.g"),
    ],
)
def test_config_errors(tmp_path, text, match):
    path = tmp_path / "bad.yaml"
    path.write_text(text)
    with pytest.raises(ConfigError, match=match):
        parse_config(path)


def test_config_value_formats():
    cfg = config_from_mapping({
        "model": {"g": [0.3, 0.4]},
        "analysis": {"threshold": "1e-5", "convention": "standard"},
        "tracked": ["00", [1, 1]],
        "sweep": {"s_values": [0, 0.5, 1]},
    })
    assert cfg.model.g == 0.3 + 0.4j
    assert cfg.threshold == 1e-5 and cfg.convention is Convention.standard
    assert cfg.tracked == ((0, 0), (1, 1))
    assert cfg.s_values == (0.0, 0.5, 1.0)
    assert config_from_mapping({"model": {"g": "0.6+0.1j"}}).model.g == 0.6 + 0.1j


def test_presets_cover_every_figure():
    assert set(PRESETS) == {"fig1", "fig2", "fig3", "fig4", "fig5a", "fig5b"}
    for name in PRESETS:
        cfg = preset(name)
        assert cfg.model.g == 0.6
        if name != "fig1":
            assert cfg.reservoir.gamma_a == 0.005
    assert preset("fig4").coherence_columns


# --- scenario output -----------------------------------------------------------

def test_csv_layout_and_determinism(tmp_path):
    cfg = short("fig4")
    r1 = run_scenario(cfg, tmp_path / "a")
    r2 = run_scenario(cfg, tmp_path / "b")
    assert r1.csv_path.read_bytes() == r2.csv_path.read_bytes()
    with open(r1.csv_path) as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    assert header == csv_columns(cfg)
    assert header[:4] == ["t", "N_0110", "N_0220", "N_1221"]
    for col in ("P_00", "P_22", "leakage", "trace_0110", "class_0220", "a22a33_0110", "a14a41_0220"):
        assert col in header
    assert len(rows) == 1 + len(r1.trajectory.times)
    assert rows[1][header.index("class_0220")] in {f.value for f in XForm}
    assert float(rows[1][header.index("N_0220")]) == 0.0  # s = 0.1 starts separable
    summary = (tmp_path / "a" / "fig4_s0.1000_events.txt").read_text()
    assert "N_0220" in summary and "leakage" in summary


def test_standard_convention_halves_values():
    paper = run_scenario(short("fig2", t_end=2.0), write=False)
    std = run_scenario(short("fig2", t_end=2.0, convention=Convention.standard), write=False)
    for k in paper.analyses:
        assert np.allclose(std.analyses[k].negativity, 0.5 * paper.analyses[k].negativity, atol=1e-15)


def test_sweep_brackets_and_werner_border(tmp_path):
    cfg = replace(preset("fig2"), integrator=IntegratorConfig(1e-3, 1e-3, 1))
    s_values = [0.0, 0.3, 1 / 3, 0.34, 0.5, 1.0]
    sweep = sweep_s(cfg, s_values, out_dir=tmp_path)
    n0 = [row["0110"] for row in sweep.initial_negativity]
    assert n0[0] == n0[1] == 0.0
    assert n0[2] <= 1e-10
    assert n0[3] > 0
    assert n0[-1] == pytest.approx(1.0, abs=1e-10)
    with open(sweep.table_path) as fh:
        table = list(csv.DictReader(fh))
    assert float(table[0]["s"]) == 0.0 and float(table[-1]["s"]) == 1.0


def test_parallel_sweep_matches_serial():
    cfg = short("fig5a", t_end=20.0)
    a = sweep_s(cfg, [0.2, 0.6, 1.0], workers=1, write=False)
    b = sweep_s(cfg, [0.2, 0.6, 1.0], workers=2, write=False)
    assert a.rows() == b.rows()


def test_sweep_rejects_out_of_range():
    with pytest.raises(ValueError):
        sweep_s(short("fig2"), [0.5, 1.5], write=False)


# --- full-trajectory properties ------------------------------------------------

@pytest.mark.parametrize("name,s", [("fig2", 0.5), ("fig3", 0.1), ("fig3", 0.5)])
def test_renormalization_does_not_change_verdicts(full_runs, name, s):
    on = full_runs(name, s)
    off = full_runs(name, s, renormalize=False)
    for k in on.analyses:
        assert np.array_equal(on.analyses[k].negativity > 0, off.analyses[k].negativity > 0)
    assert event_times(on) == event_times(off)


@pytest.mark.parametrize("name,s", [("fig2", 0.5), ("fig3", 0.5), ("fig5a", 0.5), ("fig5b", 1.0)])
def test_sample_wise_pt_consistency(full_runs, name, s):
    res = full_runs(name, s)
    for a in res.analyses.values():
        ok = ~a.degenerate
        lam = pt_eigenvalues(a.blocks[ok])
        assert np.array_equal(a.negativity[ok] > 0, lam[:, 0] < -1e-12)
        for m, form in zip(a.blocks[ok], a.forms[ok]):
            if form != "general":
                assert np.max(np.abs(np.sort(eigs_analytic(m, form)) - pt_eigenvalues(m))) <= 1e-10


@pytest.mark.parametrize("name,s", [("fig2", 0.5), ("fig3", 0.5)])
def test_events_stable_under_stride_refinement(full_runs, name, s):
    coarse = event_times(full_runs(name, s))
    fine = event_times(full_runs(name, s, integrator=IntegratorConfig(1e-3, 1500.0, 50), min_gap=200))
    assert coarse.keys() == fine.keys()
    for k in coarse:
        assert [e[0] for e in coarse[k]] == [e[0] for e in fine[k]]
        for (_, tc), (_, tf) in zip(coarse[k], fine[k]):
            assert abs(tc - tf) <= 0.1 + 1e-9


@pytest.mark.parametrize("s", [0.1, 0.25, 0.5, 0.75, 1.0])
def test_fig2_event_structure(full_runs, s):
    ev = full_runs("fig2", s).events
    assert kinds(ev["0110"]) == ["sudden_death"]
    assert kinds(ev["0220"]) == ["sudden_death", "rebirth"]


def test_fig5_pure_bell_only_decays(full_runs):
    for name, sub in (("fig5a", "0110"), ("fig5b", "0220")):
        a = full_runs(name, 1.0).analyses[sub]
        assert a.events == []
        assert set(a.forms) == {"Ph2"}
        assert not esd_conditions(a.blocks[0]).huang_zhu
        # Coherence dephases as exp(-0.02 t): still NPT at t_end, though
        # below the eigenvalue clip used for the negativity itself.
        assert np.all(a.margin > 0)
        assert a.negativity[len(a.negativity) // 2] > 0


def test_bell_sign_is_irrelevant_for_the_b2_family():
    # A local phase on mode a maps (|0i> + |i0>) to (|0i> - |i0>) and commutes
    # with the reduced dynamics, so negativities agree for either sign.
    cfg = short("fig5b", t_end=50.0)
    minus = replace(cfg, werner=replace(cfg.werner, bell=replace(cfg.werner.bell, sign="minus")))
    a = run_scenario(cfg, write=False)
    b = run_scenario(minus, write=False)
    for k in a.analyses:
        assert np.max(np.abs(a.analyses[k].negativity - b.analyses[k].negativity)) <= 1e-10


def test_bell_sign_matters_for_the_b1_family():
    # |00> and |11> are coupled by the pump, so the relative sign is physical.
    cfg = short("fig2", t_end=50.0)
    minus = replace(cfg, werner=replace(cfg.werner, bell=replace(cfg.werner.bell, sign="minus")))
    a = run_scenario(cfg, write=False).analyses["0110"].negativity
    b = run_scenario(minus, write=False).analyses["0110"].negativity
    assert a[0] == pytest.approx(b[0])
    assert np.max(np.abs(a - b)) > 1e-2


# --- command line ------------------------------------------------------------

def test_cli_presets_lists_everything(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    for name in PRESETS:
        assert name in out


def test_cli_run_and_sweep(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("preset: fig5a\nintegrator: {t_end: 3, sample_stride: 100}\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path), "--s", "0.4"]) == 0
    assert (tmp_path / "fig5a_s0.4000.csv").exists()
    assert "N_0110" in capsys.readouterr().out
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path), "--s-values", "0", "1", "--convention", "standard"]) == 0
    assert (tmp_path / "fig5a_sweep.csv").exists()


def test_cli_reports_config_errors(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("werner: {s: 1.2}\n")
    assert main(["run", "--config", str(cfg)]) == 2
    assert "outside" in capsys.readouterr().err


def test_cli_check_subset():
    proc = subprocess.run(
        [sys.executable, "-m", "kerrcoupler.harness.cli", "check", "--only", "1", "2"],
        capture_output=True, text=True, timeout=300,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "[PASS] criterion 1" in proc.stdout and "[PASS] criterion 2" in proc.stdout
