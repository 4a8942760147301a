"""Scenario configuration: YAML files, presets and strict validation.

All quantities are in units where chi = 1 (energies in chi, times in 1/chi).
A config file is a YAML mapping; every section is optional and falls back to
the named ``preset`` (or to the built-in defaults)::

    preset: fig2
    werner: {s: 0.5, family: B1, i: 1, sign: plus}
    reservoir: {kind: amplitude, gamma_a: 0.005, gamma_b: 0.005}
    integrator: {dt: 0.001, t_end: 1500, sample_stride: 100}
    analysis: {convention: paper, threshold: 1.0e-6, min_gap: 100}
    output: {dir: out}

Unknown keys are rejected.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

from ..entanglement import Convention, QubitSubspace
from ..evolution import IntegratorConfig, ReservoirKind, ReservoirSpec
from ..fock import TruncatedSpace
from ..model import BellSpec, ModelParams, WernerSpec

SEVEN_STATES = ((0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 1), (2, 2))
DEFAULT_SUBSPACES = ("0110", "0220", "1221")
S_GRID = tuple(round(0.1 * k, 1) for k in range(1, 11))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "custom"
    model: ModelParams = field(default_factory=ModelParams)
    werner: WernerSpec = field(default_factory=WernerSpec)
    reservoir: ReservoirSpec = field(default_factory=ReservoirSpec)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    cutoffs: TruncatedSpace = field(default_factory=TruncatedSpace)
    subspaces: tuple[QubitSubspace, ...] = tuple(QubitSubspace.from_name(n) for n in DEFAULT_SUBSPACES)
    tracked: tuple[tuple[int, int], ...] = SEVEN_STATES
    convention: Convention = Convention.paper
    renormalize: bool = True
    threshold: float = 1e-6
    min_gap: int = 100
    min_width: int | None = None
    coherence_columns: bool = False
    s_values: tuple[float, ...] = S_GRID
    output_dir: str = "out"

    def __post_init__(self):
        for sub in self.subspaces:
            try:
                sub.indices(self.cutoffs)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        for label in self.tracked:
            if label[0] > self.cutoffs.n_max_a or label[1] > self.cutoffs.n_max_b:
                raise ConfigError(f"tracked state {label} exceeds the cutoffs")
        if self.werner.bell.i > min(self.cutoffs.n_max_a, self.cutoffs.n_max_b):
            raise ConfigError("Bell photon index exceeds the cutoffs")
        for s in self.s_values:
            if not 0.0 <= s <= 1.0:
                raise ConfigError(f"sweep value s = {s} outside [0, 1]")
        if self.threshold < 0 or self.min_gap < 1:
            raise ConfigError("event threshold must be >= 0 and min_gap >= 1")

    def with_s(self, s: float) -> "ScenarioConfig":
        return replace(self, werner=replace(self.werner, s=s))


def _damped(kind, family, i, s, **extra) -> dict:
    return {
        "werner": {"s": s, "family": family, "i": i, "sign": "plus"},
        "reservoir": {"kind": kind, "gamma_a": 0.005, "gamma_b": 0.005, "nbar_a": 0.0, "nbar_b": 0.0},
        "integrator": {"dt": 1e-3, "t_end": 1500.0, "sample_stride": 100},
        **extra,
    }


PRESETS: dict[str, dict[str, Any]] = {
    "fig1": {
        "werner": {"s": 0.1, "family": "B1", "i": 1, "sign": "plus"},
        "reservoir": {"kind": "none"},
        "integrator": {"dt": 1e-3, "t_end": 25.0, "sample_stride": 10},
    },
    "fig2": _damped("amplitude", "B1", 1, 0.5),
    "fig3": _damped("amplitude", "B2", 2, 0.1),
    "fig4": _damped("amplitude", "B2", 2, 0.1, analysis={"coherence_columns": True}),
    "fig5a": _damped("phase", "B2", 1, 0.5),
    "fig5b": _damped("phase", "B2", 2, 0.5),
}

PRESET_NOTES = {
    "fig1": "closed evolution, Werner s=0.1 on (|00>+|11>)/sqrt2, populations up to t=25",
    "fig2": "amplitude damping, Werner on (|00>+|11>)/sqrt2, sweep s=0.1..1",
    "fig3": "amplitude damping, Werner on (|02>+|20>)/sqrt2, sweep s=0.1..1",
    "fig4": "fig3 at s=0.1 with population/coherence product columns",
    "fig5a": "phase damping, Werner on (|01>+|10>)/sqrt2, sweep s=0.1..1",
    "fig5b": "phase damping, Werner on (|02>+|20>)/sqrt2, sweep s=0.1..1",
}

_SECTIONS = {
    "preset": None,
    "name": None,
    "cutoffs": {"n_max_a", "n_max_b"},
    "model": {"chi_a", "chi_b", "g"},
    "werner": {"s", "family", "i", "sign"},
    "reservoir": {"kind", "gamma_a", "gamma_b", "nbar_a", "nbar_b"},
    "integrator": {"dt", "t_end", "sample_stride", "method"},
    "subspaces": None,
    "tracked": None,
    "analysis": {"convention", "renormalize", "threshold", "min_gap", "min_width", "coherence_columns"},
    "sweep": {"s_values"},
    "output": {"dir"},
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _float(section: str, key: str, value) -> float:
    # YAML 1.1 reads "1e-6" as a string.
    if isinstance(value, bool):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}") from None


def _int(section: str, key: str, value) -> int:
    f = _float(section, key, value)
    if f != int(f):
        raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
    return int(f)


def _complex(value) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_float("model", "g", value[0]), _float("model", "g", value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            raise ConfigError(f"model.g must be a number, [re, im] or 'a+bj', got {value!r}") from None
    return complex(_float("model", "g", value))


def _label(value) -> tuple[int, int]:
    text = str(value).strip("|>")
    if len(text) == 2 and text.isdigit():
        return int(text[0]), int(text[1])
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return int(value[0]), int(value[1])
    raise ConfigError(f"basis label must look like '12' or [1, 2], got {value!r}")


def _check_keys(tree: dict):
    for key, value in tree.items():
        if key not in _SECTIONS:
            raise ConfigError(f"unknown config key {key!r}")
        allowed = _SECTIONS[key]
        if allowed is not None:
            if not isinstance(value, dict):
                raise ConfigError(f"section {key!r} must be a mapping")
            extra = set(value) - allowed
            if extra:
                raise ConfigError(f"unknown key(s) in {key!r}: {', '.join(sorted(extra))}")


def config_from_mapping(tree: dict | None) -> ScenarioConfig:
    """Build a validated :class:`ScenarioConfig` from a parsed key/value tree."""
    tree = dict(tree or {})
    _check_keys(tree)
    name = tree.get("preset")
    if name is not None:
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
        tree = _merge(PRESETS[name], tree)
    full = _merge({k: {} for k, v in _SECTIONS.items() if v is not None}, tree)

    try:
        c, m, w, r, it = full["cutoffs"], full["model"], full["werner"], full["reservoir"], full["integrator"]
        an, out = full["analysis"], full["output"]
        cutoffs = TruncatedSpace(_int("cutoffs", "n_max_a", c.get("n_max_a", 5)), _int("cutoffs", "n_max_b", c.get("n_max_b", 5)))
        model = ModelParams(
            _float("model", "chi_a", m.get("chi_a", 1.0)),
            _float("model", "chi_b", m.get("chi_b", 1.0)),
            _complex(m.get("g", 0.6)),
        )
        s = _float("werner", "s", w.get("s", 1.0))
        if not 0.0 <= s <= 1.0:
            raise ConfigError(f"werner.s = {s} outside [0, 1]")
        werner = WernerSpec(s, BellSpec(w.get("family", "B1"), _int("werner", "i", w.get("i", 1)), w.get("sign", "plus")))
        reservoir = ReservoirSpec(
            ReservoirKind(r.get("kind", "none")),
            _float("reservoir", "gamma_a", r.get("gamma_a", 0.005)),
            _float("reservoir", "gamma_b", r.get("gamma_b", 0.005)),
            _float("reservoir", "nbar_a", r.get("nbar_a", 0.0)),
            _float("reservoir", "nbar_b", r.get("nbar_b", 0.0)),
        )
        integrator = IntegratorConfig(
            _float("integrator", "dt", it.get("dt", 1e-3)),
            _float("integrator", "t_end", it.get("t_end", 1500.0)),
            _int("integrator", "sample_stride", it.get("sample_stride", 100)),
            it.get("method", "rk4_fixed"),
        )
        subspaces = tuple(QubitSubspace.from_name(str(n)) for n in full.get("subspaces") or DEFAULT_SUBSPACES)
        tracked = tuple(_label(x) for x in full.get("tracked") or SEVEN_STATES)
        min_width = an.get("min_width")
        cfg = ScenarioConfig(
            name=str(full.get("name") or name or "custom"),
            model=model,
            werner=werner,
            reservoir=reservoir,
            integrator=integrator,
            cutoffs=cutoffs,
            subspaces=subspaces,
            tracked=tracked,
            convention=Convention(an.get("convention", "paper")),
            renormalize=bool(an.get("renormalize", True)),
            threshold=_float("analysis", "threshold", an.get("threshold", 1e-6)),
            min_gap=_int("analysis", "min_gap", an.get("min_gap", 100)),
            min_width=None if min_width is None else _int("analysis", "min_width", min_width),
            coherence_columns=bool(an.get("coherence_columns", False)),
            s_values=tuple(_float("sweep", "s_values", x) for x in full["sweep"].get("s_values", S_GRID)),
            output_dir=str(out.get("dir", "out")),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def preset(name: str, **sections) -> ScenarioConfig:
    """A preset, optionally overriding whole config sections (as mappings)."""
    return config_from_mapping({"preset": name, **sections})


def parse_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        tree = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed YAML: {exc}") from None
    if tree is not None and not isinstance(tree, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_mapping(tree)
