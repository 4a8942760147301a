from .config import PRESETS, ConfigError, ScenarioConfig, config_from_mapping, parse_config, preset
from .runner import ScenarioResult, SweepResult, run_scenario, sweep_s

__all__ = [
    "PRESETS",
    "ConfigError",
    "ScenarioConfig",
    "ScenarioResult",
    "SweepResult",
    "config_from_mapping",
    "parse_config",
    "preset",
    "run_scenario",
    "sweep_s",
]
