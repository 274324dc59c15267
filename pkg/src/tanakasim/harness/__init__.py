from .config import ConfigError, ScenarioConfig, load_config
from .report import Estimate, Report
from .scenarios import SCENARIOS, UnknownScenarioError, list_scenarios, resolve_config, run_scenario

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "load_config",
    "Estimate",
    "Report",
    "SCENARIOS",
    "UnknownScenarioError",
    "list_scenarios",
    "resolve_config",
    "run_scenario",
]
