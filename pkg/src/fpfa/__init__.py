"""Frequency-position-fluid antenna (FPFA) multi-user THz downlink simulator."""

from .config import ConfigError, ScenarioConfig, load_config
from .sim import SweepReport, run_drop, run_sweep, write_outputs

__version__ = "0.1.0"

__all__ = ["ConfigError", "ScenarioConfig", "SweepReport", "load_config", "run_drop", "run_sweep", "write_outputs"]
