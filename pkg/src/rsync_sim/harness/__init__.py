"""Scenario files, Monte Carlo runs, sweeps, reports, calibration and CLI."""

from .calibration import CalibrationResult, CalibrationTargets, calibrate
from .config import ConfigError, ConfigWarning, Scenario, SweepSpec, read_scenario, scenario_from_dict, write_scenario
from .reports import read_results_csv, write_report, write_sweep
from .runner import run_scenario, run_sweep
