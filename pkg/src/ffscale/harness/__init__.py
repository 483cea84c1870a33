"""Scenario files, run orchestration, verification, sweeps and the CLI."""

from .config import Scenario, bundled, bundled_scenarios, load_scenario, scenario_from_dict
from .report import CheckRecord, VerificationReport, write_sweep_csv, write_trajectory_csv
from .runner import RunResult, simulate
from .sweep import sweep_adiabatic
from .verify import run, verify
