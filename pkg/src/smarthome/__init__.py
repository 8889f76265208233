"""Deterministic smart-home simulator with a rule-driven power agent and a health agent."""

from .classify import Dataset, KmcModel, LabeledSample, euclidean_distance, fit_kmc, kmc_label, kmeans_fit, knn_classify, load_dataset
from .engine import EnergyLedger, SimulationResult, apply_event, energy_totals, run_simulation
from .health import (
    HealthConfig,
    HealthProfile,
    SleepPattern,
    SleepQuality,
    build_profile,
    classify_sleep,
    extract_sleep_sessions,
    toileting_stats,
)
from .house import HouseConfig, WorldState, can_occupy, default_house, parse_house, validate_house
from .power import attribute_energy, builtin_power_rules
from .rule_dsl import format_rules, parse_rules
from .rules import RuleSet, evaluate_rules, merge_rulesets
from .scenario import Timeline, format_scenario, parse_scenario, validate_timeline

__version__ = "0.1.0"
