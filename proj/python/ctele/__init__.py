"""Controlled teleportation of a two-atom state in driven cavity QED."""

from ._ctele import (
    DEFAULT_SEED,
    REFERENCE_COUPLING,
    Error,
    check_printed_branches,
    cli,
    compare_tables,
    derived_table,
    detuning_sweep,
    enumerate_branches,
    feasibility,
    haar_input,
    pair_map,
    paper_table,
    run,
    thermal_spread,
)

__all__ = [
    "DEFAULT_SEED",
    "REFERENCE_COUPLING",
    "Error",
    "check_printed_branches",
    "cli",
    "compare_tables",
    "derived_table",
    "detuning_sweep",
    "enumerate_branches",
    "feasibility",
    "haar_input",
    "pair_map",
    "paper_table",
    "run",
    "thermal_spread",
]
