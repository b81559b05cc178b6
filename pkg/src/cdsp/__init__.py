"""Exact solver toolkit for multi-trip biomedical specimen collection routing.

Pipeline: parse Solomon-format files into instances, build the
replenishment-arc multigraph with tightened time windows, generate the
two-index MIP, solve it through a pluggable MILP adapter (or emit LP/MPS
files for any external solver), then decode, validate and evaluate the
resulting multi-trip tours. An exhaustive oracle provides ground truth at
desk scale, and a benchmark harness reproduces the standard reporting
table.
"""

from .formulation import (
    FileSolverAdapter,
    MipModel,
    ModelDecodeError,
    ScipyMilpAdapter,
    SolveLimits,
    SolveOutcome,
    SolveStatus,
    SolverConfigError,
    build_model,
    emit_model,
    extract_solution,
    solve,
)
from .harness import (
    BenchmarkReport,
    ManifestEntry,
    RunRecord,
    load_manifest,
    report_table,
    run_instance,
    run_suite,
)
from .instances import (
    Instance,
    InstanceConfig,
    InstanceError,
    RawInstance,
    Setting,
    Site,
    SolomonParseError,
    build_instance,
    parse_solomon,
    write_solomon,
)
from .network import (
    Arc,
    ArcKind,
    InfeasibleWindowError,
    Multigraph,
    TimeWindows,
    build_multigraph,
    check_triangle,
    preprocess_time_windows,
)
from .oracle import OracleResult, OracleSizeError, exact_solve_tiny
from .routes import (
    EvaluatedSolution,
    InfeasibleTourError,
    Timing,
    Tour,
    Trip,
    ValidationReport,
    assemble_solution,
    evaluate,
    schedule_tour,
    solution_to_json,
    validate_solution,
)

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "ArcKind",
    "BenchmarkReport",
    "EvaluatedSolution",
    "FileSolverAdapter",
    "InfeasibleTourError",
    "InfeasibleWindowError",
    "Instance",
    "InstanceConfig",
    "InstanceError",
    "ManifestEntry",
    "MipModel",
    "ModelDecodeError",
    "Multigraph",
    "OracleResult",
    "OracleSizeError",
    "RawInstance",
    "RunRecord",
    "ScipyMilpAdapter",
    "Setting",
    "Site",
    "SolomonParseError",
    "SolveLimits",
    "SolveOutcome",
    "SolveStatus",
    "SolverConfigError",
    "TimeWindows",
    "Timing",
    "Tour",
    "Trip",
    "ValidationReport",
    "assemble_solution",
    "build_instance",
    "build_model",
    "build_multigraph",
    "check_triangle",
    "emit_model",
    "evaluate",
    "exact_solve_tiny",
    "extract_solution",
    "load_manifest",
    "parse_solomon",
    "preprocess_time_windows",
    "report_table",
    "run_instance",
    "run_suite",
    "schedule_tour",
    "solution_to_json",
    "solve",
    "validate_solution",
    "write_solomon",
]
