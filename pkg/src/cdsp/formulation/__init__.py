"""MIP generation, serialization, solving and solution decoding."""

from .decode import INTEGRALITY_TOL, ModelDecodeError, extract_solution, solution_column_values
from .model import (
    BINARY,
    CONTINUOUS,
    SENSE_EQ,
    SENSE_GE,
    SENSE_LE,
    ColumnLayout,
    LinearConstraint,
    MipModel,
    VariableRef,
    big_m_completion,
    big_m_shift,
    big_m_visit,
    build_model,
)
from .readers import ParsedModel, read_lp, read_mps
from .solvers import (
    FileSolverAdapter,
    ScipyMilpAdapter,
    SolveLimits,
    SolveOutcome,
    SolveStatus,
    SolverAdapter,
    SolverConfigError,
    default_adapter,
    make_adapter,
    model_to_arrays,
    register_adapter,
    solve,
)
from .writers import emit_model, write_lp, write_mps

__all__ = [
    "BINARY",
    "CONTINUOUS",
    "ColumnLayout",
    "FileSolverAdapter",
    "INTEGRALITY_TOL",
    "LinearConstraint",
    "MipModel",
    "ModelDecodeError",
    "ParsedModel",
    "ScipyMilpAdapter",
    "SENSE_EQ",
    "SENSE_GE",
    "SENSE_LE",
    "SolveLimits",
    "SolveOutcome",
    "SolveStatus",
    "SolverAdapter",
    "SolverConfigError",
    "VariableRef",
    "big_m_completion",
    "big_m_shift",
    "big_m_visit",
    "build_model",
    "default_adapter",
    "emit_model",
    "extract_solution",
    "make_adapter",
    "model_to_arrays",
    "read_lp",
    "read_mps",
    "register_adapter",
    "solution_column_values",
    "solve",
    "write_lp",
    "write_mps",
]
