"""Job-shop scheduling by time-window decomposition and successive
window-wise makespan optimization."""

from .core import (
    Instance,
    Operation,
    OperationRef,
    Schedule,
    Violation,
    ViolationReport,
    instance_from_jobs,
    job_chain_bound,
    machine_load_bound,
    machine_loads,
    makespan,
    validate_instance,
    verify_schedule,
)
from .decompose import (
    DecompositionPlan,
    Measures,
    Strategy,
    assign_windows,
    compute_est,
    compute_mtwr,
    emit_windows,
    next_window,
    parse_strategy,
    rank_operations,
)
from .formats import (
    ParseError,
    emit_instance,
    emit_schedule_csv,
    parse_instance,
    parse_schedule_csv,
)
from .pipeline import (
    PipelineConfig,
    RunResult,
    WindowStats,
    compress,
    merge_fixed,
    run_pipeline,
    select_overlap,
)
from .solve import (
    Budget,
    CycleError,
    SolveResult,
    SubProblem,
    brute_force_optimum,
    build_subproblem,
    critical_path_bound,
    earliest_starts,
    greedy_incumbent,
    solve_window,
)
from .bench import (
    ResultRow,
    SuiteConfig,
    emit_report,
    generate_instance,
    run_suite,
)

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "CycleError",
    "DecompositionPlan",
    "Instance",
    "Measures",
    "Operation",
    "OperationRef",
    "ParseError",
    "PipelineConfig",
    "ResultRow",
    "RunResult",
    "Schedule",
    "SolveResult",
    "Strategy",
    "SubProblem",
    "SuiteConfig",
    "Violation",
    "ViolationReport",
    "WindowStats",
    "assign_windows",
    "brute_force_optimum",
    "build_subproblem",
    "compress",
    "compute_est",
    "compute_mtwr",
    "critical_path_bound",
    "earliest_starts",
    "emit_instance",
    "emit_report",
    "emit_schedule_csv",
    "emit_windows",
    "generate_instance",
    "greedy_incumbent",
    "instance_from_jobs",
    "job_chain_bound",
    "machine_load_bound",
    "machine_loads",
    "makespan",
    "merge_fixed",
    "next_window",
    "parse_instance",
    "parse_schedule_csv",
    "parse_strategy",
    "rank_operations",
    "run_pipeline",
    "run_suite",
    "select_overlap",
    "solve_window",
    "validate_instance",
    "verify_schedule",
]
