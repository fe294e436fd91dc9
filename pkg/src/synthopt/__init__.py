"""Step-by-step synthesis solvers for number partitioning and the TSP."""
from synthopt.engine import (
    ContactRule,
    EngineFault,
    Environment,
    NoDecision,
    PointState,
    StepRecord,
    SummaryDecision,
    apply_transition,
    completeness,
    init_environment,
    run_synthesis,
    select_transition,
)
from synthopt.partition import PartitionInstance, polish, solve_partition
from synthopt.tsp import TspInstance, solve_tsp

__version__ = "0.1.0"
