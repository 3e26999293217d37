"""Evolving 1-d binary cellular automata for density classification and chaos generation."""

from .ca import (
    MAX_RADIUS,
    RuleTable,
    SpacetimeHistory,
    all_ones,
    all_zeros,
    density,
    evolve,
    evolve_final_many,
    evolve_final_rows,
    evolve_history_many,
    identity_rule,
    single_one,
    step,
    step_rows,
    table_size,
    uniform_state,
)
from .harness import ExperimentConfig, ExperimentSummary, TrialResult, run_experiment, run_trial
from .objectives import (
    COMPRESSOR_ID,
    ChaosObjective,
    DensityObjective,
    FitnessValue,
    ICBatch,
    chaos_fitness,
    classify_density,
    f100,
    nc,
    nc_pt,
    sample_flat_batch,
    sample_flat_ic,
)
from .optimizers import (
    GAConfig,
    GAPopulation,
    OptimizerResult,
    PSOConfig,
    EvaluationError,
    bgl_pso,
    binary_pso,
    chaotic_inertia,
    continuous_pso,
    ga,
    ga_step,
    mutate_positions,
    ring_neighborhood,
)

__version__ = "0.1.0"
