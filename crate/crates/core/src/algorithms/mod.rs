//! Splitting iterations, step-size planning, and convergence diagnostics.

mod plan;
mod solver;
mod trace;

pub use plan::{baseline_lambda, plan_step_size, plan_step_size_with_grid, PlannerGrid, StepSizePlan};
pub use solver::{
    csetnek2_step, csetnek3_step, fbfs_step, fbhfs_step, fbs_step, orfbs_step, sfrbs_step,
    solve, solve_inclusion, srfbs_step, step, Method, SolveOutcome, SolverState, StopCriterion,
    StoppingRule, DIVERGENCE_BOUND,
};
pub use trace::{
    diagnostics_update, fixed_point_residual, lyapunov_value, IterationTrace, Reference,
    TraceRecord,
};
