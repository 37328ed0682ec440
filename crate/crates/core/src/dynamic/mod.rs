//! Finite-horizon extension: savings, Mincer wages that respond to
//! accumulated experience and a persistent parental health process that care
//! can slow down.

mod health;
mod params;
mod solve;

pub use health::{
    health_rates, simulate_health_path, write_health_rates, CarePolicy, HealthPath, HealthRate,
};
pub use params::{
    mincer_wage, transition_experience, AgeProfile, DynamicConfig, DynamicParams, Grid,
    HealthTransition, MincerCoeffs, Schedule, Terminal,
};
pub use solve::{
    dynamic_return_to_work, solve_bellman, DynamicState, DynamicWorkReturn, StateSolution,
    ValueFunction,
};
