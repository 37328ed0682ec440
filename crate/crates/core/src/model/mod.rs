//! Static cooperative household model: utility, budget, the work/care choice
//! and its comparative statics.

mod choice_integral;
mod household;
mod returns;
mod shocks;
mod sweep;
mod utility;

pub use choice_integral::{integrate_choice, ChoiceIntegral};
pub use household::{
    household_utility, optimal_choice, ChoiceOutcome, HouseholdConfig, HouseholdParams, PerSpouse,
    Spouse, WorkChoice,
};
pub use returns::{
    classify_types, return_to_work, work_probability, WorkReturn, WorkerType, WorkerTypePartition,
};
pub use shocks::{Disutility, ShockDraw, ShockSampler};
pub use sweep::{gradient_sweep, unit_grid, GradientSurface, SweepAxes, SweepCell};
pub use utility::{CareUtility, ConsumptionUtility, Health};

use crate::error::Result;

/// Expected maximum utility and choice probabilities of the static problem
/// with the shocks integrated out.
pub fn expected_choice(params: &HouseholdParams, z: Health) -> Result<ChoiceIntegral> {
    integrate_choice(params.alternative_values(z), &params.disutility())
}
