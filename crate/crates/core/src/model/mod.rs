//! Domain types and the closed-form cohort model.

mod age;
mod cost;
mod engine;
mod epi;
mod policy;
mod ratio;
mod stage;
mod survival;

pub use age::{AgeGrid, AgeGroup, HORIZON_AGE};
pub use cost::{per_case_cost, schedule_cost, CostBand, CostModel, CostRow, CostTriple, DeathCause};
pub use engine::{
    cohort_trajectory, death_time_distribution, evaluate, expected_bc_deaths, expected_costs_age, expected_costs_total,
    expected_life_years, ScenarioResult, DEFAULT_COHORT_SIZE,
};
pub use epi::{build_mu, EpiRow, EpidemiologyTable, StageDistribution, PROBABILITY_TOLERANCE};
pub use policy::{Policy, Screening};
pub use ratio::{cost_per_life_year, icer, Icer, IcerClass, MIN_LIFE_YEAR_DIFFERENCE};
pub use stage::Stage;
pub use survival::{
    build_pi, CausePmf, DiagnosedSurvival, GroupSurvival, SurvivalModel, UndiagnosedSurvival, PMF_TOLERANCE,
};
