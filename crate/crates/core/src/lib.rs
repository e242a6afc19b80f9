//! Cohort cost-effectiveness engine for breast-cancer screening policies.
//!
//! The analytic engine in [`model`] evaluates a screening policy over a
//! cohort of women followed in two-year screening rounds from age 46 to 99:
//! the stage mix at diagnosis is driven by per-age incidence and conditional
//! stage distributions, while stage-specific survival and treatment costs are
//! shared by every policy. [`scenario`] derives policy variants and
//! sensitivity cases from a baseline data set, [`mc`] replays the same
//! accounting individual by individual as an independent check, and [`io`]
//! handles the CSV data bundle and report tables.

pub mod error;
pub mod io;
pub mod mc;
pub mod model;
pub mod scenario;
pub mod sum;
pub mod synthetic;

pub use error::{Error, Issue, Result};
