//! Data bundle loading, scenario files and report tables.

mod bundle;
mod config;
mod report;

pub use bundle::{DataBundle, COST_FILES, INCIDENCE_FILE, INTERVAL_FILE, SCENARIO_FILE, STAGE_FILE, SURVIVAL_FILE};
pub use config::{ScenarioFile, SensitivityCase, DEFAULT_SCREENING_UNIT_COST};
pub use report::{
    emit_comparison, emit_sensitivity_suite, format_deaths, format_euros, format_icer, format_life_years, format_ratio,
    per_age_csv, round_to, OracleReport, ReportRow, ReportTable,
};
