//! Scenario file: flat `key = value` text with one section per scenario.
//!
//! ```text
//! baseline = current
//! cohort_size = 100000
//! screening_unit_cost = 30
//!
//! [scenario current]
//! label = 50-69 yr
//! extension = none
//!
//! [scenario younger]
//! extension = younger
//! transform = incidence_scale,0.1,auto
//!
//! [sensitivity incidence_up]
//! title = Incidence +10%
//! transform = incidence_scale,0.1,auto
//! ```
//!
//! Scenario keys: `label`, `extension`, `screen` (`LO-HI`), `incidence`
//! (baseline incidence curve), `older_incidence`, and repeatable `transform`
//! lines of the form `kind,magnitude,scope`.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Issue, Result};
use crate::model::DEFAULT_COHORT_SIZE;
use crate::scenario::{parse_age_range, Extension, ScenarioSpec, SensitivityTransform};

pub const DEFAULT_SCREENING_UNIT_COST: f64 = 30.0;

/// One sensitivity table: every scenario re-run with extra transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCase {
    pub id: String,
    pub title: Option<String>,
    pub transforms: Vec<SensitivityTransform>,
}

impl SensitivityCase {
    pub fn display_title(&self) -> &str {
        self.title.as_deref().unwrap_or(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub baseline: Option<String>,
    pub cohort_size: f64,
    pub screening_unit_cost: f64,
    pub scenarios: Vec<ScenarioSpec>,
    pub sensitivities: Vec<SensitivityCase>,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        ScenarioFile {
            baseline: None,
            cohort_size: DEFAULT_COHORT_SIZE,
            screening_unit_cost: DEFAULT_SCREENING_UNIT_COST,
            scenarios: Vec::new(),
            sensitivities: Vec::new(),
        }
    }
}

enum Section {
    Global,
    Scenario(ScenarioSpec),
    Sensitivity(SensitivityCase),
}

impl ScenarioFile {
    pub fn scenario(&self, id: &str) -> Result<&ScenarioSpec> {
        self.scenarios
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::Data(format!("unknown scenario '{id}'")))
    }

    /// Explicit baseline, else the first scenario.
    pub fn baseline_id(&self) -> Result<&str> {
        match &self.baseline {
            Some(id) => Ok(id),
            None => self
                .scenarios
                .first()
                .map(|s| s.id.as_str())
                .ok_or_else(|| Error::Data("scenario file defines no scenarios".into())),
        }
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut file = ScenarioFile::default();
        let mut issues = Vec::new();
        let mut section = Section::Global;

        fn close(section: Section, file: &mut ScenarioFile) {
            match section {
                Section::Global => {}
                Section::Scenario(s) => file.scenarios.push(s),
                Section::Sensitivity(s) => file.sensitivities.push(s),
            }
        }

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let issue = |msg: String| Issue::at_line(source, line_no, msg);
            if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let mut parts = header.split_whitespace();
                let kind = parts.next().unwrap_or("");
                let (Some(id), None) = (parts.next(), parts.next()) else {
                    issues.push(issue(format!("section header '[{header}]' needs exactly one id")));
                    continue;
                };
                let next = match kind {
                    "scenario" => Section::Scenario(ScenarioSpec::new(id, Extension::None)),
                    "sensitivity" => Section::Sensitivity(SensitivityCase {
                        id: id.to_string(),
                        title: None,
                        transforms: Vec::new(),
                    }),
                    other => {
                        issues.push(issue(format!("unknown section kind '{other}'")));
                        continue;
                    }
                };
                close(std::mem::replace(&mut section, next), &mut file);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                issues.push(issue(format!("expected 'key = value', got '{line}'")));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            let result: std::result::Result<(), String> = match &mut section {
                Section::Global => match key {
                    "baseline" => {
                        file.baseline = Some(value.to_string());
                        Ok(())
                    }
                    "cohort_size" => parse_positive(value).map(|v| file.cohort_size = v),
                    "screening_unit_cost" => parse_nonnegative(value).map(|v| file.screening_unit_cost = v),
                    other => Err(format!("unknown global key '{other}'")),
                },
                Section::Scenario(spec) => match key {
                    "label" => {
                        spec.label = Some(value.to_string());
                        Ok(())
                    }
                    "extension" => value.parse().map(|e| spec.extension = e),
                    "screen" => parse_age_range(value).map(|r| spec.screen_ages = Some(r)),
                    "incidence" => {
                        spec.incidence_variant = Some(value.to_string());
                        Ok(())
                    }
                    "older_incidence" => {
                        spec.older_incidence = Some(value.to_string());
                        Ok(())
                    }
                    "transform" => value.parse().map(|t| spec.transforms.push(t)),
                    other => Err(format!("unknown scenario key '{other}'")),
                },
                Section::Sensitivity(case) => match key {
                    "title" => {
                        case.title = Some(value.to_string());
                        Ok(())
                    }
                    "transform" => value.parse().map(|t| case.transforms.push(t)),
                    other => Err(format!("unknown sensitivity key '{other}'")),
                },
            };
            if let Err(msg) = result {
                issues.push(issue(msg));
            }
        }
        close(section, &mut file);

        let mut seen = HashSet::new();
        for s in &file.scenarios {
            if !seen.insert(&s.id) {
                issues.push(Issue::new(source, format!("duplicate scenario id '{}'", s.id)));
            }
        }
        let mut seen = HashSet::new();
        for s in &file.sensitivities {
            if !seen.insert(&s.id) {
                issues.push(Issue::new(source, format!("duplicate sensitivity id '{}'", s.id)));
            }
        }
        if let Some(b) = &file.baseline {
            if !file.scenarios.iter().any(|s| &s.id == b) && !file.scenarios.is_empty() {
                issues.push(Issue::new(source, format!("baseline '{b}' is not a defined scenario")));
            }
        }
        if issues.is_empty() {
            Ok(file)
        } else {
            Err(Error::Validation(issues))
        }
    }

    /// Canonical text form; parsing it yields an equal value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(b) = &self.baseline {
            writeln!(out, "baseline = {b}").unwrap();
        }
        writeln!(out, "cohort_size = {}", self.cohort_size).unwrap();
        writeln!(out, "screening_unit_cost = {}", self.screening_unit_cost).unwrap();
        for s in &self.scenarios {
            writeln!(out, "\n[scenario {}]", s.id).unwrap();
            if let Some(l) = &s.label {
                writeln!(out, "label = {l}").unwrap();
            }
            writeln!(out, "extension = {}", s.extension).unwrap();
            if let Some((lo, hi)) = s.screen_ages {
                writeln!(out, "screen = {lo}-{hi}").unwrap();
            }
            if let Some(v) = &s.incidence_variant {
                writeln!(out, "incidence = {v}").unwrap();
            }
            if let Some(v) = &s.older_incidence {
                writeln!(out, "older_incidence = {v}").unwrap();
            }
            for t in &s.transforms {
                writeln!(out, "transform = {t}").unwrap();
            }
        }
        for c in &self.sensitivities {
            writeln!(out, "\n[sensitivity {}]", c.id).unwrap();
            if let Some(t) = &c.title {
                writeln!(out, "title = {t}").unwrap();
            }
            for t in &c.transforms {
                writeln!(out, "transform = {t}").unwrap();
            }
        }
        out
    }
}

fn parse_positive(value: &str) -> std::result::Result<f64, String> {
    match value.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got '{value}'")),
    }
}

fn parse_nonnegative(value: &str) -> std::result::Result<f64, String> {
    match value.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a non-negative number, got '{value}'")),
    }
}
