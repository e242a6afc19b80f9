use crate::error::{Error, Result};

use super::engine::ScenarioResult;

/// Life-year differences below this are treated as no difference.
pub const MIN_LIFE_YEAR_DIFFERENCE: f64 = 1e-9;

/// Incremental cost per life year gained between two policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Icer {
    Ratio {
        value: f64,
        delta_cost: f64,
        delta_life_years: f64,
    },
    /// The policies yield the same expected life years.
    Undefined { delta_cost: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcerClass {
    /// Non-negative ratio: a price per life year.
    Tradeoff,
    /// Cheaper and more life years.
    Dominant,
    /// Costlier and fewer life years.
    Dominated,
    Undefined,
}

impl Icer {
    pub fn from_deltas(delta_cost: f64, delta_life_years: f64) -> Self {
        if delta_life_years.abs() < MIN_LIFE_YEAR_DIFFERENCE {
            Icer::Undefined { delta_cost }
        } else {
            Icer::Ratio {
                value: delta_cost / delta_life_years,
                delta_cost,
                delta_life_years,
            }
        }
    }

    pub fn from_totals(base_cost: f64, base_life_years: f64, alt_cost: f64, alt_life_years: f64) -> Self {
        Icer::from_deltas(alt_cost - base_cost, alt_life_years - base_life_years)
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Icer::Ratio { value, .. } => Some(*value),
            Icer::Undefined { .. } => None,
        }
    }

    pub fn delta_cost(&self) -> f64 {
        match *self {
            Icer::Ratio { delta_cost, .. } | Icer::Undefined { delta_cost } => delta_cost,
        }
    }

    pub fn class(&self) -> IcerClass {
        match *self {
            Icer::Undefined { .. } => IcerClass::Undefined,
            Icer::Ratio {
                value,
                delta_life_years,
                ..
            } if value < 0.0 => {
                if delta_life_years > 0.0 {
                    IcerClass::Dominant
                } else {
                    IcerClass::Dominated
                }
            }
            Icer::Ratio { .. } => IcerClass::Tradeoff,
        }
    }

    pub fn note(&self) -> &'static str {
        match self.class() {
            IcerClass::Tradeoff => "",
            IcerClass::Dominant => "dominant (saves money and life years)",
            IcerClass::Dominated => "dominated",
            IcerClass::Undefined => "undefined (no life-year difference)",
        }
    }
}

/// ICER of `alternative` against `baseline`; the ratio itself does not
/// depend on which of the two is called the baseline.
pub fn icer(baseline: &ScenarioResult, alternative: &ScenarioResult) -> Result<Icer> {
    if baseline.groups != alternative.groups {
        return Err(Error::Data(format!(
            "scenarios {} and {} use different age grids",
            baseline.name, alternative.name
        )));
    }
    Ok(Icer::from_totals(
        baseline.total_cost,
        baseline.total_life_years,
        alternative.total_cost,
        alternative.total_life_years,
    ))
}

/// Average cost per expected life year; `None` when no life years remain.
pub fn cost_per_life_year(total_cost: f64, total_life_years: f64) -> Option<f64> {
    (total_life_years > 0.0).then(|| total_cost / total_life_years)
}
