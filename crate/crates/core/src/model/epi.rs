use crate::error::{Error, Issue, Result};
use crate::sum::compensated_sum;

use super::age::{AgeGrid, AgeGroup};
use super::stage::Stage;

/// Tolerance for a probability vector summing to one.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Incidence and conditional stage distribution of one age group.
#[derive(Debug, Clone, PartialEq)]
pub struct EpiRow {
    pub group: AgeGroup,
    /// Probability of a first diagnosis within the two-year interval.
    pub incidence: f64,
    /// Stage distribution given a diagnosis, indexed by [`Stage::diagnosed_index`].
    pub cond_stage: [f64; 5],
}

impl EpiRow {
    pub fn cond(&self, stage: Stage) -> f64 {
        stage.diagnosed_index().map_or(0.0, |i| self.cond_stage[i])
    }

    fn issues(&self) -> Vec<Issue> {
        let mut issues = Vec::new();
        let src = format!("age group {}", self.group);
        if !(0.0..=1.0).contains(&self.incidence) || self.incidence.is_nan() {
            issues.push(Issue::new(&src, format!("incidence {} outside [0, 1]", self.incidence)));
        }
        for (i, p) in self.cond_stage.iter().enumerate() {
            if *p < 0.0 || p.is_nan() {
                issues.push(Issue::new(
                    &src,
                    format!("conditional probability of stage {i} is negative ({p})"),
                ));
            }
        }
        let total = compensated_sum(self.cond_stage);
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            issues.push(Issue::new(
                &src,
                format!("conditional stage distribution sums to {total}, expected 1"),
            ));
        }
        issues
    }
}

/// Per-age incidence and conditional stage mix under one policy variant.
#[derive(Debug, Clone, PartialEq)]
pub struct EpidemiologyTable {
    pub rows: Vec<EpiRow>,
}

impl EpidemiologyTable {
    pub fn new(rows: Vec<EpiRow>) -> Result<Self> {
        let table = EpidemiologyTable { rows };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        let issues: Vec<Issue> = self.rows.iter().flat_map(EpiRow::issues).collect();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }

    pub fn check_grid(&self, grid: &AgeGrid) -> Result<()> {
        let matches = self.rows.len() == grid.len() && self.rows.iter().zip(grid.groups()).all(|(r, g)| r.group == *g);
        if matches {
            Ok(())
        } else {
            Err(Error::validation(
                "epidemiology table",
                "rows do not match the age grid",
            ))
        }
    }

    pub fn row(&self, j: usize) -> &EpiRow {
        &self.rows[j]
    }

    pub fn row_by_start(&self, start: u32) -> Option<&EpiRow> {
        self.rows.iter().find(|r| r.group.start == start)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Unconditional state distribution per age group, over all six states.
#[derive(Debug, Clone, PartialEq)]
pub struct StageDistribution {
    rows: Vec<[f64; 6]>,
}

fn state_index(stage: Stage) -> usize {
    (stage.code() + 1) as usize
}

impl StageDistribution {
    pub fn from_rows(rows: Vec<[f64; 6]>) -> Result<Self> {
        let mut issues = Vec::new();
        for (j, row) in rows.iter().enumerate() {
            if row.iter().any(|p| *p < 0.0 || p.is_nan()) {
                issues.push(Issue::new(format!("age index {j}"), "negative state probability"));
            }
            let total = compensated_sum(*row);
            if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
                issues.push(Issue::new(
                    format!("age index {j}"),
                    format!("state distribution sums to {total}"),
                ));
            }
        }
        if issues.is_empty() {
            Ok(StageDistribution { rows })
        } else {
            Err(Error::Validation(issues))
        }
    }

    pub fn mu(&self, j: usize, stage: Stage) -> f64 {
        self.rows[j][state_index(stage)]
    }

    pub fn row(&self, j: usize) -> &[f64; 6] {
        &self.rows[j]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Combines incidence with the conditional stage mix:
/// `mu(k) = incidence * cond(k)` for diagnosed stages, `mu(NoCancer) = 1 - incidence`.
pub fn build_mu(epi: &EpidemiologyTable) -> Result<StageDistribution> {
    epi.validate()?;
    let rows = epi
        .rows
        .iter()
        .map(|r| {
            let mut mu = [0.0; 6];
            mu[state_index(Stage::NoCancer)] = 1.0 - r.incidence;
            for s in Stage::DIAGNOSED {
                mu[state_index(s)] = r.incidence * r.cond(s);
            }
            mu
        })
        .collect();
    StageDistribution::from_rows(rows)
}
