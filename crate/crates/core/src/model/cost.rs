use std::fmt;

use crate::error::{Error, Issue, Result};

use super::age::{AgeGrid, AgeGroup};
use super::stage::Stage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeathCause {
    BreastCancer,
    Other,
}

/// Age band of the treatment cost tables, keyed by age at diagnosis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CostBand {
    pub start: u32,
    pub end: u32,
}

impl CostBand {
    /// Groups map to the band holding their first year of age, so 74-75
    /// belongs to 70-74.
    pub fn covers(&self, group: AgeGroup) -> bool {
        (self.start..=self.end).contains(&group.start)
    }
}

impl fmt::Display for CostBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// Treatment costs in euros: first year, each of years 2–5, and the last
/// year before a breast-cancer death.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostTriple {
    pub first_year: f64,
    pub maintenance: f64,
    pub terminal: f64,
}

impl CostTriple {
    pub fn scaled(self, factor: f64) -> Self {
        CostTriple {
            first_year: self.first_year * factor,
            maintenance: self.maintenance * factor,
            terminal: self.terminal * factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub band: CostBand,
    /// Indexed by [`Stage::diagnosed_index`].
    pub stages: [CostTriple; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    /// Euros per invitee in a screened age group.
    pub screening_unit_cost: f64,
    pub rows: Vec<CostRow>,
}

/// Total treatment cost of a case that lives `years` after diagnosis (the
/// diagnosis year is year 1) and then dies of `cause`.
///
/// Other-cause deaths pay the first-year cost plus up to four maintenance
/// years. Breast-cancer deaths additionally pay the terminal-year cost, which
/// replaces the final treatment year.
pub fn schedule_cost(costs: CostTriple, years: u32, cause: DeathCause) -> Result<f64> {
    if years < 1 {
        return Err(Error::Domain(format!(
            "years lived after diagnosis must be at least 1, got {years}"
        )));
    }
    let n = years as f64;
    let CostTriple {
        first_year: c1,
        maintenance: c2,
        terminal: c3,
    } = costs;
    Ok(match cause {
        DeathCause::Other => match years {
            1..=5 => c1 + (n - 1.0) * c2,
            _ => c1 + 4.0 * c2,
        },
        DeathCause::BreastCancer => match years {
            1 | 2 => (n - 1.0) * c1 + c3,
            3..=5 => c1 + (n - 2.0) * c2 + c3,
            _ => c1 + 4.0 * c2 + c3,
        },
    })
}

/// Cost of a case diagnosed in cost band `band` (index into `costs.rows`).
pub fn per_case_cost(costs: &CostModel, band: usize, stage: Stage, years: u32, cause: DeathCause) -> Result<f64> {
    let row = costs
        .rows
        .get(band)
        .ok_or_else(|| Error::Data(format!("no cost band with index {band}")))?;
    let k = stage
        .diagnosed_index()
        .ok_or_else(|| Error::Domain("undiagnosed women carry no treatment cost".into()))?;
    schedule_cost(row.stages[k], years, cause)
}

impl CostModel {
    /// Finnish specialised-care cost tables by age at diagnosis and stage,
    /// with 30 euros per screening invitee.
    pub fn reference() -> Self {
        // (band, [C1; 5], [C2; 5], [C3; 5]) for stages 0..=4
        #[rustfmt::skip]
        const TABLE: [((u32, u32), [f64; 5], [f64; 5], [f64; 5]); 7] = [
            ((46, 49), [24800., 20400., 28400., 33300., 15300.], [4000., 2400., 3300., 6400., 2000.], [38100., 33100., 38900., 55400., 29200.]),
            ((50, 54), [22400., 18000., 26100., 30900., 12900.], [3700., 2000., 2900., 6000., 1600.], [31500., 26600., 32400., 48900., 22700.]),
            ((55, 59), [23300., 18800., 26900., 31800., 13800.], [3400., 1700., 2600., 5700., 1300.], [27700., 22800., 28500., 45000., 18900.]),
            ((60, 64), [20900., 16400., 24500., 29400., 11300.], [3200., 1500., 2400., 5500., 1100.], [24600., 19700., 25500., 42000., 15800.]),
            ((65, 69), [21100., 16600., 24700., 29600., 11600.], [3400., 1800., 2600., 5700., 1300.], [26100., 21200., 26900., 43400., 17300.]),
            ((70, 74), [18700., 14300., 22300., 27200., 9200.], [3200., 1500., 2400., 5500., 1100.], [16900., 11900., 17700., 34200., 8000.]),
            ((75, 99), [14200., 9800., 17800., 22700., 4700.], [3000., 1300., 2200., 5300., 900.], [12300., 7300., 13100., 29600., 3400.]),
        ];
        let rows = TABLE
            .iter()
            .map(|&((start, end), c1, c2, c3)| CostRow {
                band: CostBand { start, end },
                stages: std::array::from_fn(|k| CostTriple {
                    first_year: c1[k],
                    maintenance: c2[k],
                    terminal: c3[k],
                }),
            })
            .collect();
        CostModel {
            screening_unit_cost: 30.0,
            rows,
        }
    }

    pub fn band_index(&self, group: AgeGroup) -> Option<usize> {
        self.rows.iter().position(|r| r.band.covers(group))
    }

    pub fn band_index_of(&self, start: u32, end: u32) -> Option<usize> {
        self.rows
            .iter()
            .position(|r| r.band.start == start && r.band.end == end)
    }

    /// Cost band index for every group of `grid`.
    pub fn band_map(&self, grid: &AgeGrid) -> Result<Vec<usize>> {
        grid.groups()
            .iter()
            .map(|g| {
                self.band_index(*g)
                    .ok_or_else(|| Error::validation("cost tables", format!("no cost band covers age group {g}")))
            })
            .collect()
    }

    pub fn triple(&self, band: usize, stage: Stage) -> Option<CostTriple> {
        let k = stage.diagnosed_index()?;
        self.rows.get(band).map(|r| r.stages[k])
    }

    /// Same tables with every treatment cost multiplied by `factor`.
    pub fn with_treatment_scaled(&self, factor: f64) -> Self {
        CostModel {
            screening_unit_cost: self.screening_unit_cost,
            rows: self
                .rows
                .iter()
                .map(|r| CostRow {
                    band: r.band,
                    stages: r.stages.map(|t| t.scaled(factor)),
                })
                .collect(),
        }
    }

    pub fn validate(&self, grid: &AgeGrid) -> Result<()> {
        let mut issues = Vec::new();
        if !(self.screening_unit_cost >= 0.0) {
            issues.push(Issue::new(
                "cost model",
                format!("negative screening unit cost {}", self.screening_unit_cost),
            ));
        }
        for r in &self.rows {
            if r.band.end < r.band.start {
                issues.push(Issue::new("cost model", format!("empty band {}", r.band)));
            }
            for (k, t) in r.stages.iter().enumerate() {
                if [t.first_year, t.maintenance, t.terminal].iter().any(|c| !(*c >= 0.0)) {
                    issues.push(Issue::new(
                        "cost model",
                        format!("negative cost in band {} stage {k}", r.band),
                    ));
                }
            }
        }
        for g in grid.groups() {
            let covering = self.rows.iter().filter(|r| r.band.covers(*g)).count();
            if covering != 1 {
                issues.push(Issue::new(
                    "cost model",
                    format!("age group {g} is covered by {covering} cost bands, expected 1"),
                ));
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }
}
