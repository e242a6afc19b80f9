use crate::error::{Error, Result};

use super::age::AgeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Screening {
    Screen,
    NoScreen,
}

/// Screen / no-screen decision for every age group of a grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub name: String,
    decisions: Vec<Screening>,
}

impl Policy {
    pub fn new(name: impl Into<String>, decisions: Vec<Screening>) -> Self {
        Policy {
            name: name.into(),
            decisions,
        }
    }

    /// Screen every group lying inside `lo..=hi` years of age.
    pub fn screen_ages(name: impl Into<String>, grid: &AgeGrid, lo: u32, hi: u32) -> Self {
        let decisions = grid
            .groups()
            .iter()
            .map(|g| {
                if g.within(lo, hi) {
                    Screening::Screen
                } else {
                    Screening::NoScreen
                }
            })
            .collect();
        Policy::new(name, decisions)
    }

    pub fn no_screening(name: impl Into<String>, grid: &AgeGrid) -> Self {
        Policy::new(name, vec![Screening::NoScreen; grid.len()])
    }

    pub fn decisions(&self) -> &[Screening] {
        &self.decisions
    }

    pub fn at(&self, j: usize) -> Screening {
        self.decisions[j]
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn check_grid(&self, grid: &AgeGrid) -> Result<()> {
        if self.decisions.len() != grid.len() {
            return Err(Error::validation(
                format!("policy {}", self.name),
                format!("has {} decisions for {} age groups", self.decisions.len(), grid.len()),
            ));
        }
        Ok(())
    }
}
