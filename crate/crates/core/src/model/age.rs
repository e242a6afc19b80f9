use std::fmt;

use crate::error::{Error, Result};

/// Nobody in the model survives to this age.
pub const HORIZON_AGE: u32 = 100;

/// A two-year age band, both ends inclusive (e.g. 46–47).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgeGroup {
    pub start: u32,
    pub end: u32,
}

impl AgeGroup {
    pub fn new(start: u32) -> Self {
        AgeGroup { start, end: start + 1 }
    }

    /// Longest possible remaining lifetime, in whole years, before the horizon.
    pub fn max_years_left(&self) -> usize {
        HORIZON_AGE.saturating_sub(self.start) as usize
    }

    pub fn within(&self, lo: u32, hi: u32) -> bool {
        self.start >= lo && self.end <= hi
    }
}

impl fmt::Display for AgeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// Ordered, contiguous two-year screening ages; index `j` is one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgeGrid {
    groups: Vec<AgeGroup>,
}

impl AgeGrid {
    /// Grid of `count` consecutive groups starting at `first_age`.
    pub fn new(first_age: u32, count: usize) -> Result<Self> {
        let groups = (0..count as u32).map(|i| AgeGroup::new(first_age + 2 * i)).collect();
        Self::from_groups(groups)
    }

    /// 46–47 through 98–99.
    pub fn standard() -> Self {
        Self::new(46, 27).expect("standard grid is valid")
    }

    pub fn from_groups(groups: Vec<AgeGroup>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::validation("age grid", "no age groups"));
        }
        for (i, g) in groups.iter().enumerate() {
            if g.end != g.start + 1 {
                return Err(Error::validation(
                    "age grid",
                    format!("group {g} does not span exactly two years"),
                ));
            }
            if g.end >= HORIZON_AGE {
                return Err(Error::validation(
                    "age grid",
                    format!("group {g} reaches the age-{HORIZON_AGE} horizon"),
                ));
            }
            if i > 0 && groups[i - 1].end + 1 != g.start {
                return Err(Error::validation(
                    "age grid",
                    format!("group {g} does not follow {}", groups[i - 1]),
                ));
            }
        }
        Ok(AgeGrid { groups })
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn groups(&self) -> &[AgeGroup] {
        &self.groups
    }

    pub fn group(&self, j: usize) -> AgeGroup {
        self.groups[j]
    }

    pub fn index_of_start(&self, start: u32) -> Option<usize> {
        self.groups.iter().position(|g| g.start == start)
    }

    pub fn index_of(&self, group: AgeGroup) -> Option<usize> {
        self.groups.iter().position(|g| *g == group)
    }
}
