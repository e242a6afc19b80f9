use std::fmt;

/// Observed state at a screening round. `NoCancer` is never a diagnosis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    NoCancer,
    Unknown,
    Localized,
    Regional,
    Distant,
    InSitu,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::NoCancer,
        Stage::Unknown,
        Stage::Localized,
        Stage::Regional,
        Stage::Distant,
        Stage::InSitu,
    ];

    pub const DIAGNOSED: [Stage; 5] = [
        Stage::Unknown,
        Stage::Localized,
        Stage::Regional,
        Stage::Distant,
        Stage::InSitu,
    ];

    /// Registry coding: -1 for no cancer, 0..=4 for diagnosed stages.
    pub fn code(self) -> i32 {
        match self {
            Stage::NoCancer => -1,
            Stage::Unknown => 0,
            Stage::Localized => 1,
            Stage::Regional => 2,
            Stage::Distant => 3,
            Stage::InSitu => 4,
        }
    }

    pub fn from_code(code: i32) -> Option<Stage> {
        Stage::ALL.iter().copied().find(|s| s.code() == code)
    }

    /// Position among the diagnosed stages (0..5), `None` for `NoCancer`.
    pub fn diagnosed_index(self) -> Option<usize> {
        match self {
            Stage::NoCancer => None,
            s => Some(s.code() as usize),
        }
    }

    pub fn is_diagnosed(self) -> bool {
        self != Stage::NoCancer
    }

    pub fn label(self) -> &'static str {
        match self {
            Stage::NoCancer => "no cancer",
            Stage::Unknown => "unknown",
            Stage::Localized => "localized",
            Stage::Regional => "regional",
            Stage::Distant => "distant",
            Stage::InSitu => "in situ",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.code(), self.label())
    }
}
