use crate::error::{Error, Issue, Result};
use crate::sum::{compensated_sum, NeumaierSum};

use super::age::{AgeGrid, AgeGroup};
use super::epi::PROBABILITY_TOLERANCE;
use super::stage::Stage;

/// Tolerance for a time-to-death PMF summing to one after horizon truncation.
pub const PMF_TOLERANCE: f64 = 1e-6;

/// Time-to-death distribution after a diagnosis at one (age, stage).
///
/// Both vectors are indexed by whole years `t`; index 0 is always zero since
/// the diagnosis year counts as year 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosedSurvival {
    pub pmf: Vec<f64>,
    /// P(death from breast cancer | death in year t).
    pub bc_share: Vec<f64>,
}

impl DiagnosedSurvival {
    pub fn expected_years(&self) -> f64 {
        compensated_sum(self.pmf.iter().enumerate().map(|(t, p)| t as f64 * p))
    }

    pub fn max_t(&self) -> usize {
        self.pmf.len().saturating_sub(1)
    }
}

/// Interval outcome for women without a diagnosis, plus their full PMF
/// (indexed from t = 0) for mixing into the all-stage death-time distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct UndiagnosedSurvival {
    pub p_die_year0: f64,
    pub p_die_year1: f64,
    pub p_survive: f64,
    pub pmf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSurvival {
    pub group: AgeGroup,
    pub undiagnosed: UndiagnosedSurvival,
    pub diagnosed: [DiagnosedSurvival; 5],
}

impl GroupSurvival {
    pub fn stage(&self, stage: Stage) -> Option<&DiagnosedSurvival> {
        stage.diagnosed_index().map(|i| &self.diagnosed[i])
    }

    fn issues(&self, out: &mut Vec<Issue>) {
        let src = format!("survival {}", self.group);
        let horizon = self.group.max_years_left();
        let u = &self.undiagnosed;
        for (name, p) in [
            ("p_die_y0", u.p_die_year0),
            ("p_die_y1", u.p_die_year1),
            ("p_survive", u.p_survive),
        ] {
            if !(0.0..=1.0).contains(&p) {
                out.push(Issue::new(&src, format!("{name} = {p} outside [0, 1]")));
            }
        }
        let split = compensated_sum([u.p_die_year0, u.p_die_year1, u.p_survive]);
        if (split - 1.0).abs() > PROBABILITY_TOLERANCE {
            out.push(Issue::new(&src, format!("interval split sums to {split}, expected 1")));
        }
        check_pmf(&src, "stage -1", &u.pmf, horizon, out);
        let at = |t: usize| u.pmf.get(t).copied().unwrap_or(0.0);
        if (at(0) - u.p_die_year0).abs() > PROBABILITY_TOLERANCE
            || (at(1) - u.p_die_year1).abs() > PROBABILITY_TOLERANCE
        {
            out.push(Issue::new(
                &src,
                "stage -1 PMF at t = 0, 1 disagrees with the interval split",
            ));
        }
        let beyond = compensated_sum(u.pmf.iter().skip(2).copied());
        if (beyond - u.p_survive).abs() > PMF_TOLERANCE {
            out.push(Issue::new(
                &src,
                format!(
                    "stage -1 PMF mass beyond the interval is {beyond}, p_survive is {}",
                    u.p_survive
                ),
            ));
        }

        for s in Stage::DIAGNOSED {
            let d = self.stage(s).expect("diagnosed stage");
            let what = format!("stage {}", s.code());
            check_pmf(&src, &what, &d.pmf, horizon, out);
            if d.pmf.first().copied().unwrap_or(0.0) != 0.0 {
                out.push(Issue::new(&src, format!("{what} has mass at t = 0")));
            }
            if d.bc_share.len() != d.pmf.len() {
                out.push(Issue::new(&src, format!("{what} cause split length mismatch")));
            }
            if d.bc_share.iter().any(|c| !(0.0..=1.0).contains(c)) {
                out.push(Issue::new(&src, format!("{what} cause split outside [0, 1]")));
            }
        }
    }
}

fn check_pmf(src: &str, what: &str, pmf: &[f64], horizon: usize, out: &mut Vec<Issue>) {
    if pmf.iter().any(|p| *p < 0.0 || p.is_nan()) {
        out.push(Issue::new(src, format!("{what} PMF has negative mass")));
    }
    if pmf.len() > horizon + 1 && pmf[horizon + 1..].iter().any(|p| *p != 0.0) {
        out.push(Issue::new(
            src,
            format!("{what} PMF has mass beyond the {horizon}-year horizon"),
        ));
    }
    let total = compensated_sum(pmf.iter().copied());
    if (total - 1.0).abs() > PMF_TOLERANCE {
        out.push(Issue::new(src, format!("{what} PMF mass is {total}, expected 1")));
    }
}

/// Stage-specific survival for every age group; shared by all policies.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalModel {
    pub groups: Vec<GroupSurvival>,
}

impl SurvivalModel {
    pub fn new(groups: Vec<GroupSurvival>) -> Result<Self> {
        let model = SurvivalModel { groups };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        for g in &self.groups {
            g.issues(&mut issues);
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }

    pub fn check_grid(&self, grid: &AgeGrid) -> Result<()> {
        let matches =
            self.groups.len() == grid.len() && self.groups.iter().zip(grid.groups()).all(|(s, g)| s.group == *g);
        if matches {
            Ok(())
        } else {
            Err(Error::validation("survival model", "groups do not match the age grid"))
        }
    }

    pub fn group(&self, j: usize) -> &GroupSurvival {
        &self.groups[j]
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// `lambda_{j,k}(t)`; zero outside the stored support.
    pub fn lambda(&self, j: usize, stage: Stage, t: usize) -> f64 {
        let g = &self.groups[j];
        let pmf = match g.stage(stage) {
            Some(d) => &d.pmf,
            None => &g.undiagnosed.pmf,
        };
        pmf.get(t).copied().unwrap_or(0.0)
    }

    /// Longest support among all stages of group `j`.
    pub fn max_t(&self, j: usize) -> usize {
        let g = &self.groups[j];
        g.diagnosed
            .iter()
            .map(|d| d.pmf.len())
            .chain(std::iter::once(g.undiagnosed.pmf.len()))
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }
}

/// Joint distribution of (years lived, cause of death) after a diagnosis.
#[derive(Debug, Clone, PartialEq)]
pub struct CausePmf {
    pub breast_cancer: Vec<f64>,
    pub other: Vec<f64>,
}

impl CausePmf {
    pub fn total(&self) -> f64 {
        let mut acc = NeumaierSum::new();
        for (bc, other) in self.breast_cancer.iter().zip(&self.other) {
            acc += *bc;
            acc += *other;
        }
        acc.total()
    }
}

/// Splits `lambda_{j,k}` by cause of death.
pub fn build_pi(surv: &SurvivalModel, j: usize, stage: Stage) -> Result<CausePmf> {
    let group = surv
        .groups
        .get(j)
        .ok_or_else(|| Error::Data(format!("no survival data for age index {j}")))?;
    let d = group.stage(stage).ok_or_else(|| {
        Error::Data(format!(
            "no diagnosed survival for stage {} in {}",
            stage.code(),
            group.group
        ))
    })?;
    let (breast_cancer, other) = d
        .pmf
        .iter()
        .zip(&d.bc_share)
        .map(|(lambda, share)| (share * lambda, (1.0 - share) * lambda))
        .unzip();
    Ok(CausePmf { breast_cancer, other })
}
