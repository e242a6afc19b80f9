use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

use super::age::{AgeGrid, AgeGroup};
use super::cost::{schedule_cost, CostModel, DeathCause};
use super::epi::{build_mu, EpidemiologyTable, StageDistribution};
use super::policy::{Policy, Screening};
use super::ratio::cost_per_life_year;
use super::stage::Stage;
use super::survival::{build_pi, SurvivalModel};

pub const DEFAULT_COHORT_SIZE: f64 = 100_000.0;

/// Outcome of evaluating one policy over the cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub name: String,
    pub label: String,
    pub groups: Vec<AgeGroup>,
    pub screening: Vec<Screening>,
    pub incidence: Vec<f64>,
    /// Expected number invited at each round, `N_1 ..= N_J`.
    pub trajectory: Vec<f64>,
    pub total_life_years: f64,
    pub total_cost: f64,
    pub cost_by_age: Vec<f64>,
    pub bc_deaths: f64,
    pub cost_per_life_year: Option<f64>,
}

/// `P(T_j = t)` for `t = 0 ..= max_t(j)`: the stage mixture of the
/// time-to-death distributions at round `j`.
pub fn death_time_distribution(j: usize, mu: &StageDistribution, surv: &SurvivalModel) -> Vec<f64> {
    (0..=surv.max_t(j))
        .map(|t| {
            let mut acc = NeumaierSum::new();
            for s in Stage::ALL {
                acc += surv.lambda(j, s, t) * mu.mu(j, s);
            }
            acc.total()
        })
        .collect()
}

fn check_dims(mu: &StageDistribution, surv: &SurvivalModel) -> Result<()> {
    if mu.len() != surv.len() {
        return Err(Error::Data(format!(
            "stage distribution has {} age groups, survival model {}",
            mu.len(),
            surv.len()
        )));
    }
    Ok(())
}

/// Share of round-`j` invitees who leave the screening population before
/// round `j + 1`: deaths within the two-year interval plus diagnosed women
/// who survive it.
fn removal_probability(j: usize, mu: &StageDistribution, surv: &SurvivalModel) -> f64 {
    let g = surv.group(j);
    let mut acc = NeumaierSum::new();
    let undiagnosed = mu.mu(j, Stage::NoCancer);
    acc += undiagnosed * g.undiagnosed.p_die_year0;
    acc += undiagnosed * g.undiagnosed.p_die_year1;
    for s in Stage::DIAGNOSED {
        let d = g.stage(s).expect("diagnosed stage");
        let m = mu.mu(j, s);
        // deaths in the diagnosis year, then survivors of it
        acc += m * d.pmf.get(1).copied().unwrap_or(0.0);
        for p in d.pmf.iter().skip(2) {
            acc += m * p;
        }
    }
    acc.total()
}

/// Expected screening population `N_1 ..= N_J`, starting from `n0` invitees.
pub fn cohort_trajectory(mu: &StageDistribution, surv: &SurvivalModel, n0: f64) -> Result<Vec<f64>> {
    check_dims(mu, surv)?;
    if !(n0 > 0.0) || !n0.is_finite() {
        return Err(Error::Domain(format!("cohort size must be positive, got {n0}")));
    }
    let mut trajectory = Vec::with_capacity(mu.len());
    let mut n = n0;
    for j in 0..mu.len() {
        trajectory.push(n);
        n *= (1.0 - removal_probability(j, mu, surv)).max(0.0);
    }
    Ok(trajectory)
}

/// Total expected remaining life years of the cohort.
///
/// Women still invited at round `j >= 2` are credited the two years since the
/// previous round; undiagnosed women dying in the second interval year get one
/// year; diagnosed women get their full expected survival. Nothing is credited
/// past the last round.
pub fn expected_life_years(mu: &StageDistribution, surv: &SurvivalModel, trajectory: &[f64]) -> Result<f64> {
    check_dims(mu, surv)?;
    if trajectory.len() != mu.len() {
        return Err(Error::Data("trajectory length does not match age groups".into()));
    }
    let mut total = NeumaierSum::new();
    for (j, &n) in trajectory.iter().enumerate() {
        if j > 0 {
            total += 2.0 * n;
        }
        let g = surv.group(j);
        let mut per_person = NeumaierSum::new();
        per_person += surv.lambda(j, Stage::NoCancer, 1) * mu.mu(j, Stage::NoCancer);
        for s in Stage::DIAGNOSED {
            per_person += mu.mu(j, s) * g.stage(s).expect("diagnosed stage").expected_years();
        }
        total += per_person.total() * n;
    }
    Ok(total.total())
}

/// Expected treatment cost of one case diagnosed at round `j` in `stage`.
fn expected_case_cost(j: usize, stage: Stage, surv: &SurvivalModel, costs: &CostModel, band: usize) -> Result<f64> {
    let pi = build_pi(surv, j, stage)?;
    let triple = costs
        .triple(band, stage)
        .ok_or_else(|| Error::Data(format!("no cost band with index {band}")))?;
    let mut acc = NeumaierSum::new();
    for (t, (bc, other)) in pi.breast_cancer.iter().zip(&pi.other).enumerate().skip(1) {
        if *bc != 0.0 {
            acc += schedule_cost(triple, t as u32, DeathCause::BreastCancer)? * bc;
        }
        if *other != 0.0 {
            acc += schedule_cost(triple, t as u32, DeathCause::Other)? * other;
        }
    }
    Ok(acc.total())
}

/// Expected screening plus treatment cost attributed to round `j`.
pub fn expected_costs_age(
    j: usize,
    policy: &Policy,
    mu: &StageDistribution,
    surv: &SurvivalModel,
    costs: &CostModel,
    trajectory: &[f64],
) -> Result<f64> {
    let group = surv.group(j).group;
    let band = costs
        .band_index(group)
        .ok_or_else(|| Error::Data(format!("no cost band covers age group {group}")))?;
    let n = trajectory[j];
    let mut acc = NeumaierSum::new();
    if policy.at(j) == Screening::Screen {
        acc += n * costs.screening_unit_cost;
    }
    for s in Stage::DIAGNOSED {
        let m = mu.mu(j, s);
        if m != 0.0 {
            acc += n * m * expected_case_cost(j, s, surv, costs, band)?;
        }
    }
    Ok(acc.total())
}

pub fn expected_costs_total(per_age: &[f64]) -> f64 {
    per_age.iter().copied().sum::<NeumaierSum>().total()
}

/// Expected number of breast-cancer deaths over the cohort's lifetime.
pub fn expected_bc_deaths(mu: &StageDistribution, surv: &SurvivalModel, trajectory: &[f64]) -> Result<f64> {
    check_dims(mu, surv)?;
    let mut total = NeumaierSum::new();
    for (j, &n) in trajectory.iter().enumerate() {
        for s in Stage::DIAGNOSED {
            let pi = build_pi(surv, j, s)?;
            let m = mu.mu(j, s);
            for bc in &pi.breast_cancer {
                total += n * m * bc;
            }
        }
    }
    Ok(total.total())
}

/// Runs the full model for `policy` and packs the totals.
pub fn evaluate(
    grid: &AgeGrid,
    policy: &Policy,
    epi: &EpidemiologyTable,
    surv: &SurvivalModel,
    costs: &CostModel,
    cohort_size: f64,
) -> Result<ScenarioResult> {
    policy.check_grid(grid)?;
    epi.check_grid(grid)?;
    surv.check_grid(grid)?;
    costs.validate(grid)?;
    let mu = build_mu(epi)?;
    let trajectory = cohort_trajectory(&mu, surv, cohort_size)?;
    let total_life_years = expected_life_years(&mu, surv, &trajectory)?;
    let cost_by_age = (0..grid.len())
        .map(|j| expected_costs_age(j, policy, &mu, surv, costs, &trajectory))
        .collect::<Result<Vec<_>>>()?;
    let total_cost = expected_costs_total(&cost_by_age);
    let bc_deaths = expected_bc_deaths(&mu, surv, &trajectory)?;
    Ok(ScenarioResult {
        name: policy.name.clone(),
        label: policy.name.clone(),
        groups: grid.groups().to_vec(),
        screening: policy.decisions().to_vec(),
        incidence: epi.rows.iter().map(|r| r.incidence).collect(),
        trajectory,
        total_life_years,
        total_cost,
        cost_by_age,
        bc_deaths,
        cost_per_life_year: cost_per_life_year(total_cost, total_life_years),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cost::{CostRow, CostTriple};
    use crate::model::epi::EpiRow;
    use crate::model::survival::{DiagnosedSurvival, GroupSurvival, UndiagnosedSurvival};

    fn point(t: usize) -> Vec<f64> {
        let mut v = vec![0.0; t + 1];
        v[t] = 1.0;
        v
    }

    fn diag(pmf: Vec<f64>, bc: f64) -> DiagnosedSurvival {
        let n = pmf.len();
        DiagnosedSurvival {
            pmf,
            bc_share: vec![bc; n],
        }
    }

    fn group(start: u32, split: (f64, f64, f64), diagnosed: [DiagnosedSurvival; 5]) -> GroupSurvival {
        let (p0, p1, ps) = split;
        GroupSurvival {
            group: AgeGroup::new(start),
            undiagnosed: UndiagnosedSurvival {
                p_die_year0: p0,
                p_die_year1: p1,
                p_survive: ps,
                pmf: vec![p0, p1, ps],
            },
            diagnosed,
        }
    }

    fn mu_one(row: [f64; 6]) -> StageDistribution {
        StageDistribution::from_rows(vec![row]).unwrap()
    }

    #[test]
    fn single_component_mixture_is_undiagnosed_pmf() {
        let surv = SurvivalModel {
            groups: vec![group(46, (0.1, 0.2, 0.7), std::array::from_fn(|_| diag(point(3), 0.0)))],
        };
        let mu = mu_one([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let p = death_time_distribution(0, &mu, &surv);
        assert_eq!(p, vec![0.1, 0.2, 0.7, 0.0]);
    }

    #[test]
    fn two_point_masses() {
        let surv = SurvivalModel {
            groups: vec![group(46, (0.0, 0.0, 1.0), std::array::from_fn(|_| diag(point(4), 0.0)))],
        };
        let mu = mu_one([0.5, 0.0, 0.5, 0.0, 0.0, 0.0]);
        let p = death_time_distribution(0, &mu, &surv);
        assert_eq!(p, vec![0.0, 0.0, 0.5, 0.0, 0.5]);
    }

    #[test]
    fn three_stage_mixture_matches_hand_expansion() {
        let pmfs = [
            vec![0.0, 0.5, 0.5],
            vec![0.0, 0.2, 0.3, 0.5],
            vec![0.0, 1.0],
            vec![0.0, 0.1, 0.1, 0.8],
            vec![0.0, 0.0, 1.0],
        ];
        let surv = SurvivalModel {
            groups: vec![group(46, (0.05, 0.15, 0.8), pmfs.clone().map(|p| diag(p, 0.0)))],
        };
        let mu = mu_one([0.7, 0.0, 0.2, 0.1, 0.0, 0.0]);
        let p = death_time_distribution(0, &mu, &surv);
        // Hand expansion over k in {-1, 1, 2}:
        // t=0: 0.7*0.05
        // t=1: 0.7*0.15 + 0.2*0.2 + 0.1*1.0
        // t=2: 0.7*0.8 + 0.2*0.3
        // t=3: 0.2*0.5
        let expected = [0.035, 0.105 + 0.04 + 0.1, 0.56 + 0.06, 0.1];
        assert_eq!(p.len(), 4);
        for (a, b) in p.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_deaths_no_incidence_keeps_cohort() {
        let surv = SurvivalModel {
            groups: (0..3)
                .map(|i| {
                    group(
                        46 + 2 * i,
                        (0.0, 0.0, 1.0),
                        std::array::from_fn(|_| diag(point(2), 0.0)),
                    )
                })
                .collect(),
        };
        let mu = StageDistribution::from_rows(vec![[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]; 3]).unwrap();
        let n = cohort_trajectory(&mu, &surv, 1000.0).unwrap();
        assert_eq!(n, vec![1000.0, 1000.0, 1000.0]);
    }

    #[test]
    fn diagnosed_survivors_leave_the_cohort() {
        let surv = SurvivalModel {
            groups: (0..2)
                .map(|i| {
                    group(
                        46 + 2 * i,
                        (0.0, 0.0, 1.0),
                        std::array::from_fn(|_| diag(point(5), 0.0)),
                    )
                })
                .collect(),
        };
        let row = [0.99, 0.0, 0.01, 0.0, 0.0, 0.0];
        let mu = StageDistribution::from_rows(vec![row; 2]).unwrap();
        let n = cohort_trajectory(&mu, &surv, 100.0).unwrap();
        assert!((n[1] - 99.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_cohort() {
        let surv = SurvivalModel {
            groups: vec![group(46, (0.0, 0.0, 1.0), std::array::from_fn(|_| diag(point(2), 0.0)))],
        };
        let mu = mu_one([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(cohort_trajectory(&mu, &surv, 0.0).is_err());
    }

    #[test]
    fn life_years_single_round_cases() {
        // all undiagnosed live exactly one more year
        let surv = SurvivalModel {
            groups: vec![group(46, (0.0, 1.0, 0.0), std::array::from_fn(|_| diag(point(5), 0.0)))],
        };
        let mu = mu_one([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(expected_life_years(&mu, &surv, &[100.0]).unwrap(), 100.0);

        // everyone localized with E T = 5
        let mu = mu_one([0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(expected_life_years(&mu, &surv, &[200.0]).unwrap(), 1000.0);
    }

    fn costs_46() -> CostModel {
        let mut c = CostModel::reference();
        c.rows.retain(|r| r.band.start == 46);
        c
    }

    #[test]
    fn screening_only_costs() {
        let surv = SurvivalModel {
            groups: vec![group(46, (0.0, 0.0, 1.0), std::array::from_fn(|_| diag(point(2), 1.0)))],
        };
        let mu = mu_one([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let costs = costs_46();
        let ns = Policy::new("ns", vec![Screening::NoScreen]);
        let s = Policy::new("s", vec![Screening::Screen]);
        assert_eq!(expected_costs_age(0, &ns, &mu, &surv, &costs, &[1000.0]).unwrap(), 0.0);
        assert_eq!(
            expected_costs_age(0, &s, &mu, &surv, &costs, &[1000.0]).unwrap(),
            30000.0
        );
    }

    #[test]
    fn single_cell_cost_expansion() {
        // pi is a point mass at (t = 1, breast cancer) for every stage
        let surv = SurvivalModel {
            groups: vec![group(46, (0.0, 0.0, 1.0), std::array::from_fn(|_| diag(point(1), 1.0)))],
        };
        let mu = mu_one([0.999, 0.0, 0.0, 0.0, 0.001, 0.0]);
        let costs = costs_46();
        let s = Policy::new("s", vec![Screening::Screen]);
        let c = expected_costs_age(0, &s, &mu, &surv, &costs, &[100_000.0]).unwrap();
        assert!((c - (5_540_000.0 + 3_000_000.0)).abs() < 1e-6, "{c}");
    }

    #[test]
    fn totals_and_bc_deaths() {
        assert_eq!(expected_costs_total(&[]), 0.0);
        assert_eq!(expected_costs_total(&[100.0, 200.0, 300.0]), 600.0);

        let surv = SurvivalModel {
            groups: vec![group(46, (0.0, 0.0, 1.0), std::array::from_fn(|_| diag(point(2), 0.0)))],
        };
        let mu = mu_one([0.9, 0.1, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(expected_bc_deaths(&mu, &surv, &[100.0]).unwrap(), 0.0);
        let surv_bc = SurvivalModel {
            groups: vec![group(46, (0.0, 0.0, 1.0), std::array::from_fn(|_| diag(point(2), 1.0)))],
        };
        let none = mu_one([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(expected_bc_deaths(&none, &surv_bc, &[100.0]).unwrap(), 0.0);
        assert!((expected_bc_deaths(&mu, &surv_bc, &[100.0]).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn evaluate_checks_dimensions() {
        let grid = AgeGrid::new(46, 2).unwrap();
        let surv = SurvivalModel {
            groups: vec![group(46, (0.0, 0.0, 1.0), std::array::from_fn(|_| diag(point(2), 0.0)))],
        };
        let epi = EpidemiologyTable {
            rows: vec![EpiRow {
                group: AgeGroup::new(46),
                incidence: 0.0,
                cond_stage: [0.2; 5],
            }],
        };
        let costs = CostModel {
            screening_unit_cost: 0.0,
            rows: vec![CostRow {
                band: crate::model::CostBand { start: 46, end: 99 },
                stages: [CostTriple::default(); 5],
            }],
        };
        let policy = Policy::no_screening("x", &grid);
        assert!(evaluate(&grid, &policy, &epi, &surv, &costs, 1.0).is_err());
    }
}
