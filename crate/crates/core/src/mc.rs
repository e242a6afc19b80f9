//! Individual-level replay of the cohort model.
//!
//! Each simulated woman walks the screening rounds, drawing diagnosis, stage,
//! survival time and cause of death from the same tables as the analytic
//! engine, and is credited life years and costs with the same conventions.
//! Every woman draws from her own ChaCha stream keyed by `(seed, index)`, and
//! records are reduced in index order, so an estimate does not depend on the
//! batch size or the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    schedule_cost, AgeGrid, CostModel, CostTriple, DeathCause, EpidemiologyTable, Policy, ScenarioResult, Screening,
    Stage, SurvivalModel,
};
use crate::sum::NeumaierSum;

/// Agreement threshold between analytic values and Monte Carlo means.
pub const ORACLE_STANDARD_ERRORS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub seed: u64,
    pub individuals: u64,
    /// Minimum number of individuals handed to one worker at a time.
    pub batch_size: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl McConfig {
    pub fn new(seed: u64, individuals: u64) -> Self {
        McConfig {
            seed,
            individuals,
            batch_size: 4096,
            threads: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.individuals == 0 {
            return Err(Error::Domain("Monte Carlo needs at least one individual".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Domain("batch size must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Domain("thread count must be at least 1".into()));
        }
        Ok(())
    }
}

/// One simulated woman's contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndividualRecord {
    /// Screening rounds she was invited to.
    pub rounds: u32,
    pub life_years: u32,
    pub cost: f64,
    pub bc_death: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moment {
    /// Cohort total: per-woman mean times the cohort size.
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub individuals: u64,
    pub cohort_size: f64,
    pub life_years: Moment,
    pub cost: Moment,
    pub bc_deaths: Moment,
}

#[derive(Debug, Clone)]
struct StageTables {
    /// Cumulative `lambda(t)` for t = 0..
    cumulative: Vec<f64>,
    bc_share: Vec<f64>,
    costs: CostTriple,
}

#[derive(Debug, Clone)]
struct RoundTables {
    screening_cost: f64,
    incidence: f64,
    cond_cumulative: [f64; 5],
    p_die_year0: f64,
    p_die_year1: f64,
    stages: Vec<StageTables>,
}

/// Sampling tables for one policy, precomputed from the model inputs.
#[derive(Debug, Clone)]
pub struct McModel {
    rounds: Vec<RoundTables>,
}

fn cumulative(values: &[f64]) -> Vec<f64> {
    let mut acc = NeumaierSum::new();
    values
        .iter()
        .map(|v| {
            acc += *v;
            acc.total()
        })
        .collect()
}

/// First index whose cumulative mass exceeds `u`; past the end (mass short
/// of one within tolerance) falls back to the last index carrying mass.
fn draw_index(cumulative: &[f64], u: f64) -> usize {
    match cumulative.iter().position(|c| u < *c) {
        Some(i) => i,
        None => {
            let mut last = cumulative.len() - 1;
            while last > 0 && cumulative[last] == cumulative[last - 1] {
                last -= 1;
            }
            last
        }
    }
}

impl McModel {
    pub fn new(
        grid: &AgeGrid,
        policy: &Policy,
        epi: &EpidemiologyTable,
        survival: &SurvivalModel,
        costs: &CostModel,
    ) -> Result<Self> {
        policy.check_grid(grid)?;
        epi.check_grid(grid)?;
        epi.validate()?;
        survival.check_grid(grid)?;
        survival.validate()?;
        costs.validate(grid)?;
        let bands = costs.band_map(grid)?;
        let rounds = (0..grid.len())
            .map(|j| {
                let row = epi.row(j);
                let g = survival.group(j);
                let cond = cumulative(&row.cond_stage);
                RoundTables {
                    screening_cost: match policy.at(j) {
                        Screening::Screen => costs.screening_unit_cost,
                        Screening::NoScreen => 0.0,
                    },
                    incidence: row.incidence,
                    cond_cumulative: std::array::from_fn(|k| cond[k]),
                    p_die_year0: g.undiagnosed.p_die_year0,
                    p_die_year1: g.undiagnosed.p_die_year1,
                    stages: Stage::DIAGNOSED
                        .iter()
                        .map(|s| {
                            let d = g.stage(*s).expect("diagnosed stage");
                            StageTables {
                                cumulative: cumulative(&d.pmf),
                                bc_share: d.bc_share.clone(),
                                costs: costs.triple(bands[j], *s).expect("band resolved"),
                            }
                        })
                        .collect(),
                }
            })
            .collect();
        Ok(McModel { rounds })
    }

    pub fn rounds(&self) -> usize {
        self.rounds.len()
    }
}

/// Random stream for individual `index`.
pub fn individual_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Walks one woman through the screening rounds.
///
/// Each round: pay the screening cost if screened; a diagnosis draws stage,
/// years lived and cause, credits those years and the treatment cost, and
/// ends the walk. Otherwise she dies in year 0 (no credit), dies in year 1
/// (one year), or survives to the next round (two years; none after the
/// last round).
pub fn simulate_individual<R: Rng + ?Sized>(rng: &mut R, model: &McModel) -> IndividualRecord {
    let mut life_years = 0;
    let mut cost = 0.0;
    let last = model.rounds.len() - 1;
    for (j, round) in model.rounds.iter().enumerate() {
        cost += round.screening_cost;
        if rng.random::<f64>() < round.incidence {
            let k = draw_index(&round.cond_cumulative, rng.random());
            let stage = &round.stages[k];
            let t = draw_index(&stage.cumulative, rng.random());
            let share = stage.bc_share.get(t).copied().unwrap_or(0.0);
            let cause = if rng.random::<f64>() < share {
                DeathCause::BreastCancer
            } else {
                DeathCause::Other
            };
            let years = t as u32;
            life_years += years;
            cost += schedule_cost(stage.costs, years.max(1), cause).expect("years >= 1");
            return IndividualRecord {
                rounds: j as u32 + 1,
                life_years,
                cost,
                bc_death: cause == DeathCause::BreastCancer,
            };
        }
        let v: f64 = rng.random();
        if v < round.p_die_year0 + round.p_die_year1 {
            if v >= round.p_die_year0 {
                life_years += 1;
            }
            return IndividualRecord {
                rounds: j as u32 + 1,
                life_years,
                cost,
                bc_death: false,
            };
        }
        if j < last {
            life_years += 2;
        }
    }
    IndividualRecord {
        rounds: model.rounds.len() as u32,
        life_years,
        cost,
        bc_death: false,
    }
}

/// Per-individual records in index order.
pub fn simulate_records(config: &McConfig, model: &McModel) -> Result<Vec<IndividualRecord>> {
    config.validate()?;
    let run = || {
        (0..config.individuals as usize)
            .into_par_iter()
            .with_min_len(config.batch_size)
            .map(|i| simulate_individual(&mut individual_stream(config.seed, i as u64), model))
            .collect::<Vec<_>>()
    };
    match config.threads {
        None => Ok(run()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Computation(format!("thread pool: {e}")))?;
            Ok(pool.install(run))
        }
    }
}

fn moment<I: Iterator<Item = f64> + Clone>(values: I, n: f64, scale: f64) -> Moment {
    let mean = values.clone().sum::<NeumaierSum>().total() / n;
    let sq = values.map(|x| (x - mean) * (x - mean)).sum::<NeumaierSum>().total();
    let variance = if n > 1.0 { sq / (n - 1.0) } else { 0.0 };
    Moment {
        mean: mean * scale,
        std_error: (variance / n).sqrt() * scale,
    }
}

/// Simulates `config.individuals` women and scales the means to a cohort
/// of `cohort_size`.
pub fn estimate(config: &McConfig, model: &McModel, cohort_size: f64) -> Result<McEstimate> {
    let records = simulate_records(config, model)?;
    let n = records.len() as f64;
    Ok(McEstimate {
        individuals: config.individuals,
        cohort_size,
        life_years: moment(records.iter().map(|r| r.life_years as f64), n, cohort_size),
        cost: moment(records.iter().map(|r| r.cost), n, cohort_size),
        bc_deaths: moment(records.iter().map(|r| r.bc_death as u8 as f64), n, cohort_size),
    })
}

/// Expected number invited at each round, scaled to a cohort of
/// `cohort_size`; compares with the analytic trajectory.
pub fn occupancy(records: &[IndividualRecord], rounds: usize, cohort_size: f64) -> Vec<Moment> {
    let n = records.len() as f64;
    (0..rounds)
        .map(|j| {
            moment(
                records.iter().map(|r| f64::from(u8::from(r.rounds as usize > j))),
                n,
                cohort_size,
            )
        })
        .collect()
}

/// One analytic-versus-simulated comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub quantity: &'static str,
    pub analytic: f64,
    pub simulated: Moment,
}

impl OracleCheck {
    /// Distance from the simulated mean in standard errors.
    pub fn z_score(&self) -> f64 {
        let diff = (self.analytic - self.simulated.mean).abs();
        if self.simulated.std_error > 0.0 {
            diff / self.simulated.std_error
        } else if diff <= self.slack() {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn slack(&self) -> f64 {
        1e-9 * self.analytic.abs().max(1.0)
    }

    pub fn passes(&self) -> bool {
        let diff = (self.analytic - self.simulated.mean).abs();
        diff <= ORACLE_STANDARD_ERRORS * self.simulated.std_error + self.slack()
    }
}

pub fn oracle_checks(analytic: &ScenarioResult, mc: &McEstimate) -> [OracleCheck; 3] {
    [
        OracleCheck {
            quantity: "life years",
            analytic: analytic.total_life_years,
            simulated: mc.life_years,
        },
        OracleCheck {
            quantity: "total cost",
            analytic: analytic.total_cost,
            simulated: mc.cost,
        },
        OracleCheck {
            quantity: "bc deaths",
            analytic: analytic.bc_deaths,
            simulated: mc.bc_deaths,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evaluate, DiagnosedSurvival, EpiRow, GroupSurvival, UndiagnosedSurvival};

    fn point(t: usize) -> Vec<f64> {
        let mut v = vec![0.0; t + 1];
        v[t] = 1.0;
        v
    }

    struct Fixture {
        grid: AgeGrid,
        epi: EpidemiologyTable,
        surv: SurvivalModel,
        costs: CostModel,
    }

    fn deterministic(j: usize, incidence: f64, stage_k: usize, t: usize, bc: f64) -> Fixture {
        let grid = AgeGrid::new(46, j).unwrap();
        let mut cond = [0.0; 5];
        cond[stage_k] = 1.0;
        let epi = EpidemiologyTable::new(
            grid.groups()
                .iter()
                .map(|g| EpiRow {
                    group: *g,
                    incidence,
                    cond_stage: cond,
                })
                .collect(),
        )
        .unwrap();
        let surv = SurvivalModel::new(
            grid.groups()
                .iter()
                .map(|g| GroupSurvival {
                    group: *g,
                    undiagnosed: UndiagnosedSurvival {
                        p_die_year0: 0.0,
                        p_die_year1: 0.0,
                        p_survive: 1.0,
                        pmf: vec![0.0, 0.0, 1.0],
                    },
                    diagnosed: std::array::from_fn(|_| DiagnosedSurvival {
                        pmf: point(t),
                        bc_share: vec![bc; t + 1],
                    }),
                })
                .collect(),
        )
        .unwrap();
        Fixture {
            grid,
            epi,
            surv,
            costs: CostModel::reference(),
        }
    }

    fn model(f: &Fixture, policy: &Policy) -> McModel {
        McModel::new(&f.grid, policy, &f.epi, &f.surv, &f.costs).unwrap()
    }

    #[test]
    fn no_cancer_walk_is_deterministic() {
        let f = deterministic(5, 0.0, 1, 3, 0.0);
        let policy = Policy::screen_ages("p", &f.grid, 46, 49);
        let m = model(&f, &policy);
        let mut rng = individual_stream(1, 0);
        let r = simulate_individual(&mut rng, &m);
        assert_eq!(r.life_years, 2 * (5 - 1));
        assert_eq!(r.cost, 60.0);
        assert!(!r.bc_death);
    }

    #[test]
    fn certain_distant_diagnosis_dies_in_first_year() {
        let f = deterministic(1, 1.0, 3, 1, 1.0);
        let policy = Policy::screen_ages("p", &f.grid, 46, 47);
        let m = model(&f, &policy);
        let r = simulate_individual(&mut individual_stream(9, 3), &m);
        assert_eq!(r.life_years, 1);
        assert_eq!(r.cost, 55400.0 + 30.0);
        assert!(r.bc_death);
    }

    #[test]
    fn replaying_a_seed_reproduces_records() {
        let f = deterministic(3, 0.3, 2, 4, 0.5);
        let policy = Policy::no_screening("p", &f.grid);
        let m = model(&f, &policy);
        let a: Vec<_> = (0..50)
            .map(|i| simulate_individual(&mut individual_stream(7, i), &m))
            .collect();
        let b: Vec<_> = (0..50)
            .map(|i| simulate_individual(&mut individual_stream(7, i), &m))
            .collect();
        assert_eq!(a, b);
        let c: Vec<_> = (0..50)
            .map(|i| simulate_individual(&mut individual_stream(8, i), &m))
            .collect();
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_dataset_has_zero_error_and_exact_mean() {
        let f = deterministic(4, 0.0, 0, 2, 0.0);
        let policy = Policy::screen_ages("p", &f.grid, 46, 51);
        let analytic = evaluate(&f.grid, &policy, &f.epi, &f.surv, &f.costs, 1000.0).unwrap();
        let est = estimate(&McConfig::new(3, 500), &model(&f, &policy), 1000.0).unwrap();
        for check in oracle_checks(&analytic, &est) {
            assert_eq!(check.simulated.std_error, 0.0, "{}", check.quantity);
            assert_eq!(check.simulated.mean, check.analytic, "{}", check.quantity);
            assert!(check.passes());
        }
    }

    #[test]
    fn invariant_to_batch_size_and_threads() {
        let f = deterministic(3, 0.2, 1, 3, 0.4);
        let policy = Policy::no_screening("p", &f.grid);
        let m = model(&f, &policy);
        let base = estimate(&McConfig::new(11, 3000), &m, 1.0).unwrap();
        for (batch, threads) in [(1, Some(1)), (7, Some(3)), (1000, Some(2)), (64, None)] {
            let cfg = McConfig {
                batch_size: batch,
                threads,
                ..McConfig::new(11, 3000)
            };
            assert_eq!(estimate(&cfg, &m, 1.0).unwrap(), base);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let f = deterministic(1, 0.0, 0, 2, 0.0);
        let policy = Policy::no_screening("p", &f.grid);
        let m = model(&f, &policy);
        assert!(estimate(&McConfig::new(1, 0), &m, 1.0).is_err());
        let cfg = McConfig {
            batch_size: 0,
            ..McConfig::new(1, 10)
        };
        assert!(estimate(&cfg, &m, 1.0).is_err());
    }

    #[test]
    fn draw_index_handles_short_mass() {
        let c = [0.0, 0.5, 0.9999999, 0.9999999];
        assert_eq!(draw_index(&c, 0.2), 1);
        assert_eq!(draw_index(&c, 0.7), 2);
        assert_eq!(draw_index(&c, 0.99999995), 2);
    }
}
