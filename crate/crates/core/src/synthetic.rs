//! Seeded random data bundles for property tests and demos.
//!
//! Every generated bundle passes validation. Scenarios never use the
//! younger/older extensions because the grid may not contain the groups
//! those rewrites read.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::io::{DataBundle, ScenarioFile};
use crate::model::{AgeGrid, CostModel, DiagnosedSurvival, GroupSurvival, SurvivalModel, UndiagnosedSurvival};
use crate::scenario::{Extension, IncidenceCurve, ScenarioSpec, BASELINE_VARIANT};
use crate::Result;

/// Random weights over `len` slots, about `density` of them non-zero,
/// normalised to `total`. At least one slot always carries mass.
fn weights(rng: &mut ChaCha8Rng, len: usize, density: f64, total: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len)
        .map(|_| {
            if rng.random::<f64>() < density {
                rng.random::<f64>()
            } else {
                0.0
            }
        })
        .collect();
    if w.iter().all(|x| *x == 0.0) {
        w[rng.random_range(0..len)] = 1.0;
    }
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x *= total / sum);
    w
}

fn stage_mix(rng: &mut ChaCha8Rng) -> [f64; 5] {
    let w = weights(rng, 5, 0.8, 1.0);
    let head: f64 = w[..4].iter().sum();
    [w[0], w[1], w[2], w[3], (1.0 - head).max(0.0)]
}

fn group_survival(rng: &mut ChaCha8Rng, start: u32) -> GroupSurvival {
    let horizon = (100 - start) as usize;
    let p0 = rng.random_range(0.0..0.1);
    let p1 = rng.random_range(0.0..0.1);
    let p_survive = 1.0 - p0 - p1;
    let mut pmf = vec![p0, p1];
    pmf.extend(weights(rng, horizon - 1, 0.3, p_survive));
    let diagnosed = std::array::from_fn(|_| {
        let mut pmf = vec![0.0];
        pmf.extend(weights(rng, horizon, 0.25, 1.0));
        let split_kind = rng.random_range(0..3);
        let bc_share = (0..=horizon)
            .map(|t| match split_kind {
                _ if t == 0 => 0.0,
                0 => rng.random::<f64>(),
                1 => f64::from(rng.random::<bool>()),
                _ => 0.0,
            })
            .collect();
        DiagnosedSurvival { pmf, bc_share }
    });
    GroupSurvival {
        group: crate::model::AgeGroup::new(start),
        undiagnosed: UndiagnosedSurvival {
            p_die_year0: p0,
            p_die_year1: p1,
            p_survive,
            pmf,
        },
        diagnosed,
    }
}

/// A valid bundle on `groups` two-year groups starting at `first_start`,
/// with scenarios `all` (baseline, every group screened), `first` and `last`
/// (only that group screened).
pub fn random_bundle(seed: u64, first_start: u32, groups: usize) -> Result<DataBundle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = AgeGrid::new(first_start, groups)?;
    let rates = grid
        .groups()
        .iter()
        .map(|g| {
            let r = if rng.random::<f64>() < 0.1 {
                0.0
            } else {
                rng.random_range(0.0..0.06)
            };
            (*g, r)
        })
        .collect();
    let cond_stage = (0..groups).map(|_| stage_mix(&mut rng)).collect();
    let survival = SurvivalModel::new(
        grid.groups()
            .iter()
            .map(|g| group_survival(&mut rng, g.start))
            .collect(),
    )?;
    let mut costs = CostModel::reference();
    costs.screening_unit_cost = rng.random_range(0.0..60.0);

    let screening = |id: &str, lo: u32, hi: u32| {
        let mut spec = ScenarioSpec::new(id, Extension::None);
        spec.screen_ages = Some((lo, hi));
        spec
    };
    let last = grid.groups()[groups - 1];
    let scenarios = vec![
        screening("all", first_start, last.end),
        screening("first", first_start, first_start + 1),
        screening("last", last.start, last.end),
    ];
    let bundle = DataBundle {
        dir: None,
        incidence: vec![IncidenceCurve {
            name: BASELINE_VARIANT.into(),
            rates,
        }],
        cond_stage,
        survival,
        config: ScenarioFile {
            baseline: Some("all".into()),
            screening_unit_cost: costs.screening_unit_cost,
            scenarios,
            ..ScenarioFile::default()
        },
        costs,
        grid,
    };
    bundle.validate()?;
    Ok(bundle)
}
