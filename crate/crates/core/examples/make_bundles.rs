//! Writes the synthetic data bundles shipped under `data/`.
//!
//! ```text
//! cargo run -p cohort-ce --example make_bundles -- data
//! ```
//!
//! Every table is a closed-form function of age and stage, so the output is
//! byte-for-byte reproducible.

use std::path::PathBuf;

use cohort_ce::io::{DataBundle, ScenarioFile, SensitivityCase};
use cohort_ce::model::{
    AgeGrid, CostModel, DiagnosedSurvival, GroupSurvival, SurvivalModel, UndiagnosedSurvival, DEFAULT_COHORT_SIZE,
};
use cohort_ce::scenario::{
    AgeScope, Extension, IncidenceCurve, ScenarioSpec, SensitivityTransform, TransformKind, BASELINE_VARIANT,
};

/// Other-cause annual death probability at exact age `age`.
fn other_cause(age: u32) -> f64 {
    (0.0006 * (0.09 * (age as f64 - 46.0)).exp()).min(0.65)
}

/// Death-time PMF from yearly hazards `h(1), h(2), ...`, closed at `horizon`.
fn pmf_from_hazard(horizon: usize, offset: usize, hazard: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut pmf = vec![0.0; horizon + 1];
    let mut alive = 1.0;
    for t in offset..horizon {
        let d = alive * hazard(t);
        pmf[t] = d;
        alive -= d;
    }
    pmf[horizon] = alive;
    pmf
}

fn smooth_group(start: u32) -> GroupSurvival {
    let horizon = (100 - start) as usize;
    let q = |t: usize| other_cause(start + t as u32);
    let p0 = q(0);
    let p1 = (1.0 - p0) * q(1);
    let p_survive = 1.0 - p0 - p1;
    let mut pmf = pmf_from_hazard(horizon, 0, q);
    pmf[0] = p0;
    pmf[1] = p1;
    let tail: f64 = pmf[2..horizon].iter().sum();
    pmf[horizon] = p_survive - tail;

    // Excess yearly hazard by stage (unknown, localized, regional, distant,
    // in situ), fading over the first decade after diagnosis.
    const EXCESS: [f64; 5] = [0.07, 0.012, 0.045, 0.32, 0.002];
    let diagnosed = std::array::from_fn(|k| {
        let excess = |t: usize| EXCESS[k] * (0.8f64).powi(t as i32 - 1);
        let pmf = pmf_from_hazard(horizon, 1, |t| {
            let o = q(t - 1);
            1.0 - (1.0 - o) * (1.0 - excess(t))
        });
        let bc_share = (0..=horizon)
            .map(|t| {
                if t == 0 {
                    0.0
                } else if t == horizon {
                    0.5 * excess(t) / (excess(t) + q(t - 1))
                } else {
                    excess(t) / (excess(t) + q(t - 1))
                }
            })
            .collect();
        DiagnosedSurvival { pmf, bc_share }
    });
    GroupSurvival {
        group: cohort_ce::model::AgeGroup::new(start),
        undiagnosed: UndiagnosedSurvival {
            p_die_year0: p0,
            p_die_year1: p1,
            p_survive,
            pmf,
        },
        diagnosed,
    }
}

/// Screened ages (50-69) see more localized and less advanced disease.
fn smooth_stage_mix(start: u32) -> [f64; 5] {
    let x = (start as f64 - 46.0) / 52.0;
    let (localized, regional, distant) = if (50..70).contains(&start) {
        (0.55 + 0.02 * x, 0.25, 0.04)
    } else {
        (0.40 + 0.03 * x, 0.34, 0.09 + 0.03 * x)
    };
    let unknown = 0.02 + 0.03 * x;
    [
        unknown,
        localized,
        regional,
        distant,
        1.0 - unknown - localized - regional - distant,
    ]
}

fn smooth_rate(start: u32) -> f64 {
    let a = start as f64;
    0.0012 + 0.0045 * (-((a - 64.0) / 16.0).powi(2)).exp()
}

fn curves(grid: &AgeGrid, rate: impl Fn(u32) -> f64, older: f64, both: f64) -> Vec<IncidenceCurve> {
    let curve = |name: &str, factor: f64| IncidenceCurve {
        name: name.to_string(),
        rates: grid
            .groups()
            .iter()
            .map(|g| {
                let r = rate(g.start);
                (*g, if g.start >= 70 { r * factor } else { r })
            })
            .collect(),
    };
    vec![curve(BASELINE_VARIANT, 1.0), curve("older", older), curve("both", both)]
}

fn transform(kind: TransformKind, magnitude: f64) -> SensitivityTransform {
    SensitivityTransform::new(kind, magnitude, AgeScope::Auto)
}

fn case(id: &str, title: &str, kind: TransformKind, magnitude: f64) -> SensitivityCase {
    SensitivityCase {
        id: id.to_string(),
        title: Some(title.to_string()),
        transforms: vec![transform(kind, magnitude)],
    }
}

fn six_cases() -> Vec<SensitivityCase> {
    use TransformKind::*;
    vec![
        case("incidence_up", "Incidence +10%", IncidenceScale, 0.1),
        case("incidence_down", "Incidence -10%", IncidenceScale, -0.1),
        case("cost_up_10", "Treatment costs +10%", CostScale, 0.1),
        case("cost_up_50", "Treatment costs +50%", CostScale, 0.5),
        case("stage_better", "Stage shift +0.02 to localized", StageShift, 0.02),
        case("stage_worse", "Stage shift -0.02 to localized", StageShift, -0.02),
    ]
}

fn extension_scenarios() -> Vec<ScenarioSpec> {
    let mut out = vec![ScenarioSpec::new("current", Extension::None)];
    for (id, ext) in [
        ("younger", Extension::Younger),
        ("older", Extension::Older),
        ("both", Extension::Both),
    ] {
        out.push(ScenarioSpec::new(id, ext));
    }
    out
}

fn smooth_j27() -> DataBundle {
    let grid = AgeGrid::standard();
    let groups = grid.groups().to_vec();
    DataBundle {
        dir: None,
        incidence: curves(&grid, smooth_rate, 1.18, 1.22),
        cond_stage: groups.iter().map(|g| smooth_stage_mix(g.start)).collect(),
        survival: SurvivalModel::new(groups.iter().map(|g| smooth_group(g.start)).collect()).expect("smooth survival"),
        costs: CostModel::reference(),
        config: ScenarioFile {
            baseline: Some("current".into()),
            scenarios: extension_scenarios(),
            sensitivities: six_cases(),
            ..ScenarioFile::default()
        },
        grid,
    }
}

fn toy_j3() -> DataBundle {
    let grid = AgeGrid::new(46, 3).expect("toy grid");
    let groups = grid.groups().to_vec();
    let mut full = ScenarioSpec::new("full", Extension::None);
    full.screen_ages = Some((46, 51));
    full.label = Some("46-51 yr".into());
    let mut late = ScenarioSpec::new("late", Extension::None);
    late.screen_ages = Some((48, 51));
    DataBundle {
        dir: None,
        incidence: vec![IncidenceCurve {
            name: BASELINE_VARIANT.into(),
            rates: groups.iter().zip([0.02, 0.05, 0.08]).map(|(g, r)| (*g, r)).collect(),
        }],
        cond_stage: vec![
            [0.05, 0.5, 0.3, 0.1, 0.05],
            [0.1, 0.4, 0.3, 0.15, 0.05],
            [0.0, 0.6, 0.25, 0.05, 0.1],
        ],
        survival: SurvivalModel::new(groups.iter().map(|g| smooth_group(g.start)).collect()).expect("toy survival"),
        costs: CostModel::reference(),
        config: ScenarioFile {
            baseline: Some("current".into()),
            scenarios: vec![ScenarioSpec::new("current", Extension::None), full, late],
            sensitivities: vec![
                case("incidence_up", "Incidence +10%", TransformKind::IncidenceScale, 0.1),
                case("cost_up_50", "Treatment costs +50%", TransformKind::CostScale, 0.5),
            ],
            ..ScenarioFile::default()
        },
        grid,
    }
}

fn point_mass(len: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[at] = 1.0;
    v
}

fn adversarial_group(j: usize, start: u32) -> GroupSurvival {
    let horizon = (100 - start) as usize;
    let (p0, p1) = match j % 3 {
        0 => (0.0, 0.0),
        1 => (0.3, 0.0),
        _ => (0.0, 0.5),
    };
    let p_survive = 1.0 - p0 - p1;
    let mut pmf = vec![0.0; horizon + 1];
    pmf[0] = p0;
    pmf[1] = p1;
    pmf[2 + (j % (horizon - 1))] = p_survive;
    let diagnosed = std::array::from_fn(|k| {
        let at = 1 + (j * 7 + k * 3) % horizon;
        let bc = if (j + k) % 2 == 0 { 1.0 } else { 0.0 };
        let mut bc_share = vec![0.0; horizon + 1];
        bc_share[at] = bc;
        DiagnosedSurvival {
            pmf: point_mass(horizon + 1, at),
            bc_share,
        }
    });
    GroupSurvival {
        group: cohort_ce::model::AgeGroup::new(start),
        undiagnosed: UndiagnosedSurvival {
            p_die_year0: p0,
            p_die_year1: p1,
            p_survive,
            pmf,
        },
        diagnosed,
    }
}

fn adversarial_j27() -> DataBundle {
    let grid = AgeGrid::standard();
    let groups = grid.groups().to_vec();
    let rate = |start: u32| match ((start - 46) / 2) % 5 {
        0 => 0.0,
        1 => 0.25,
        n => 0.01 * n as f64,
    };
    let cond_stage = (0..groups.len())
        .map(|j| {
            let mut row = [0.0; 5];
            if j % 4 == 3 {
                row[1] = 0.5;
                row[2] = 0.5;
            } else {
                row[j % 5] = 1.0;
            }
            row
        })
        .collect();
    DataBundle {
        dir: None,
        incidence: curves(&grid, rate, 2.0, 3.0),
        cond_stage,
        survival: SurvivalModel::new(
            groups
                .iter()
                .enumerate()
                .map(|(j, g)| adversarial_group(j, g.start))
                .collect(),
        )
        .expect("adversarial survival"),
        costs: CostModel::reference(),
        config: ScenarioFile {
            baseline: Some("current".into()),
            scenarios: extension_scenarios(),
            sensitivities: vec![
                case("incidence_up", "Incidence +10%", TransformKind::IncidenceScale, 0.1),
                case("cost_up_50", "Treatment costs +50%", TransformKind::CostScale, 0.5),
            ],
            ..ScenarioFile::default()
        },
        grid,
    }
}

/// Every woman is diagnosed at the first round with localized disease and
/// dies of it three years later, so the Monte Carlo variance is zero.
fn deterministic_j3() -> DataBundle {
    let grid = AgeGrid::new(46, 3).expect("toy grid");
    let groups = grid.groups().to_vec();
    let survival = groups
        .iter()
        .map(|g| {
            let horizon = (100 - g.start) as usize;
            let mut undiagnosed = vec![0.0; horizon + 1];
            undiagnosed[horizon] = 1.0;
            let mut bc_share = vec![0.0; horizon + 1];
            bc_share[3] = 1.0;
            GroupSurvival {
                group: *g,
                undiagnosed: UndiagnosedSurvival {
                    p_die_year0: 0.0,
                    p_die_year1: 0.0,
                    p_survive: 1.0,
                    pmf: undiagnosed,
                },
                diagnosed: std::array::from_fn(|_| DiagnosedSurvival {
                    pmf: point_mass(horizon + 1, 3),
                    bc_share: bc_share.clone(),
                }),
            }
        })
        .collect();
    DataBundle {
        dir: None,
        incidence: vec![IncidenceCurve {
            name: BASELINE_VARIANT.into(),
            rates: groups.iter().zip([1.0, 0.0, 0.0]).map(|(g, r)| (*g, r)).collect(),
        }],
        cond_stage: vec![[0.0, 1.0, 0.0, 0.0, 0.0]; 3],
        survival: SurvivalModel::new(survival).expect("deterministic survival"),
        costs: CostModel::reference(),
        config: ScenarioFile {
            baseline: Some("current".into()),
            cohort_size: DEFAULT_COHORT_SIZE,
            scenarios: vec![ScenarioSpec::new("current", Extension::None)],
            ..ScenarioFile::default()
        },
        grid,
    }
}

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    let bundles = [
        ("toy_j3", toy_j3()),
        ("smooth_j27", smooth_j27()),
        ("adversarial_j27", adversarial_j27()),
        ("deterministic_j3", deterministic_j3()),
    ];
    for (name, bundle) in bundles {
        let dir = root.join(name);
        bundle.write(&dir).unwrap_or_else(|e| panic!("{name}: {e}"));
        DataBundle::load(&dir).unwrap_or_else(|e| panic!("{name} does not load back: {e}"));
        println!("wrote {}", dir.display());
    }
}
