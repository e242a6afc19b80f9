mod common;

use cohort_ce::io::DataBundle;
use cohort_ce::mc::{occupancy, simulate_records, McConfig, McModel, ORACLE_STANDARD_ERRORS};
use cohort_ce::synthetic::random_bundle;

use common::data_dir;

fn assert_passes(bundle: &DataBundle, id: &str, config: &McConfig) {
    let spec = bundle.config.scenario(id).unwrap();
    let report = bundle.oracle(spec, config).unwrap();
    for c in &report.checks {
        assert!(
            c.passes(),
            "{id} {}: analytic {} vs {} ± {}",
            c.quantity,
            c.analytic,
            c.simulated.mean,
            c.simulated.std_error
        );
    }
}

#[test]
fn deterministic_bundle_matches_exactly() {
    let bundle = DataBundle::load(data_dir("deterministic_j3")).unwrap();
    let spec = &bundle.config.scenarios[0];
    let report = bundle.oracle(spec, &McConfig::new(3, 5000)).unwrap();
    for c in &report.checks {
        assert_eq!(c.simulated.std_error, 0.0, "{}", c.quantity);
        assert_eq!(c.analytic, c.simulated.mean, "{}", c.quantity);
        assert!(c.passes());
    }
    let analytic = bundle.evaluate(spec).unwrap();
    assert_eq!(analytic.total_life_years, 3.0 * 100_000.0);
    assert_eq!(analytic.bc_deaths, 100_000.0);
    // Nobody reaches a screened round; a localized case diagnosed at 46 and
    // dying of breast cancer in year three costs C1 + C2 + C3 of band 46-49.
    assert_eq!(analytic.total_cost, 100_000.0 * (20_400.0 + 2_400.0 + 33_100.0));
}

#[test]
fn toy_bundle_within_three_standard_errors() {
    let bundle = DataBundle::load(data_dir("toy_j3")).unwrap();
    for spec in &bundle.config.scenarios {
        assert_passes(&bundle, &spec.id, &McConfig::new(11, 200_000));
    }
}

#[test]
fn toy_trajectory_matches_simulated_occupancy() {
    let bundle = DataBundle::load(data_dir("toy_j3")).unwrap();
    let prepared = bundle.prepare(&bundle.config.scenarios[0]).unwrap();
    let analytic = prepared
        .evaluate(&bundle.grid, &bundle.survival, bundle.config.cohort_size)
        .unwrap();
    let model = McModel::new(
        &bundle.grid,
        &prepared.policy,
        &prepared.epi,
        &bundle.survival,
        &prepared.costs,
    )
    .unwrap();
    let records = simulate_records(&McConfig::new(5, 200_000), &model).unwrap();
    let occ = occupancy(&records, bundle.grid.len(), bundle.config.cohort_size);
    assert_eq!(occ[0].mean, bundle.config.cohort_size);
    for (j, (m, n)) in occ.iter().zip(&analytic.trajectory).enumerate() {
        assert!(
            (m.mean - n).abs() <= ORACLE_STANDARD_ERRORS * m.std_error + 1e-9 * n,
            "round {j}: {n} vs {} ± {}",
            m.mean,
            m.std_error
        );
    }
}

#[test]
fn random_bundles_within_three_standard_errors() {
    for (seed, groups) in [(1, 1), (2, 2), (3, 3), (4, 5), (5, 8), (6, 12), (7, 20), (8, 27)] {
        let bundle = random_bundle(seed, 46, groups).unwrap();
        for spec in &bundle.config.scenarios {
            assert_passes(&bundle, &spec.id, &McConfig::new(100 + seed, 100_000));
        }
    }
}

#[test]
fn oracle_report_ignores_thread_count() {
    let bundle = DataBundle::load(data_dir("adversarial_j27")).unwrap();
    let spec = &bundle.config.scenarios[0];
    let mut config = McConfig::new(9, 50_000);
    config.batch_size = 1000;
    let reports: Vec<_> = [Some(1), Some(3), None]
        .into_iter()
        .map(|threads| {
            config.threads = threads;
            bundle.oracle(spec, &config).unwrap().to_csv()
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0], reports[2]);
}
