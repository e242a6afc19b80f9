//! Report output pinned against checked-in files.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the files after an intended change, then
//! review the diff.

mod common;

use std::fs;
use std::path::PathBuf;

use cohort_ce::io::{emit_comparison, emit_sensitivity_suite, per_age_csv, DataBundle};

use common::data_dir;

fn check(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e} (run with UPDATE_GOLDEN=1 to create)", path.display()));
    if expected != actual {
        let first = expected
            .lines()
            .zip(actual.lines())
            .position(|(a, b)| a != b)
            .unwrap_or_else(|| expected.lines().count().min(actual.lines().count()));
        panic!(
            "{name} differs from golden at line {}:\n  golden: {:?}\n  actual: {:?}",
            first + 1,
            expected.lines().nth(first),
            actual.lines().nth(first)
        );
    }
}

fn comparison(bundle_name: &str) {
    let bundle = DataBundle::load(data_dir(bundle_name)).unwrap();
    let results = bundle.evaluate_all().unwrap();
    let base = bundle.config.baseline_id().unwrap();
    let table = emit_comparison(&results, base, "Comparison").unwrap();
    check(&format!("{bundle_name}_comparison.csv"), &table.to_csv());
    check(&format!("{bundle_name}_comparison.txt"), &table.to_text());
}

#[test]
fn smooth_comparison() {
    comparison("smooth_j27");
}

#[test]
fn adversarial_comparison() {
    comparison("adversarial_j27");
}

#[test]
fn toy_comparison() {
    comparison("toy_j3");
}

#[test]
fn smooth_sensitivity_suite() {
    let bundle = DataBundle::load(data_dir("smooth_j27")).unwrap();
    let cfg = &bundle.config;
    let tables =
        emit_sensitivity_suite(&cfg.sensitivities, &cfg.scenarios, cfg.baseline_id().unwrap(), &bundle).unwrap();
    assert_eq!(tables.len(), 6);
    for (case, table) in cfg.sensitivities.iter().zip(&tables) {
        check(&format!("smooth_j27_sensitivity_{}.csv", case.id), &table.to_csv());
    }
}

#[test]
fn empty_suite_gives_no_tables() {
    let bundle = DataBundle::load(data_dir("smooth_j27")).unwrap();
    let cfg = &bundle.config;
    let tables = emit_sensitivity_suite(&[], &cfg.scenarios, "current", &bundle).unwrap();
    assert!(tables.is_empty());
}

#[test]
fn smooth_per_age_breakdown() {
    let bundle = DataBundle::load(data_dir("smooth_j27")).unwrap();
    let result = bundle.evaluate(bundle.config.scenario("both").unwrap()).unwrap();
    check("smooth_j27_both_by_age.csv", &per_age_csv(&result));
}
