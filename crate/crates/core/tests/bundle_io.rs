mod common;

use std::fs;
use std::path::Path;

use cohort_ce::io::{DataBundle, COST_FILES, SCENARIO_FILE, STAGE_FILE, SURVIVAL_FILE};
use cohort_ce::model::Stage;
use cohort_ce::synthetic::random_bundle;
use cohort_ce::Error;
use proptest::prelude::*;
use tempfile::TempDir;

use common::{data_dir, SHIPPED};

fn copy_bundle(name: &str) -> TempDir {
    let tmp = TempDir::new().unwrap();
    for entry in fs::read_dir(data_dir(name)).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), tmp.path().join(entry.file_name())).unwrap();
    }
    tmp
}

fn edit(dir: &Path, file: &str, from: &str, to: &str) {
    let path = dir.join(file);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains(from), "{file} has no '{from}'");
    fs::write(&path, text.replacen(from, to, 1)).unwrap();
}

fn messages(err: &Error) -> Vec<String> {
    err.issues().iter().map(|i| i.to_string()).collect()
}

#[test]
fn shipped_bundles_load() {
    for name in SHIPPED {
        let bundle = DataBundle::load(data_dir(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        bundle.validate().unwrap();
        assert!(!bundle.config.scenarios.is_empty());
    }
}

#[test]
fn stage_row_summing_to_098_is_named() {
    let tmp = copy_bundle("toy_j3");
    edit(tmp.path(), STAGE_FILE, "46,47,1,0.5\n", "46,47,1,0.48\n");
    let err = DataBundle::load(tmp.path()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let msgs = messages(&err);
    assert_eq!(msgs.len(), 1, "{msgs:?}");
    assert!(msgs[0].contains(STAGE_FILE), "{}", msgs[0]);
    assert!(msgs[0].contains("46-47"), "{}", msgs[0]);
    assert!(msgs[0].contains("0.98"), "{}", msgs[0]);
}

#[test]
fn truncated_survival_pmf_reports_group_and_mass() {
    let mut bundle = DataBundle::load(data_dir("toy_j3")).unwrap();
    let d = &mut bundle.survival.groups[1].diagnosed[Stage::Regional.diagnosed_index().unwrap()];
    d.pmf = vec![0.0, 0.5, 0.25, 0.22];
    d.bc_share = vec![0.0, 0.5, 0.5, 0.5];
    let tmp = TempDir::new().unwrap();
    bundle.write(tmp.path()).unwrap();
    let err = DataBundle::load(tmp.path()).unwrap_err();
    let msgs = messages(&err);
    assert_eq!(msgs.len(), 1, "{msgs:?}");
    assert!(msgs[0].contains("48-49"), "{}", msgs[0]);
    assert!(msgs[0].contains("stage 2"), "{}", msgs[0]);
    let mass: f64 = msgs[0]
        .split("mass is ")
        .nth(1)
        .and_then(|rest| rest.split(',').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((mass - 0.97).abs() < 1e-12, "{}", msgs[0]);
}

#[test]
fn every_failure_is_reported_at_once() {
    let tmp = copy_bundle("toy_j3");
    edit(tmp.path(), STAGE_FILE, "46,47,1,0.5\n", "46,47,1,0.48\n");
    edit(tmp.path(), COST_FILES[1], "46,49,0,4000\n", "46,49,0,lots\n");
    edit(tmp.path(), SCENARIO_FILE, "extension = none", "extension = sideways");
    fs::remove_file(tmp.path().join("population_interval.csv")).unwrap();
    let err = DataBundle::load(tmp.path()).unwrap_err();
    let msgs = messages(&err);
    assert!(msgs.iter().any(|m| m.contains("0.98")), "{msgs:?}");
    assert!(msgs.iter().any(|m| m.starts_with("cost_c2.csv:2:")), "{msgs:?}");
    assert!(msgs.iter().any(|m| m.contains("sideways")), "{msgs:?}");
    assert!(
        msgs.iter().any(|m| m.starts_with("population_interval.csv")),
        "{msgs:?}"
    );
}

#[test]
fn wrong_header_is_rejected() {
    let tmp = copy_bundle("toy_j3");
    edit(tmp.path(), SURVIVAL_FILE, "prob_death", "p");
    let msgs = messages(&DataBundle::load(tmp.path()).unwrap_err());
    assert!(msgs.iter().any(|m| m.starts_with("survival.csv:1:")), "{msgs:?}");
}

#[test]
fn missing_directory_is_a_validation_error() {
    let err = DataBundle::load("/definitely/not/here").unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn unknown_incidence_curve_is_rejected() {
    let tmp = copy_bundle("toy_j3");
    edit(
        tmp.path(),
        SCENARIO_FILE,
        "extension = none",
        "extension = none\nincidence = mystery",
    );
    let msgs = messages(&DataBundle::load(tmp.path()).unwrap_err());
    assert!(msgs.iter().any(|m| m.contains("mystery")), "{msgs:?}");
}

#[test]
fn shipped_bundles_rewrite_byte_identically() {
    for name in SHIPPED {
        let bundle = DataBundle::load(data_dir(name)).unwrap();
        let tmp = TempDir::new().unwrap();
        bundle.write(tmp.path()).unwrap();
        for entry in fs::read_dir(data_dir(name)).unwrap() {
            let entry = entry.unwrap();
            let shipped = fs::read(entry.path()).unwrap();
            let rewritten = fs::read(tmp.path().join(entry.file_name())).unwrap();
            assert!(shipped == rewritten, "{name}/{:?} differs", entry.file_name());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_serialize_parse_round_trips(seed in any::<u64>(), first in 23u32..40, groups in 1usize..8) {
        let bundle = random_bundle(seed, 2 * first, groups).unwrap();
        let a = TempDir::new().unwrap();
        bundle.write(a.path()).unwrap();
        let mut loaded = DataBundle::load(a.path()).unwrap();
        loaded.dir = None;
        prop_assert_eq!(&loaded, &bundle);

        let b = TempDir::new().unwrap();
        loaded.write(b.path()).unwrap();
        let mut again = DataBundle::load(b.path()).unwrap();
        again.dir = None;
        prop_assert_eq!(&again, &loaded);
    }
}
