#![allow(dead_code)]

use std::path::PathBuf;

pub const SHIPPED: [&str; 4] = ["toy_j3", "smooth_j27", "adversarial_j27", "deterministic_j3"];

pub fn data_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}
