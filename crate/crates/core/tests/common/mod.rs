#![allow(dead_code)]

use std::path::PathBuf;

use finsler_mroot::cli::document::{parse_spec, MetricSpec};
use finsler_mroot::sampling::{sample, SampleBox};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> MetricSpec {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    parse_spec(&text).expect("fixture valid")
}

/// Seeded points in the default box.
pub fn points(n: usize, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    sample(n, count, seed, &SampleBox::default(), |x, y| {
        Ok((x.to_vec(), y.to_vec()))
    })
    .unwrap()
    .accepted
    .into_iter()
    .map(|s| s.value)
    .collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
