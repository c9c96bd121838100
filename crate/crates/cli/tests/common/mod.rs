//! Shared data generators and helpers for the integration tests.
#![allow(dead_code)]

use std::path::Path;

use clap::Parser;

use classicml::{Matrix, SeededRng};
use classicml_cli::args::{Cli, Command, FitArgs};
use classicml_cli::dataset::Dataset;

pub fn normal(rng: &mut SeededRng) -> f64 {
    let u1 = rng.open_interval(0.0, 1.0);
    let u2 = rng.next_f64();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_matrix(rng: &mut SeededRng, n: usize, p: usize) -> Matrix {
    let data = (0..n * p).map(|_| normal(rng)).collect();
    Matrix::new(n, p, data).unwrap()
}

/// Three unit-variance classes centred on an equilateral triangle with side 10.
pub fn blobs(seed: u64, n: usize) -> (Matrix, Vec<String>) {
    let centers = [(0.0, 0.0), (10.0, 0.0), (5.0, 10.0 * 3f64.sqrt() / 2.0)];
    let mut rng = SeededRng::new(seed);
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let (cx, cy) = centers[i % 3];
        data.push(cx + normal(&mut rng));
        data.push(cy + normal(&mut rng));
        labels.push(format!("c{}", i % 3));
    }
    (Matrix::new(n, 2, data).unwrap(), labels)
}

/// Two noisy concentric circles of radius 0.5 and 1.5, alternating by row.
pub fn rings(seed: u64, n: usize) -> (Matrix, Vec<String>) {
    let mut rng = SeededRng::new(seed);
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let r = if i % 2 == 0 { 0.5 } else { 1.5 };
        let t = 2.0 * std::f64::consts::PI * rng.next_f64();
        data.push(r * t.cos() + 0.05 * normal(&mut rng));
        data.push(r * t.sin() + 0.05 * normal(&mut rng));
        labels.push(if i % 2 == 0 { "inner".into() } else { "outer".into() });
    }
    (Matrix::new(n, 2, data).unwrap(), labels)
}

pub fn dataset(x: &Matrix, labels: Option<Vec<String>>) -> Dataset {
    Dataset {
        feature_names: (1..=x.cols()).map(|j| format!("x{j}")).collect(),
        x: x.clone(),
        label_name: labels.as_ref().map(|_| "y".to_string()),
        labels,
        lines: (2..x.rows() as u64 + 2).collect(),
    }
}

/// Parses `fit` flags; `--in` and `--out` get placeholders.
pub fn fit_args(flags: &[&str]) -> FitArgs {
    let mut argv = vec!["classicml", "fit", "--in", "unused.csv", "--out", "unused.json"];
    argv.extend_from_slice(flags);
    match Cli::try_parse_from(argv).unwrap().command {
        Command::Fit(a) => a,
        _ => unreachable!(),
    }
}

pub fn write_table(path: &Path, x: &Matrix, labels: Option<&[String]>) {
    let mut out = String::new();
    let mut header: Vec<String> = (1..=x.cols()).map(|j| format!("x{j}")).collect();
    if labels.is_some() {
        header.push("y".into());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, row) in x.iter_rows().enumerate() {
        let mut cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        if let Some(l) = labels {
            cells.push(l[i].clone());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).unwrap();
}

pub fn numeric_labels(y: &[f64]) -> Vec<String> {
    y.iter().map(|v| v.to_string()).collect()
}
