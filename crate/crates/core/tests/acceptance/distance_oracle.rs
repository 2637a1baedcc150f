//! Criterion: tiled Pearson distances equal brute-force per-pair Pearson,
//! and are invariant to positive affine maps of each row.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use viramem_core::distinct::{pearson_distance_matrix, DistanceOptions};
use viramem_core::features::RowMatrix;

use crate::common::load_fixture;
use crate::Outcome;

const ORACLE_TOL: f64 = 1e-9;
const AFFINE_TOL: f64 = 1e-10;

#[derive(serde::Deserialize)]
struct Case {
    rows: Vec<Vec<f64>>,
    distance: Vec<Vec<f64>>,
}

fn max_diff(rows_a: &[Vec<f64>], rows_b: &[Vec<f64>], opts: &DistanceOptions) -> f64 {
    let a = pearson_distance_matrix(&RowMatrix::from_rows(rows_a), opts).expect("distance");
    let b = pearson_distance_matrix(&RowMatrix::from_rows(rows_b), opts).expect("distance");
    let n = rows_a.len();
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (a.get(i, j) - b.get(i, j)).abs()).fold(0.0, f64::max)
}

pub fn run() -> Outcome {
    let mut failures = Vec::new();
    // small tiles so the 20x500 case crosses tile boundaries
    let tiled = DistanceOptions { tile_bytes: 3 * 500 * 8, ..DistanceOptions::default() };
    let mut oracle_err: f64 = 0.0;
    for rel in ["distinct/pearson_20x500.json", "distinct/pearson_5x12.json"] {
        let c: Case = load_fixture(rel);
        for opts in [DistanceOptions::default(), tiled] {
            let d = pearson_distance_matrix(&RowMatrix::from_rows(&c.rows), &opts).expect("distance");
            for (i, row) in c.distance.iter().enumerate() {
                for (j, want) in row.iter().enumerate() {
                    oracle_err = oracle_err.max((d.get(i, j) - want).abs());
                }
            }
        }
    }
    if oracle_err > ORACLE_TOL {
        failures.push(format!("oracle err {oracle_err:.2e} > {ORACLE_TOL:e}"));
    }

    let mut affine_err: f64 = 0.0;
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..20).map(|_| (0..500).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let mapped: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                let a = rng.random_range(0.1..10.0);
                let b = rng.random_range(-5.0..5.0);
                r.iter().map(|x| a * x + b).collect()
            })
            .collect();
        affine_err = affine_err.max(max_diff(&rows, &mapped, &tiled));
    }
    if affine_err > AFFINE_TOL {
        failures.push(format!("affine err {affine_err:.2e} > {AFFINE_TOL:e}"));
    }
    Outcome::from_failures(
        format!("brute-force max err {oracle_err:.2e} (tol {ORACLE_TOL:e}); affine max err {affine_err:.2e} on 5 random 20x500 (tol {AFFINE_TOL:e})"),
        failures,
    )
}
