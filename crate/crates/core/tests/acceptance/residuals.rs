//! Criterion: layer residuals are orthogonal to the baseline and to the
//! intercept, and residualizing them again changes nothing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use viramem_core::distinct::residualize_layer;

use crate::Outcome;

const TOL: f64 = 1e-10;

pub fn run() -> Outcome {
    let (mut ortho, mut intercept, mut idem): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let sizes = [3usize, 10, 60, 250, 1000];
    let mut cases = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = sizes[seed as usize % sizes.len()];
        // mean-dissimilarity-like scores: positive, near 1
        let base: Vec<f64> = (0..n).map(|_| rng.random_range(0.4..1.3)).collect();
        let mem: Vec<f64> = base.iter().map(|b| 0.3 + 0.6 * b + rng.random_range(-0.2..0.2)).collect();
        let r = residualize_layer(&mem, &base).expect("residualize");
        ortho = ortho.max(r.iter().zip(&base).map(|(a, b)| a * b).sum::<f64>().abs());
        intercept = intercept.max(r.iter().sum::<f64>().abs());
        let again = residualize_layer(&r, &base).expect("residualize");
        idem = idem.max(r.iter().zip(&again).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        cases += 1;
    }
    let mut failures = Vec::new();
    for (name, v) in [("sum(r*baseline)", ortho), ("sum(r)", intercept), ("idempotence", idem)] {
        if v > TOL {
            failures.push(format!("{name} {v:.2e} > {TOL:e}"));
        }
    }
    Outcome::from_failures(
        format!("{cases} random fixtures: |r.baseline| {ortho:.2e}, |sum r| {intercept:.2e}, idempotence {idem:.2e} (tol {TOL:e})"),
        failures,
    )
}
