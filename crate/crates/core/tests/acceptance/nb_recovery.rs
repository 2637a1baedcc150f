//! Criterion: NB2 GLM recovers known coefficients, and its 95% intervals
//! cover them at close to the nominal rate.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};
use viramem_core::stats::{glm_fit, Design, Family, GlmOptions};

use crate::Outcome;

const N: usize = 2000;
const BETA: [f64; 3] = [1.0, 0.5, -0.3];
const ALPHA: f64 = 0.5;
const TOL: f64 = 0.05;
const REPLICATIONS: u64 = 100;
const MIN_COVERED: usize = 90;
const BUDGET_SECS: f64 = 60.0;

fn simulate(seed: u64) -> (Design, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(0.0, 1.0).unwrap();
    let mut data = Vec::with_capacity(N * 3);
    let mut y = Vec::with_capacity(N);
    for _ in 0..N {
        let x1: f64 = z.sample(&mut rng);
        let x2: f64 = z.sample(&mut rng);
        data.extend([1.0, x1, x2]);
        let mu = (BETA[0] + BETA[1] * x1 + BETA[2] * x2).exp();
        let lambda = Gamma::new(1.0 / ALPHA, ALPHA * mu).unwrap().sample(&mut rng);
        y.push(Poisson::new(lambda.max(1e-12)).unwrap().sample(&mut rng));
    }
    let names = ["intercept", "x1", "x2"].iter().map(|s| s.to_string()).collect();
    (Design::new(names, DMatrix::from_row_slice(N, 3, &data)).unwrap(), y)
}

pub fn run() -> Outcome {
    let start = Instant::now();
    let opts = GlmOptions::default();
    let mut failures = Vec::new();

    let (design, y) = simulate(7);
    let fit = glm_fit(&design, &y, Family::NegativeBinomial, &opts).expect("nb fit");
    let err = fit.coefficients.iter().zip(BETA).map(|(b, t)| (b - t).abs()).fold(0.0, f64::max);
    if err > TOL {
        failures.push(format!("max |beta - truth| {err:.4} > {TOL}"));
    }

    let mut covered = [0usize; 3];
    for seed in 0..REPLICATIONS {
        let (design, y) = simulate(10_000 + seed);
        let fit = glm_fit(&design, &y, Family::NegativeBinomial, &opts).expect("nb fit");
        for (k, (lo, hi)) in fit.ci95.iter().enumerate() {
            covered[k] += usize::from(*lo <= BETA[k] && BETA[k] <= *hi);
        }
    }
    for (k, c) in covered.iter().enumerate() {
        if *c < MIN_COVERED {
            failures.push(format!("coefficient {k} covered in {c}/{REPLICATIONS}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs > BUDGET_SECS {
        failures.push(format!("took {secs:.1}s > {BUDGET_SECS}s"));
    }
    Outcome::from_failures(
        format!(
            "n={N}, max |err| {err:.4} (tol {TOL}), alpha-hat {:.3}, coverage {covered:?}/{REPLICATIONS}, {secs:.1}s",
            fit.dispersion_alpha.unwrap_or(f64::NAN)
        ),
        failures,
    )
}
