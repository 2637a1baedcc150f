//! Criterion: statistics routines agree with scipy/statsmodels on frozen fixtures.

use std::time::Instant;

use serde::Deserialize;
use viramem_core::stats::{
    glm_fit, ols_fit, partial_spearman, spearman, vif, Dispersion, Family, GlmOptions,
};

use crate::common::{design_from_rows, load_fixture, max_abs_diff, Cases};
use crate::Outcome;

const CORRELATION_TOL: f64 = 1e-10;
const OLS_BETA_TOL: f64 = 1e-10;
const VIF_TOL: f64 = 1e-8;
const GLM_TOL: f64 = 1e-4;
const MIN_FIXTURES: usize = 10;
const BUDGET_SECS: f64 = 10.0;

#[derive(Deserialize)]
struct CorrCase {
    x: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
    p_value: f64,
    #[serde(default)]
    controls: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct FitCase {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    beta: Vec<f64>,
    se: Vec<f64>,
    #[serde(default)]
    alpha: Option<f64>,
}

#[derive(Deserialize)]
struct VifCase {
    predictors: Vec<Vec<f64>>,
    vif: Vec<f64>,
}

pub fn run() -> Outcome {
    let start = Instant::now();
    let mut worst = Vec::new();
    let mut failures = Vec::new();

    let sp: Cases<CorrCase> = load_fixture("stats/spearman.json");
    let mut err: f64 = 0.0;
    for c in &sp.cases {
        let r = spearman(&c.x, &c.y).expect("spearman");
        err = err.max((r.rho - c.rho).abs()).max((r.p_value - c.p_value).abs());
    }
    check(&mut worst, &mut failures, "spearman", sp.cases.len(), err, CORRELATION_TOL);

    let pc: Cases<CorrCase> = load_fixture("stats/partial_spearman.json");
    let mut err: f64 = 0.0;
    for c in &pc.cases {
        let k = c.controls[0].len();
        let controls: Vec<(String, Vec<f64>)> =
            (0..k).map(|j| (format!("c{j}"), c.controls.iter().map(|row| row[j]).collect())).collect();
        let r = partial_spearman(&c.x, &c.y, &controls).expect("partial");
        err = err.max((r.rho - c.rho).abs()).max((r.p_value - c.p_value).abs());
    }
    check(&mut worst, &mut failures, "partial_spearman", pc.cases.len(), err, CORRELATION_TOL);

    let ols: Cases<FitCase> = load_fixture("stats/ols.json");
    let mut err: f64 = 0.0;
    for c in &ols.cases {
        let fit = ols_fit(&design_from_rows(&c.x), &c.y).expect("ols");
        err = err.max(max_abs_diff(&fit.coefficients, &c.beta));
    }
    check(&mut worst, &mut failures, "ols beta", ols.cases.len(), err, OLS_BETA_TOL);

    let vc: Cases<VifCase> = load_fixture("stats/vif.json");
    let mut err: f64 = 0.0;
    for c in &vc.cases {
        let k = c.predictors[0].len();
        let cols: Vec<(String, Vec<f64>)> =
            (0..k).map(|j| (format!("p{j}"), c.predictors.iter().map(|row| row[j]).collect())).collect();
        let got: Vec<f64> = vif(&cols).expect("vif").iter().map(|e| e.vif).collect();
        err = err.max(max_abs_diff(&got, &c.vif));
    }
    check(&mut worst, &mut failures, "vif", vc.cases.len(), err, VIF_TOL);

    let gg: Cases<FitCase> = load_fixture("stats/glm_gaussian.json");
    let mut err: f64 = 0.0;
    for c in &gg.cases {
        let fit = glm_fit(&design_from_rows(&c.x), &c.y, Family::Gaussian, &GlmOptions::default()).expect("glm");
        err = err.max(max_abs_diff(&fit.coefficients, &c.beta)).max(max_abs_diff(&fit.standard_errors, &c.se));
    }
    check(&mut worst, &mut failures, "glm gaussian beta/se", gg.cases.len(), err, GLM_TOL);

    let nb: Cases<FitCase> = load_fixture("stats/glm_negative_binomial.json");
    let mut err: f64 = 0.0;
    let mut alpha_err: f64 = 0.0;
    for c in &nb.cases {
        let fit = glm_fit(&design_from_rows(&c.x), &c.y, Family::NegativeBinomial, &GlmOptions::default())
            .expect("nb glm");
        assert!(fit.converged && !fit.dispersion_fallback);
        err = err.max(max_abs_diff(&fit.coefficients, &c.beta)).max(max_abs_diff(&fit.standard_errors, &c.se));
        let ref_alpha = c.alpha.expect("fixture alpha");
        alpha_err = alpha_err.max((fit.dispersion_alpha.unwrap() - ref_alpha).abs() / ref_alpha);
    }
    check(&mut worst, &mut failures, "glm negative binomial beta/se", nb.cases.len(), err, GLM_TOL);
    worst.push(format!("nb alpha rel err {alpha_err:.2e}"));
    let fixed = fixed_alpha_matches();
    check(&mut worst, &mut failures, "glm nb at reference alpha", nb.cases.len(), fixed, GLM_TOL);

    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= BUDGET_SECS {
        failures.push(format!("runtime {elapsed:.2}s >= {BUDGET_SECS}s"));
    }
    worst.push(format!("{elapsed:.2}s"));
    Outcome::from_failures(worst.join("; "), failures)
}

fn check(worst: &mut Vec<String>, failures: &mut Vec<String>, name: &str, n: usize, err: f64, tol: f64) {
    worst.push(format!("{name} n={n} max err {err:.2e}"));
    if n < MIN_FIXTURES {
        failures.push(format!("{name}: only {n} fixtures"));
    }
    if !(err <= tol) {
        failures.push(format!("{name}: max err {err:.3e} > {tol:e}"));
    }
}

/// Fixed-α check: with α pinned to the reference value the fit must match too.
fn fixed_alpha_matches() -> f64 {
    let nb: Cases<FitCase> = load_fixture("stats/glm_negative_binomial.json");
    let mut err: f64 = 0.0;
    for c in &nb.cases {
        let opts = GlmOptions { dispersion: Dispersion::Fixed(c.alpha.unwrap()), tol: 1e-12, ..Default::default() };
        let fit = glm_fit(&design_from_rows(&c.x), &c.y, Family::NegativeBinomial, &opts).unwrap();
        err = err.max(max_abs_diff(&fit.coefficients, &c.beta)).max(max_abs_diff(&fit.standard_errors, &c.se));
    }
    err
}
