//! Generalised linear models fitted by iteratively reweighted least squares.
//!
//! Gaussian/identity reduces to a single weighted solve. Negative binomial
//! (NB2, log link) alternates IRLS for β at fixed α with a golden-section
//! search over log α that maximises the profile log-likelihood.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::linalg::{weighted_least_squares, LeastSquares};
use super::model::{as_vec, wald, Design, Family, ModelFit};
use super::ols::ols_fit;
use super::StatsError;

/// Search interval for log α.
pub const LOG_ALPHA_RANGE: (f64, f64) = (-8.0, 8.0);
/// α used when the profile search fails.
pub const FALLBACK_ALPHA: f64 = 1.0;

const ETA_CLAMP: f64 = 30.0;
const GOLDEN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dispersion {
    /// Maximum likelihood over log α ∈ [−8, 8].
    Estimate,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlmOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub dispersion: Dispersion,
}

impl Default for GlmOptions {
    fn default() -> Self {
        Self { max_iter: 100, tol: 1e-8, dispersion: Dispersion::Estimate }
    }
}

pub fn glm_fit(design: &Design, y: &[f64], family: Family, opts: &GlmOptions) -> Result<ModelFit, StatsError> {
    if y.len() != design.nrows() {
        return Err(StatsError::LengthMismatch { left: design.nrows(), right: y.len() });
    }
    match family {
        Family::Gaussian => {
            let mut fit = ols_fit(design, y)?;
            fit.family = Family::Gaussian;
            Ok(fit)
        }
        Family::NegativeBinomial => fit_negative_binomial(design, y, opts),
    }
}

/// NB2 log-likelihood: Σ lnΓ(y+r) − lnΓ(r) − lnΓ(y+1) + r ln(r/(r+μ)) + y ln(μ/(r+μ)), r = 1/α.
pub fn nb_log_likelihood(y: &[f64], mu: &[f64], alpha: f64) -> f64 {
    NbLikelihood::new(y, alpha).eval(mu)
}

/// The log-likelihood at fixed α, with the μ-free lnΓ terms summed once.
struct NbLikelihood<'a> {
    y: &'a [f64],
    r: f64,
    constant: f64,
}

impl<'a> NbLikelihood<'a> {
    fn new(y: &'a [f64], alpha: f64) -> Self {
        let r = 1.0 / alpha;
        let lg_r = ln_gamma(r);
        let constant = y.iter().map(|&yi| ln_gamma(yi + r) - lg_r - ln_gamma(yi + 1.0) + r * r.ln()).sum();
        Self { y, r, constant }
    }

    fn eval(&self, mu: &[f64]) -> f64 {
        let r = self.r;
        let varying: f64 = self
            .y
            .iter()
            .zip(mu)
            .map(|(&yi, &mi)| {
                let denom = (r + mi).ln();
                -r * denom + if yi > 0.0 { yi * (mi.ln() - denom) } else { 0.0 }
            })
            .sum();
        self.constant + varying
    }
}

struct IrlsOutcome {
    beta: DVector<f64>,
    ls: LeastSquares,
    log_likelihood: f64,
    iterations: usize,
    converged: bool,
}

fn mu_from(design: &Design, beta: &DVector<f64>) -> Vec<f64> {
    (&design.matrix * beta).iter().map(|e| e.clamp(-ETA_CLAMP, ETA_CLAMP).exp()).collect()
}

/// IRLS for β at fixed α. `start` warm-starts from a previous β.
fn irls_nb(
    design: &Design,
    y: &[f64],
    alpha: f64,
    start: Option<&DVector<f64>>,
    opts: &GlmOptions,
) -> Result<IrlsOutcome, StatsError> {
    let n = y.len();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let mut mu: Vec<f64> = match start {
        Some(b) => mu_from(design, b),
        None => y.iter().map(|v| (v + ybar) / 2.0).map(|m| m.max(1e-8)).collect(),
    };
    let mut beta: Option<DVector<f64>> = start.cloned();
    let lik = NbLikelihood::new(y, alpha);
    let mut ll = lik.eval(&mu);
    let mut last_ls = None;

    for iter in 1..=opts.max_iter {
        let eta: Vec<f64> = mu.iter().map(|m| m.ln()).collect();
        // log link: dη/dμ = 1/μ, V(μ) = μ + αμ²  ⇒  w = μ / (1 + αμ)
        let z = DVector::from_iterator(n, (0..n).map(|i| eta[i] + (y[i] - mu[i]) / mu[i]));
        let w = DVector::from_iterator(n, mu.iter().map(|m| m / (1.0 + alpha * m)));
        let ls = weighted_least_squares(&design.matrix, &z, Some(&w), &design.names)?;

        let mut candidate = ls.beta.clone();
        let mut new_mu = mu_from(design, &candidate);
        let mut new_ll = lik.eval(&new_mu);
        // step halving keeps the likelihood from decreasing
        if let Some(prev) = &beta {
            let mut halvings = 0;
            while !(new_ll >= ll - 1e-10 * ll.abs().max(1.0)) && halvings < 30 {
                candidate = (&candidate + prev) * 0.5;
                new_mu = mu_from(design, &candidate);
                new_ll = lik.eval(&new_mu);
                halvings += 1;
            }
        }
        if !new_ll.is_finite() {
            return Ok(IrlsOutcome {
                beta: candidate,
                ls,
                log_likelihood: new_ll,
                iterations: iter,
                converged: false,
            });
        }
        debug_assert!(beta.is_none() || new_ll >= ll - 1e-8 * ll.abs().max(1.0), "NB log-likelihood decreased");

        let delta = beta.as_ref().map(|b| (&candidate - b).amax()).unwrap_or(f64::INFINITY);
        beta = Some(candidate);
        mu = new_mu;
        ll = new_ll;
        last_ls = Some(ls);
        if delta < opts.tol {
            let beta = beta.unwrap();
            // covariance at the converged μ
            let ls = final_weights(design, y, &mu, alpha)?;
            return Ok(IrlsOutcome { beta, ls, log_likelihood: ll, iterations: iter, converged: true });
        }
    }
    let beta = beta.expect("max_iter >= 1");
    let ls = match final_weights(design, y, &mu, alpha) {
        Ok(ls) => ls,
        Err(_) => last_ls.expect("at least one iteration"),
    };
    Ok(IrlsOutcome { beta, ls, log_likelihood: ll, iterations: opts.max_iter, converged: false })
}

fn final_weights(design: &Design, y: &[f64], mu: &[f64], alpha: f64) -> Result<LeastSquares, StatsError> {
    let n = y.len();
    let w = DVector::from_iterator(n, mu.iter().map(|m| m / (1.0 + alpha * m)));
    let z = DVector::from_iterator(n, (0..n).map(|i| mu[i].ln() + (y[i] - mu[i]) / mu[i]));
    weighted_least_squares(&design.matrix, &z, Some(&w), &design.names)
}

fn check_counts(y: &[f64]) -> Result<(), StatsError> {
    for (i, v) in y.iter().enumerate() {
        if !v.is_finite() || *v < 0.0 || v.fract() != 0.0 {
            return Err(StatsError::NonCountResponse { index: i, value: *v });
        }
    }
    Ok(())
}

fn fit_negative_binomial(design: &Design, y: &[f64], opts: &GlmOptions) -> Result<ModelFit, StatsError> {
    check_counts(y)?;
    if y.len() <= design.ncols() {
        return Err(StatsError::TooFewObservations { needed: design.ncols() + 1, got: y.len() });
    }

    let (alpha, fallback) = match opts.dispersion {
        Dispersion::Fixed(a) => {
            if !(a > 0.0 && a.is_finite()) {
                return Err(StatsError::InvalidParameter("dispersion alpha must be positive"));
            }
            (a, false)
        }
        Dispersion::Estimate => match estimate_alpha(design, y, opts) {
            Some(a) => (a, false),
            None => {
                log::warn!("NB dispersion search failed; falling back to alpha = {FALLBACK_ALPHA}");
                (FALLBACK_ALPHA, true)
            }
        },
    };

    let out = irls_nb(design, y, alpha, None, opts)?;
    if !out.converged {
        log::warn!("NB IRLS did not converge in {} iterations", out.iterations);
    }
    let beta = as_vec(&out.beta);
    let se: Vec<f64> = (0..beta.len()).map(|j| out.ls.xtwx_inv[(j, j)].sqrt()).collect();
    let (ci95, p_values) = wald(&beta, &se);

    Ok(ModelFit {
        family: Family::NegativeBinomial,
        link: Family::NegativeBinomial.canonical_link(),
        names: design.names.clone(),
        coefficients: beta,
        standard_errors: se,
        ci95,
        p_values,
        dispersion_alpha: Some(alpha),
        dispersion_fallback: fallback,
        scale: 1.0,
        log_likelihood: out.log_likelihood,
        converged: out.converged,
        iterations: out.iterations,
        r_squared: None,
        n_obs: y.len(),
    })
}

/// Golden-section maximisation of the profile log-likelihood over log α.
/// Returns `None` when any evaluation fails to converge or is non-finite.
fn estimate_alpha(design: &Design, y: &[f64], opts: &GlmOptions) -> Option<f64> {
    let mut warm: Option<DVector<f64>> = None;
    let mut profile = |log_alpha: f64| -> Option<f64> {
        let out = irls_nb(design, y, log_alpha.exp(), warm.as_ref(), opts).ok()?;
        if !out.converged || !out.log_likelihood.is_finite() {
            return None;
        }
        warm = Some(out.beta);
        Some(out.log_likelihood)
    };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = LOG_ALPHA_RANGE;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = profile(c)?;
    let mut fd = profile(d)?;
    while b - a > GOLDEN_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = profile(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = profile(d)?;
        }
    }
    Some(((a + b) / 2.0).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ols::ols_fit;

    #[test]
    fn gaussian_equals_ols() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| 1.0 + 2.0 * v + ((i * 7) % 5) as f64 * 0.1).collect();
        let d = Design::with_intercept(&[("x", &x[..])]).unwrap();
        let g = glm_fit(&d, &y, Family::Gaussian, &GlmOptions::default()).unwrap();
        let o = ols_fit(&d, &y).unwrap();
        for (a, b) in g.coefficients.iter().zip(&o.coefficients) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn nb_rejects_non_integer_response() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let d = Design::with_intercept(&[("x", &x[..])]).unwrap();
        let err = glm_fit(&d, &[1.0, 2.5, 3.0, 4.0], Family::NegativeBinomial, &GlmOptions::default()).unwrap_err();
        assert!(matches!(err, StatsError::NonCountResponse { index: 1, .. }));
    }

    #[test]
    fn nb_intercept_only_matches_log_mean() {
        // with only an intercept the MLE of μ is the sample mean for any α
        let y = [0.0, 3.0, 1.0, 7.0, 2.0, 0.0, 12.0, 4.0, 5.0, 1.0];
        let d = Design::intercept_only(y.len());
        let opts = GlmOptions { dispersion: Dispersion::Fixed(0.5), ..Default::default() };
        let fit = glm_fit(&d, &y, Family::NegativeBinomial, &opts).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!((fit.coefficients[0] - mean.ln()).abs() < 1e-8);
        assert!(fit.converged);
    }

    #[test]
    fn nb_log_likelihood_matches_pmf_sum() {
        // direct pmf: Γ(y+r)/(Γ(r) y!) p^r (1−p)^y with p = r/(r+μ)
        let y = [0.0, 1.0, 4.0];
        let mu = [0.5, 2.0, 3.0];
        let alpha = 0.7;
        let r = 1.0 / alpha;
        let direct: f64 = y
            .iter()
            .zip(&mu)
            .map(|(&k, &m)| {
                let p: f64 = r / (r + m);
                let mut coef = 1.0;
                for j in 0..k as usize {
                    coef *= (r + j as f64) / (j as f64 + 1.0);
                }
                (coef * p.powf(r) * (1.0 - p).powf(k)).ln()
            })
            .sum();
        assert!((nb_log_likelihood(&y, &mu, alpha) - direct).abs() < 1e-12);
    }
}
