use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::linalg::weighted_least_squares;
use super::rank::rank;
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    Spearman,
    Pearson,
    PartialSpearman,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
    pub method: CorrelationMethod,
    #[serde(default)]
    pub controls: Vec<String>,
}

/// Pearson r of two equal-length slices. `None` when either side has zero variance.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value for r under H0: ρ = 0 via t = r·√(df/(1−r²)).
pub fn t_test_p(r: f64, df: f64) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / ((1.0 + r) * (1.0 - r))).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.cdf(-t.abs())).min(1.0)
}

fn check_pair(x: &[f64], y: &[f64], min_n: usize) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < min_n {
        return Err(StatsError::TooFewObservations { needed: min_n, got: x.len() });
    }
    Ok(())
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_pair(x, y, 3)?;
    if let Some(i) = x.iter().chain(y).position(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite { index: i % x.len() });
    }
    let r = pearson_r(x, y).ok_or(StatsError::Degenerate("zero variance"))?;
    Ok(CorrelationResult {
        rho: r,
        p_value: t_test_p(r, (x.len() - 2) as f64),
        n: x.len(),
        method: CorrelationMethod::Pearson,
        controls: Vec::new(),
    })
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_pair(x, y, 3)?;
    let rx = rank(x)?;
    let ry = rank(y)?;
    let rho = pearson_r(&rx, &ry).ok_or(StatsError::Degenerate("constant ranks"))?;
    Ok(CorrelationResult {
        rho,
        p_value: t_test_p(rho, (x.len() - 2) as f64),
        n: x.len(),
        method: CorrelationMethod::Spearman,
        controls: Vec::new(),
    })
}

/// Exact two-sided permutation p-value for Spearman's rho, enumerating every
/// ordering of `y`. Limited to n ≤ 10 (10! orderings).
pub fn spearman_exact_p(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair(x, y, 3)?;
    if x.len() > 10 {
        return Err(StatsError::TooManyForExact { n: x.len() });
    }
    let rx = rank(x)?;
    let mut ry = rank(y)?;
    let observed = pearson_r(&rx, &ry).ok_or(StatsError::Degenerate("constant ranks"))?;

    let n = ry.len();
    let mut hits = 0u64;
    let mut total = 0u64;
    let mut visit = |perm: &[f64]| {
        total += 1;
        if let Some(r) = pearson_r(&rx, perm) {
            if r.abs() >= observed.abs() - 1e-12 {
                hits += 1;
            }
        }
    };
    // Heap's algorithm, iterative.
    let mut c = vec![0usize; n];
    visit(&ry);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                ry.swap(0, i);
            } else {
                ry.swap(c[i], i);
            }
            visit(&ry);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}

/// Spearman correlation of `x` and `y` after removing the linear effect of the
/// ranked controls (plus intercept) from both ranked variables.
pub fn partial_spearman(
    x: &[f64],
    y: &[f64],
    controls: &[(String, Vec<f64>)],
) -> Result<CorrelationResult, StatsError> {
    let k = controls.len();
    check_pair(x, y, k + 3)?;
    for (_, c) in controls {
        if c.len() != x.len() {
            return Err(StatsError::LengthMismatch { left: x.len(), right: c.len() });
        }
    }
    let n = x.len();
    let rx = DVector::from_vec(rank(x)?);
    let ry = DVector::from_vec(rank(y)?);

    let mut names = vec!["intercept".to_string()];
    let mut design = DMatrix::from_element(n, k + 1, 1.0);
    for (j, (name, c)) in controls.iter().enumerate() {
        let rc = rank(c)?;
        design.column_mut(j + 1).copy_from_slice(&rc);
        names.push(name.clone());
    }

    let residuals = |target: &DVector<f64>| -> Result<Vec<f64>, StatsError> {
        let ls = weighted_least_squares(&design, target, None, &names).map_err(|e| match e {
            StatsError::RankDeficient { column } => StatsError::CollinearControls { column },
            other => other,
        })?;
        Ok((target - &design * &ls.beta).iter().copied().collect())
    };
    let ex = residuals(&rx)?;
    let ey = residuals(&ry)?;
    let scale = (n as f64).powi(2);
    let degenerate = |e: &[f64]| e.iter().map(|v| v * v).sum::<f64>() <= 1e-20 * scale;
    if degenerate(&ex) || degenerate(&ey) {
        return Err(StatsError::Degenerate("residual variance is zero"));
    }
    // residuals from a fit with intercept have mean zero, so this is Pearson r
    let sxy: f64 = ex.iter().zip(&ey).map(|(a, b)| a * b).sum();
    let sxx: f64 = ex.iter().map(|a| a * a).sum();
    let syy: f64 = ey.iter().map(|b| b * b).sum();
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);

    Ok(CorrelationResult {
        rho,
        p_value: t_test_p(rho, (n - 2 - k) as f64),
        n,
        method: CorrelationMethod::PartialSpearman,
        controls: controls.iter().map(|(name, _)| name.clone()).collect(),
    })
}
