use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::StatsError;

/// z quantile used for every reported interval.
pub const Z_95: f64 = 1.96;

/// Design matrix with named columns. The intercept, when present, is an
/// ordinary column of ones named `intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub names: Vec<String>,
    pub matrix: DMatrix<f64>,
}

impl Design {
    pub fn new(names: Vec<String>, matrix: DMatrix<f64>) -> Result<Self, StatsError> {
        if names.len() != matrix.ncols() {
            return Err(StatsError::LengthMismatch { left: names.len(), right: matrix.ncols() });
        }
        if let Some(i) = matrix.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite { index: i % matrix.nrows().max(1) });
        }
        Ok(Self { names, matrix })
    }

    /// Intercept column followed by the given predictors.
    pub fn with_intercept<S: AsRef<str>>(predictors: &[(S, &[f64])]) -> Result<Self, StatsError> {
        let n = predictors.first().map(|(_, c)| c.len()).unwrap_or(0);
        let mut names = vec!["intercept".to_string()];
        let mut matrix = DMatrix::from_element(n, predictors.len() + 1, 1.0);
        for (j, (name, col)) in predictors.iter().enumerate() {
            if col.len() != n {
                return Err(StatsError::LengthMismatch { left: n, right: col.len() });
            }
            matrix.column_mut(j + 1).copy_from_slice(col);
            names.push(name.as_ref().to_string());
        }
        Self::new(names, matrix)
    }

    /// Intercept-only design with `n` rows.
    pub fn intercept_only(n: usize) -> Self {
        Self { names: vec!["intercept".into()], matrix: DMatrix::from_element(n, 1, 1.0) }
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn has_intercept(&self) -> bool {
        self.names.iter().any(|n| n == "intercept")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    NegativeBinomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    Identity,
    Log,
}

impl Family {
    pub fn canonical_link(self) -> Link {
        match self {
            Family::Gaussian => Link::Identity,
            Family::NegativeBinomial => Link::Log,
        }
    }
}

/// Output of an OLS or GLM fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub family: Family,
    pub link: Link,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub ci95: Vec<(f64, f64)>,
    /// Two-sided Wald p-values (normal reference).
    pub p_values: Vec<f64>,
    /// NB2 dispersion: Var(y) = μ + αμ².
    pub dispersion_alpha: Option<f64>,
    /// Set when α could not be estimated and the fallback value was used.
    #[serde(default)]
    pub dispersion_fallback: bool,
    /// Residual variance estimate for Gaussian fits.
    pub scale: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub r_squared: Option<f64>,
    pub n_obs: usize,
}

impl ModelFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.coefficients[i])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// True when the 95% interval of `name` lies entirely on one side of zero.
    pub fn excludes_zero(&self, name: &str) -> Option<bool> {
        self.index_of(name).map(|i| {
            let (lo, hi) = self.ci95[i];
            lo > 0.0 || hi < 0.0
        })
    }
}

pub(crate) fn wald(beta: &[f64], se: &[f64]) -> (Vec<(f64, f64)>, Vec<f64>) {
    let normal = Normal::standard();
    let ci = beta.iter().zip(se).map(|(b, s)| (b - Z_95 * s, b + Z_95 * s)).collect();
    let p = beta
        .iter()
        .zip(se)
        .map(|(b, s)| if *s > 0.0 { (2.0 * normal.cdf(-(b / s).abs())).min(1.0) } else { f64::NAN })
        .collect();
    (ci, p)
}

pub(crate) fn as_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}
