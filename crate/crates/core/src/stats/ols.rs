use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::linalg::weighted_least_squares;
use super::model::{as_vec, wald, Design, Family, Link, ModelFit};
use super::StatsError;

/// Ordinary least squares. Standard errors use σ̂² = RSS / (n − p).
pub fn ols_fit(design: &Design, y: &[f64]) -> Result<ModelFit, StatsError> {
    let fit = ols_with_residuals(design, y)?;
    Ok(fit.0)
}

/// OLS fit together with the residual vector y − Xβ̂.
pub fn ols_with_residuals(design: &Design, y: &[f64]) -> Result<(ModelFit, Vec<f64>), StatsError> {
    let n = design.nrows();
    let p = design.ncols();
    if y.len() != n {
        return Err(StatsError::LengthMismatch { left: n, right: y.len() });
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite { index: i });
    }
    let yv = DVector::from_column_slice(y);
    let ls = weighted_least_squares(&design.matrix, &yv, None, &design.names)?;
    let fitted = &design.matrix * &ls.beta;
    let resid = &yv - &fitted;
    let rss = resid.norm_squared();
    let df = (n - p) as f64;
    let sigma2 = rss / df;

    let se: Vec<f64> = (0..p).map(|j| (sigma2 * ls.xtwx_inv[(j, j)]).sqrt()).collect();
    let beta = as_vec(&ls.beta);
    let (ci95, p_values) = wald(&beta, &se);

    let tss = if design.has_intercept() {
        let mean = yv.mean();
        yv.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
    } else {
        yv.norm_squared()
    };
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };

    let sigma2_mle = rss / n as f64;
    let log_likelihood = if sigma2_mle > 0.0 {
        -0.5 * n as f64 * ((2.0 * std::f64::consts::PI * sigma2_mle).ln() + 1.0)
    } else {
        f64::INFINITY
    };

    let fit = ModelFit {
        family: Family::Gaussian,
        link: Link::Identity,
        names: design.names.clone(),
        coefficients: beta,
        standard_errors: se,
        ci95,
        p_values,
        dispersion_alpha: None,
        dispersion_fallback: false,
        scale: sigma2,
        log_likelihood,
        converged: true,
        iterations: 1,
        r_squared: Some(r_squared),
        n_obs: n,
    };
    Ok((fit, as_vec(&resid)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VifEntry {
    pub name: String,
    /// `f64::INFINITY` for a predictor that is an exact linear combination
    /// of the others; serialised as `null` with `perfectly_collinear` set.
    #[serde(with = "inf_as_null")]
    pub vif: f64,
    pub perfectly_collinear: bool,
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// R² of each predictor regressed on the rest (with intercept); VIF = 1 / (1 − R²).
pub fn vif(predictors: &[(String, Vec<f64>)]) -> Result<Vec<VifEntry>, StatsError> {
    if predictors.len() < 2 {
        return Err(StatsError::TooFewPredictors { needed: 2, got: predictors.len() });
    }
    let mut out = Vec::with_capacity(predictors.len());
    for (j, (name, target)) in predictors.iter().enumerate() {
        let mut others: Vec<(&str, &[f64])> = predictors
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, (n, c))| (n.as_str(), c.as_slice()))
            .collect();
        // Aliased regressors span nothing new; drop them until the design is full rank.
        let r2 = loop {
            let design = if others.is_empty() {
                Design::intercept_only(target.len())
            } else {
                Design::with_intercept(&others)?
            };
            match ols_fit(&design, target) {
                Ok(fit) => break fit.r_squared.unwrap_or(0.0),
                Err(StatsError::RankDeficient { column }) if column != "intercept" => {
                    others.retain(|(n, _)| *n != column);
                }
                Err(StatsError::RankDeficient { .. }) => {
                    // a constant regressor duplicates the intercept
                    let before = others.len();
                    others.retain(|(_, c)| !is_constant(c));
                    if others.len() == before {
                        break 1.0;
                    }
                }
                Err(e) => return Err(e),
            }
        };
        let value = if r2 >= 1.0 - 1e-12 { f64::INFINITY } else { 1.0 / (1.0 - r2) };
        // a constant target has no variance left to explain
        let value = if is_constant(target) { f64::INFINITY } else { value };
        out.push(VifEntry { name: name.clone(), vif: value, perfectly_collinear: value.is_infinite() });
    }
    Ok(out)
}

fn is_constant(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] == w[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 2.0 * v).collect();
        let d = Design::with_intercept(&[("x", &x[..])]).unwrap();
        let fit = ols_fit(&d, &y).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_centered_response_has_zero_slope() {
        let x = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let y = [1.0, -2.0, 2.0, -2.0, 1.0];
        let d = Design::with_intercept(&[("x", &x[..])]).unwrap();
        let fit = ols_fit(&d, &y).unwrap();
        assert!(fit.coefficients[1].abs() < 1e-14);
    }

    #[test]
    fn ci_is_symmetric_wald() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [0.1, 1.3, 1.9, 3.2, 3.8, 5.1];
        let fit = ols_fit(&Design::with_intercept(&[("x", &x[..])]).unwrap(), &y).unwrap();
        for i in 0..2 {
            let (lo, hi) = fit.ci95[i];
            assert!((lo - (fit.coefficients[i] - 1.96 * fit.standard_errors[i])).abs() < 1e-15);
            assert!((hi - (fit.coefficients[i] + 1.96 * fit.standard_errors[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn rank_deficiency_names_column() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 4.0, 6.0, 8.0, 10.0];
        let d = Design::with_intercept(&[("a", &a[..]), ("b", &b[..])]).unwrap();
        match ols_fit(&d, &[1.0, 0.0, 1.0, 0.0, 1.0]) {
            Err(StatsError::RankDeficient { column }) => assert!(column == "a" || column == "b"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn vif_orthogonal_is_one() {
        // centred, mutually orthogonal columns
        let a = vec![1.0, -1.0, 1.0, -1.0];
        let b = vec![1.0, 1.0, -1.0, -1.0];
        let c = vec![1.0, -1.0, -1.0, 1.0];
        let v = vif(&[("a".into(), a), ("b".into(), b), ("c".into(), c)]).unwrap();
        for e in v {
            assert!((e.vif - 1.0).abs() < 1e-9, "{e:?}");
        }
    }

    #[test]
    fn vif_duplicate_column_flagged() {
        let a = vec![1.0, 3.0, 2.0, 5.0, 4.0, 7.0];
        let b = vec![2.0, 1.0, 4.0, 3.0, 6.0, 5.0];
        let v = vif(&[("a".into(), a.clone()), ("b".into(), b), ("a2".into(), a)]).unwrap();
        assert!(v[0].perfectly_collinear && v[2].perfectly_collinear);
        assert!(!v[1].perfectly_collinear);
        let json = serde_json::to_string(&v[0]).unwrap();
        assert!(json.contains("\"vif\":null"));
    }
}
