//! Least squares through a column-pivoted QR decomposition.
//!
//! Columns are equilibrated to unit norm before factorisation so the rank
//! test is independent of predictor scale (resolution in pixels² next to a
//! 0/1 dummy is the normal case here).

use nalgebra::{DMatrix, DVector};

use super::StatsError;

/// Relative threshold on |R_kk| / |R_00| below which a column counts as
/// linearly dependent on the ones pivoted before it.
const RANK_TOLERANCE: f64 = 1e-10;

/// Solution of a (weighted) least-squares problem.
#[derive(Debug, Clone)]
pub(crate) struct LeastSquares {
    pub beta: DVector<f64>,
    /// (XᵀWX)⁻¹, unscaled.
    pub xtwx_inv: DMatrix<f64>,
}

/// Solves min ‖√w ⊙ (y − Xβ)‖². `names` label columns for error messages.
pub(crate) fn weighted_least_squares(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    weights: Option<&DVector<f64>>,
    names: &[String],
) -> Result<LeastSquares, StatsError> {
    let (n, p) = x.shape();
    if n <= p {
        return Err(StatsError::TooFewObservations { needed: p + 1, got: n });
    }

    let mut a = x.clone();
    let mut b = y.clone();
    if let Some(w) = weights {
        for i in 0..n {
            let sw = w[i].sqrt();
            b[i] *= sw;
            for j in 0..p {
                a[(i, j)] *= sw;
            }
        }
    }

    let mut scale = vec![1.0; p];
    for (j, s) in scale.iter_mut().enumerate() {
        let norm = a.column(j).norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(StatsError::RankDeficient { column: column_name(names, j) });
        }
        *s = norm;
        a.column_mut(j).scale_mut(1.0 / norm);
    }

    let qr = a.col_piv_qr();
    let r = qr.r();
    let q = qr.q();

    // order[k] = original column sitting at pivot position k
    let mut order = DMatrix::<f64>::from_fn(1, p, |_, j| j as f64);
    qr.p().permute_columns(&mut order);
    let order: Vec<usize> = order.iter().map(|v| *v as usize).collect();

    let r00 = r[(0, 0)].abs();
    for k in 0..p {
        if !(r[(k, k)].abs() > RANK_TOLERANCE * r00) {
            return Err(StatsError::RankDeficient { column: column_name(names, order[k]) });
        }
    }

    let r_square = r.view((0, 0), (p, p)).into_owned();
    let qty = q.transpose() * &b;
    let beta_perm = r_square
        .solve_upper_triangular(&qty)
        .ok_or_else(|| StatsError::RankDeficient { column: column_name(names, order[p - 1]) })?;
    let r_inv = r_square
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| StatsError::RankDeficient { column: column_name(names, order[p - 1]) })?;
    let cov_perm = &r_inv * r_inv.transpose();

    let mut beta = DVector::zeros(p);
    let mut xtwx_inv = DMatrix::zeros(p, p);
    for (k, &ck) in order.iter().enumerate() {
        beta[ck] = beta_perm[k] / scale[ck];
        for (l, &cl) in order.iter().enumerate() {
            xtwx_inv[(ck, cl)] = cov_perm[(k, l)] / (scale[ck] * scale[cl]);
        }
    }

    Ok(LeastSquares { beta, xtwx_inv })
}

fn column_name(names: &[String], j: usize) -> String {
    names.get(j).cloned().unwrap_or_else(|| format!("column {j}"))
}
