use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::RowSource;

use super::DistinctError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceOptions {
    /// Memory for the two standardized row tiles held at once.
    pub tile_bytes: usize,
    /// Largest N for which the full N×N matrix is kept; above it only row
    /// means are accumulated.
    pub materialize_max_n: usize,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self { tile_bytes: 256 << 20, materialize_max_n: 4096 }
    }
}

impl DistanceOptions {
    fn rows_per_tile(&self, row_len: usize) -> usize {
        (self.tile_bytes / (2 * 8 * row_len.max(1))).max(1)
    }
}

/// Symmetric N×N matrix of 1 − Pearson r, zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityMatrix {
    pub n: usize,
    /// Row-major entries.
    pub entries: Vec<f64>,
}

impl DissimilarityMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }
}

/// Rows `start..start+count`, each centred and scaled to unit norm.
fn standardized_tile(src: &dyn RowSource, start: usize, count: usize) -> Result<Vec<f64>, DistinctError> {
    let d = src.row_len();
    let mut buf = Vec::with_capacity(count * d);
    src.read_rows(start, count, &mut buf)?;
    for (k, row) in buf.chunks_exact_mut(d).enumerate() {
        let mean = row.iter().sum::<f64>() / d as f64;
        row.iter_mut().for_each(|x| *x -= mean);
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(DistinctError::ZeroVariance { image: src.row_name(start + k) });
        }
        row.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(buf)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    let r: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (1.0 - r).clamp(0.0, 2.0)
}

fn tiles(n: usize, per: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).step_by(per).map(move |s| (s, per.min(n - s)))
}

fn check_shape(src: &dyn RowSource) -> Result<(), DistinctError> {
    if src.n_rows() < 2 {
        return Err(DistinctError::TooFewImages { got: src.n_rows() });
    }
    if src.row_len() < 2 {
        return Err(DistinctError::RowTooShort { len: src.row_len() });
    }
    Ok(())
}

/// Full matrix, computed tile by tile. Each entry depends only on its two
/// rows, so the result does not depend on the tile size.
pub fn pearson_distance_matrix(src: &dyn RowSource, opts: &DistanceOptions) -> Result<DissimilarityMatrix, DistinctError> {
    check_shape(src)?;
    let n = src.n_rows();
    let d = src.row_len();
    let per = opts.rows_per_tile(d);
    let mut entries = vec![0.0; n * n];
    for (si, ci) in tiles(n, per) {
        let a = standardized_tile(src, si, ci)?;
        for (sj, cj) in tiles(n, per).filter(|(sj, _)| *sj >= si) {
            let b_owned;
            let b = if sj == si {
                &a
            } else {
                b_owned = standardized_tile(src, sj, cj)?;
                &b_owned
            };
            let pairs: Vec<(usize, usize)> = (0..ci)
                .flat_map(|i| (0..cj).map(move |j| (i, j)))
                .filter(|(i, j)| sj + j > si + i)
                .collect();
            let values: Vec<f64> = pairs
                .par_iter()
                .map(|&(i, j)| distance(&a[i * d..(i + 1) * d], &b[j * d..(j + 1) * d]))
                .collect();
            for (&(i, j), v) in pairs.iter().zip(values) {
                let (gi, gj) = (si + i, sj + j);
                entries[gi * n + gj] = v;
                entries[gj * n + gi] = v;
            }
        }
    }
    Ok(DissimilarityMatrix { n, entries })
}

/// Mean of each row excluding the diagonal.
pub fn mean_dissimilarity(m: &DissimilarityMatrix) -> Vec<f64> {
    let n = m.n;
    (0..n)
        .map(|i| m.row(i).iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).sum::<f64>() / (n - 1) as f64)
        .collect()
}

/// Row means without keeping the matrix: every row sweeps all column
/// tiles in order, summing in the same order as [`mean_dissimilarity`].
pub fn streamed_mean_dissimilarity(src: &dyn RowSource, opts: &DistanceOptions) -> Result<Vec<f64>, DistinctError> {
    check_shape(src)?;
    let n = src.n_rows();
    let d = src.row_len();
    let per = opts.rows_per_tile(d);
    let mut sums = vec![0.0; n];
    for (si, ci) in tiles(n, per) {
        let a = standardized_tile(src, si, ci)?;
        for (sj, cj) in tiles(n, per) {
            let b_owned;
            let b = if sj == si {
                &a
            } else {
                b_owned = standardized_tile(src, sj, cj)?;
                &b_owned
            };
            sums[si..si + ci].par_iter_mut().enumerate().for_each(|(i, acc)| {
                for j in 0..cj {
                    if sj + j != si + i {
                        *acc += distance(&a[i * d..(i + 1) * d], &b[j * d..(j + 1) * d]);
                    }
                }
            });
        }
    }
    Ok(sums.into_iter().map(|s| s / (n - 1) as f64).collect())
}

/// Row means, materializing the matrix only when N is small enough.
pub fn layer_mean_dissimilarity(src: &dyn RowSource, opts: &DistanceOptions) -> Result<Vec<f64>, DistinctError> {
    if src.n_rows() <= opts.materialize_max_n {
        Ok(mean_dissimilarity(&pearson_distance_matrix(src, opts)?))
    } else {
        streamed_mean_dissimilarity(src, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::RowMatrix;

    #[test]
    fn identical_and_negated_rows() {
        let m = RowMatrix::from_rows(&[vec![1.0, 2.0, 4.0], vec![1.0, 2.0, 4.0], vec![-1.0, -2.0, -4.0]]);
        let d = pearson_distance_matrix(&m, &DistanceOptions::default()).unwrap();
        assert_eq!(d.get(0, 1), 0.0);
        assert!((d.get(0, 2) - 2.0).abs() < 1e-15);
        assert_eq!(d.get(1, 1), 0.0);
        assert_eq!(d.get(2, 0), d.get(0, 2));
    }

    #[test]
    fn constant_row_names_the_image() {
        let mut m = RowMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 3.0]]);
        m.names = vec!["aa".into(), "bb".into()];
        match pearson_distance_matrix(&m, &DistanceOptions::default()) {
            Err(DistinctError::ZeroVariance { image }) => assert_eq!(image, "bb"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_images_share_the_distance() {
        let m = RowMatrix::from_rows(&[vec![0.0, 1.0, 3.0], vec![2.0, 1.0, 0.5]]);
        let d = pearson_distance_matrix(&m, &DistanceOptions::default()).unwrap();
        let means = mean_dissimilarity(&d);
        assert_eq!(means, vec![d.get(0, 1), d.get(0, 1)]);
    }

    #[test]
    fn hand_built_row_means() {
        let m = DissimilarityMatrix {
            n: 4,
            entries: vec![
                0.0, 0.3, 0.6, 0.9, //
                0.3, 0.0, 1.2, 0.0, //
                0.6, 1.2, 0.0, 1.5, //
                0.9, 0.0, 1.5, 0.0,
            ],
        };
        let got = mean_dissimilarity(&m);
        let want = [0.6, 0.5, 1.1, 0.8];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
    }

    #[test]
    fn tile_size_does_not_change_results() {
        let rows: Vec<Vec<f64>> =
            (0..9).map(|i| (0..7).map(|k| ((i * 31 + k * 17) % 11) as f64 + 0.1 * k as f64).collect()).collect();
        let m = RowMatrix::from_rows(&rows);
        let big = DistanceOptions::default();
        let small = DistanceOptions { tile_bytes: 2 * 8 * 7 * 2, materialize_max_n: 0 };
        let full = pearson_distance_matrix(&m, &big).unwrap();
        assert_eq!(full, pearson_distance_matrix(&m, &small).unwrap());
        let a = mean_dissimilarity(&full);
        assert_eq!(a, streamed_mean_dissimilarity(&m, &small).unwrap());
        assert_eq!(a, layer_mean_dissimilarity(&m, &small).unwrap());
    }
}
