#![allow(dead_code)]

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use viramem_core::stats::Design;

pub fn fixture_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn load_fixture<T: DeserializeOwned>(rel: &str) -> T {
    let path = fixture_path(rel);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[derive(serde::Deserialize)]
pub struct Cases<T> {
    pub cases: Vec<T>,
}

/// Full design matrix given row-wise, first column already the intercept.
pub fn design_from_rows(rows: &[Vec<f64>]) -> Design {
    let p = rows[0].len();
    let names = (0..p).map(|j| if j == 0 { "intercept".to_string() } else { format!("x{j}") }).collect();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Design::new(names, nalgebra::DMatrix::from_row_slice(rows.len(), p, &flat)).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
