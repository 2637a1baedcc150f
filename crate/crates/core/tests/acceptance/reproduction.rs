//! Criterion (data-dependent): on the released corpus, the pooled
//! outlier-removed memorability-comments rho is .203 ± .05, the
//! sentiment-memorability rho is -.242 ± .05, and the comment model has
//! stage3_early > 0, stage3_middle < 0, stage4 > 0.
//!
//! Needs a run config for that corpus (with its feature container) in
//! `VIRAMEM_RELEASED_CONFIG`; skipped otherwise.

use std::fs;
use std::path::PathBuf;

use viramem_core::analysis::{run_analysis, RunConfig};

use crate::end_to_end::correlation;
use crate::Outcome;

pub const CONFIG_ENV: &str = "VIRAMEM_RELEASED_CONFIG";
const TOL: f64 = 0.05;

pub fn run() -> Outcome {
    let Some(path) = std::env::var_os(CONFIG_ENV).map(PathBuf::from) else {
        return Outcome::skipped(format!("released corpus not available (set {CONFIG_ENV})"));
    };
    let out = tempfile::tempdir().expect("tempdir");
    let mut cfg = match RunConfig::from_toml_file(&path) {
        Ok(c) => c,
        Err(e) => return Outcome::from_failures(String::new(), vec![e.to_string()]),
    };
    cfg.output_dir = out.path().to_path_buf();
    cfg.outlier_removal = true;
    if let Err(e) = run_analysis(&cfg) {
        return Outcome::from_failures(String::new(), vec![format!("analyze failed: {e}")]);
    }
    let mut failures = Vec::new();
    let comments = correlation(out.path(), "overall", "all", "memorability", "num_comments").map(|r| r.0);
    match comments {
        Some(r) if (r - 0.203).abs() <= TOL => {}
        other => failures.push(format!("memorability-comments rho {other:?}, want .203")),
    }
    let partials = fs::read_to_string(out.path().join("partials.csv")).unwrap_or_default();
    let sentiment = partials.lines().find_map(|l| {
        let f: Vec<&str> = l.split(',').collect();
        (f.len() > 5 && f[0] == "spearman" && f[1] == "memorability" && f[2] == "avg_sentiment").then(|| f[5].parse::<f64>().ok()).flatten()
    });
    match sentiment {
        Some(r) if (r + 0.242).abs() <= TOL => {}
        other => failures.push(format!("sentiment-memorability rho {other:?}, want -.242")),
    }
    let models: serde_json::Value = fs::read_to_string(out.path().join("layer_models.json"))
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or_default();
    let m = &models["models"]["num_comments"];
    let coef = |name: &str| {
        let i = m["names"].as_array()?.iter().position(|n| n == name)?;
        m["coefficients"][i].as_f64()
    };
    for (name, positive) in [("stage3_early", true), ("stage3_middle", false), ("stage4", true)] {
        match coef(name) {
            Some(b) if (b > 0.0) == positive => {}
            other => failures.push(format!("{name} coefficient {other:?}")),
        }
    }
    Outcome::from_failures(format!("rho {comments:?}, sentiment rho {sentiment:?}, stage signs checked"), failures)
}
