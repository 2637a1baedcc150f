//! Criterion: on the committed synthetic set (comments drawn from
//! NB(exp(a + b·memorability)), b > 0) `analyze` finds a positive,
//! significant memorability-comments correlation, writes every output and
//! reruns byte-identically in under two minutes.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use viramem_core::analysis::{run_analysis, RunConfig};
use viramem_core::synth::{SynthOptions, CONFIG_FILE};

use crate::common::fixture_path;
use crate::Outcome;

pub const OUTPUT_FILES: [&str; 8] = [
    "correlations.csv",
    "partials.csv",
    "heatmap.csv",
    "heatmap.svg",
    "sentiment.csv",
    "consistency.csv",
    "layer_models.json",
    "coefficients.svg",
];
const BUDGET: Duration = Duration::from_secs(120);

/// (rho, p) of a row in correlations.csv.
pub fn correlation(out: &Path, scope: &str, group: &str, x: &str, y: &str) -> Option<(f64, f64)> {
    let text = fs::read_to_string(out.join("correlations.csv")).ok()?;
    text.lines().skip(1).find_map(|line| {
        let f: Vec<&str> = line.split(',').collect();
        (f.len() == 9 && f[0] == "outliers_removed" && f[1] == scope && f[2] == group && f[3] == x && f[4] == y)
            .then(|| Some((f[6].parse().ok()?, f[7].parse().ok()?)))
            .flatten()
    })
}

fn config(out: &Path) -> RunConfig {
    let mut cfg = RunConfig::from_toml_file(&fixture_path("synthetic").join(CONFIG_FILE)).expect("fixture config");
    cfg.output_dir = out.to_path_buf();
    cfg
}

pub fn run() -> Outcome {
    let a = tempfile::tempdir().expect("tempdir");
    let b = tempfile::tempdir().expect("tempdir");
    let mut failures = Vec::new();
    let start = Instant::now();
    if let Err(e) = run_analysis(&config(a.path())) {
        return Outcome::from_failures(String::new(), vec![format!("analyze failed: {e}")]);
    }
    let one_run = start.elapsed();
    if let Err(e) = run_analysis(&config(b.path())) {
        return Outcome::from_failures(String::new(), vec![format!("second analyze failed: {e}")]);
    }
    if one_run > BUDGET {
        failures.push(format!("analyze took {one_run:.1?}"));
    }

    let planted = SynthOptions::default().comment_slope;
    let (rho, p) = match correlation(a.path(), "overall", "all", "memorability", "num_comments") {
        Some(v) => v,
        None => {
            failures.push("no overall memorability-num_comments row".into());
            (f64::NAN, f64::NAN)
        }
    };
    if !(rho > 0.0 && p < 0.05) {
        failures.push(format!("rho {rho}, p {p}"));
    }
    let mut differing = Vec::new();
    for f in OUTPUT_FILES {
        match (fs::read(a.path().join(f)), fs::read(b.path().join(f))) {
            (Ok(x), Ok(y)) if x == y => {}
            (Ok(_), Ok(_)) => differing.push(f),
            _ => failures.push(format!("{f} missing")),
        }
    }
    if !differing.is_empty() {
        failures.push(format!("reruns differ in {}", differing.join(", ")));
    }
    Outcome::from_failures(
        format!(
            "b = {planted}: rho {rho:.3}, p {p:.1e}; {} files identical across runs; analyze {one_run:.1?}",
            OUTPUT_FILES.len()
        ),
        failures,
    )
}
