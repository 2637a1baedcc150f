//! SVG rendering of the heatmap and the stage-coefficient panels, and the
//! `report` command that redraws them from analysis outputs.

use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::analysis::{
    HeatmapCell, LayerModelsReport, COEFFICIENTS_SVG, HEATMAP_CSV, HEATMAP_SVG, LAYER_MODELS_FILE,
};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("missing analysis outputs: {}", .0.join(", "))]
    MissingInputs(Vec<String>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

const CELL: f64 = 56.0;
const LABEL_MARGIN: f64 = 150.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Diverging blue-white-red ramp over [-1, 1].
fn ramp(rho: f64) -> String {
    let t = rho.clamp(-1.0, 1.0);
    let (end, w) = if t < 0.0 { ((49.0, 130.0, 189.0), -t) } else { ((222.0, 45.0, 38.0), t) };
    let mix = |c: f64| (255.0 + (c - 255.0) * w).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(end.0), mix(end.1), mix(end.2))
}

fn stars(p: Option<f64>) -> &'static str {
    match p {
        Some(p) if p < 0.001 => "***",
        Some(p) if p < 0.01 => "**",
        Some(p) if p < 0.05 => "*",
        _ => "",
    }
}

/// k×k grid of Spearman rho with significance marks. Cells are taken in
/// order; variable names come from the first row's `var_b` sweep.
pub fn heatmap_svg(cells: &[HeatmapCell]) -> String {
    let mut names: Vec<&str> = Vec::new();
    for c in cells {
        if !names.contains(&c.var_a.as_str()) {
            names.push(&c.var_a);
        }
    }
    let k = names.len();
    let size = LABEL_MARGIN + CELL * k as f64 + 20.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0}" height="{:.0}" font-family="sans-serif" font-size="11">"#,
        size + 40.0
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="18" font-size="14" text-anchor="middle">Spearman correlations (n = {})</text>"#,
        size / 2.0,
        cells.first().map_or(0, |c| c.n)
    );
    for (i, name) in names.iter().enumerate() {
        let y = LABEL_MARGIN + CELL * (i as f64 + 0.5) + 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">{}</text>"#, LABEL_MARGIN - 6.0, escape(name));
        let x = LABEL_MARGIN + CELL * (i as f64 + 0.5);
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" transform="rotate(-45 {x:.1} {:.1})">{}</text>"#,
            LABEL_MARGIN - 6.0,
            LABEL_MARGIN - 6.0,
            escape(name)
        );
    }
    for c in cells {
        let (Some(i), Some(j)) = (names.iter().position(|n| *n == c.var_a), names.iter().position(|n| *n == c.var_b)) else {
            continue;
        };
        let x = LABEL_MARGIN + CELL * j as f64;
        let y = LABEL_MARGIN + CELL * i as f64;
        let (fill, label) = match c.rho {
            Some(r) => (ramp(r), format!("{r:.2}{}", stars(c.p_value))),
            None => ("#dddddd".to_string(), "n/a".to_string()),
        };
        let _ = writeln!(
            s,
            r##"<rect x="{x:.1}" y="{y:.1}" width="{CELL:.1}" height="{CELL:.1}" fill="{fill}" stroke="#ffffff"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#,
            x + CELL / 2.0,
            y + CELL / 2.0 + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{LABEL_MARGIN:.1}" y="{:.1}">* p &lt; .05  ** p &lt; .01  *** p &lt; .001</text>"#,
        LABEL_MARGIN + CELL * k as f64 + 30.0
    );
    s.push_str("</svg>\n");
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub label: String,
    pub beta: Option<f64>,
    pub ci: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub bars: Vec<Bar>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPanels {
    pub panels: Vec<Panel>,
}

const TARGETS: [(&str, &str); 3] =
    [("memorability", "Memorability (Gaussian)"), ("num_comments", "Comments (negative binomial)"), ("avg_sentiment", "Sentiment (Gaussian)")];

impl CoefficientPanels {
    pub fn from_report(report: &LayerModelsReport) -> Self {
        let v = serde_json::to_value(report).expect("report serializes");
        Self::from_json(&v).expect("report has every model")
    }

    /// Reads the `models` section of layer_models.json. Missing or null
    /// numbers become absent bars.
    pub fn from_json(v: &Value) -> Result<Self, String> {
        let mut panels = Vec::new();
        for (key, title) in TARGETS {
            let m = v.pointer(&format!("/models/{key}")).ok_or_else(|| format!("no `{key}` model"))?;
            let names = m.get("names").and_then(Value::as_array).ok_or_else(|| format!("`{key}` has no names"))?;
            let coef = m.get("coefficients").and_then(Value::as_array).ok_or_else(|| format!("`{key}` has no coefficients"))?;
            let ci = m.get("ci95").and_then(Value::as_array).cloned().unwrap_or_default();
            let mut bars = Vec::new();
            for (i, name) in names.iter().enumerate() {
                let Some(name) = name.as_str() else { continue };
                if name == "intercept" {
                    continue;
                }
                let interval = ci.get(i).and_then(|c| Some((c.get(0)?.as_f64()?, c.get(1)?.as_f64()?)));
                bars.push(Bar { label: name.to_string(), beta: coef.get(i).and_then(Value::as_f64), ci: interval });
            }
            panels.push(Panel { title: title.to_string(), bars });
        }
        Ok(Self { panels })
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" { "0.000".into() } else { s }
}

/// One bar chart per model: a bar per stage coefficient with its 95% CI.
pub fn coefficients_svg(panels: &CoefficientPanels) -> String {
    let (pw, ph, top, left, bottom) = (300.0, 280.0, 50.0, 60.0, 90.0);
    let width = pw * panels.panels.len() as f64 + 20.0;
    let height = top + ph + bottom;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, panel) in panels.panels.iter().enumerate() {
        let x0 = 10.0 + pw * k as f64;
        let plot_w = pw - left - 10.0;
        let mut lo: f64 = 0.0;
        let mut hi: f64 = 0.0;
        for b in &panel.bars {
            for v in b.beta.into_iter().chain(b.ci.iter().flat_map(|(a, c)| [*a, *c])) {
                if v.is_finite() {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        if hi - lo <= 0.0 {
            hi = 1.0;
            lo = -1.0;
        }
        let pad = (hi - lo) * 0.08;
        let (lo, hi) = (lo - pad, hi + pad);
        let y = |v: f64| top + ph * (hi - v) / (hi - lo);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="30" font-size="13" text-anchor="middle">{}</text>"#,
            x0 + left + plot_w / 2.0,
            escape(&panel.title)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{top:.1}" x2="{:.1}" y2="{:.1}" stroke="#000000"/>"##,
            x0 + left,
            x0 + left,
            top + ph
        );
        for t in 0..=4 {
            let v = lo + (hi - lo) * t as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                x0 + left - 4.0,
                y(v) + 4.0,
                tick_label(v)
            );
        }
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#888888" stroke-dasharray="3,3"/>"##,
            x0 + left,
            y(0.0),
            x0 + left + plot_w,
            y(0.0)
        );
        let slot = plot_w / panel.bars.len().max(1) as f64;
        for (i, b) in panel.bars.iter().enumerate() {
            let cx = x0 + left + slot * (i as f64 + 0.5);
            if let Some(beta) = b.beta.filter(|v| v.is_finite()) {
                let significant = b.ci.is_some_and(|(a, c)| a > 0.0 || c < 0.0);
                let fill = if significant { "#3a6ea5" } else { "#a9c1dc" };
                let (y1, y2) = (y(beta).min(y(0.0)), y(beta).max(y(0.0)));
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="{fill}"/>"#,
                    cx - slot * 0.3,
                    slot * 0.6,
                    y2 - y1
                );
            }
            if let Some((a, c)) = b.ci.filter(|(a, c)| a.is_finite() && c.is_finite()) {
                let _ = writeln!(
                    s,
                    r##"<path d="M{:.1} {:.1}H{:.1}M{cx:.1} {:.1}V{:.1}M{:.1} {:.1}H{:.1}" stroke="#000000" fill="none"/>"##,
                    cx - 6.0,
                    y(a),
                    cx + 6.0,
                    y(a),
                    y(c),
                    cx - 6.0,
                    y(c),
                    cx + 6.0
                );
            }
            let ly = top + ph + 12.0;
            let _ = writeln!(
                s,
                r#"<text x="{cx:.1}" y="{ly:.1}" text-anchor="end" transform="rotate(-40 {cx:.1} {ly:.1})">{}</text>"#,
                escape(&b.label)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn write_atomic(path: &Path, text: &str) -> Result<(), ReportError> {
    let tmp = path.with_extension("svg.tmp");
    fs::write(&tmp, text).map_err(|source| ReportError::Io { path: tmp.clone(), source })?;
    fs::rename(&tmp, path).map_err(|source| ReportError::Io { path: path.to_path_buf(), source })
}

/// Redraws both figures from `heatmap.csv` and `layer_models.json`.
pub fn run_report(results_dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    let inputs = [HEATMAP_CSV, LAYER_MODELS_FILE];
    let missing: Vec<String> =
        inputs.iter().filter(|f| !results_dir.join(f).is_file()).map(|f| results_dir.join(f).display().to_string()).collect();
    if !missing.is_empty() {
        return Err(ReportError::MissingInputs(missing));
    }
    let heat_path = results_dir.join(HEATMAP_CSV);
    let parse = |path: &Path, message: String| ReportError::Parse { path: path.to_path_buf(), message };
    let mut reader = csv::Reader::from_path(&heat_path).map_err(|e| parse(&heat_path, e.to_string()))?;
    let cells: Vec<HeatmapCell> =
        reader.deserialize().collect::<Result<_, _>>().map_err(|e| parse(&heat_path, e.to_string()))?;

    let models_path = results_dir.join(LAYER_MODELS_FILE);
    let text = fs::read_to_string(&models_path).map_err(|source| ReportError::Io { path: models_path.clone(), source })?;
    let json: Value = serde_json::from_str(&text).map_err(|e| parse(&models_path, e.to_string()))?;
    let panels = CoefficientPanels::from_json(&json).map_err(|m| parse(&models_path, m))?;

    let heat_svg = results_dir.join(HEATMAP_SVG);
    write_atomic(&heat_svg, &heatmap_svg(&cells))?;
    let coef_svg = results_dir.join(COEFFICIENTS_SVG);
    write_atomic(&coef_svg, &coefficients_svg(&panels))?;
    Ok(vec![heat_svg, coef_svg])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(a: &str, b: &str, rho: Option<f64>) -> HeatmapCell {
        HeatmapCell { var_a: a.into(), var_b: b.into(), n: 10, rho, p_value: rho.map(|_| 0.02), status: "ok".into() }
    }

    #[test]
    fn heatmap_grid_has_k_squared_cells() {
        let names = ["a", "b", "c"];
        let cells: Vec<_> = names
            .iter()
            .flat_map(|a| names.iter().map(move |b| cell(a, b, if a == b { Some(1.0) } else { Some(-0.5) })))
            .collect();
        let svg = heatmap_svg(&cells);
        assert_eq!(svg.matches("<rect x=").count(), 9);
        assert!(svg.contains("-0.50*"));
        assert_eq!(svg, heatmap_svg(&cells));
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#ffffff");
        assert_eq!(ramp(1.0), "#de2d26");
        assert_eq!(ramp(-1.0), "#3182bd");
    }

    #[test]
    fn six_bars_per_panel() {
        let stages = ["stage1", "stage2", "stage3_early", "stage3_middle", "stage3_late", "stage4"];
        let model = |scale: f64| {
            let mut names = vec!["intercept".to_string()];
            names.extend(stages.iter().map(|s| s.to_string()));
            let coefficients: Vec<f64> = (0..7).map(|i| scale * (i as f64 - 3.0)).collect();
            let ci95: Vec<(f64, f64)> = coefficients.iter().map(|b| (b - 0.5, b + 0.5)).collect();
            serde_json::json!({"names": names, "coefficients": coefficients, "ci95": ci95})
        };
        let v = serde_json::json!({"models": {"memorability": model(1.0), "num_comments": model(0.1), "avg_sentiment": model(-0.2)}});
        let panels = CoefficientPanels::from_json(&v).unwrap();
        assert!(panels.panels.iter().all(|p| p.bars.len() == 6));
        let svg = coefficients_svg(&panels);
        assert_eq!(svg.matches("<path d=").count(), 18);
        assert!(svg.matches("<rect x=").count() >= 15);
    }

    #[test]
    fn missing_inputs_are_listed() {
        let dir = tempfile::tempdir().unwrap();
        match run_report(dir.path()) {
            Err(ReportError::MissingInputs(m)) => assert_eq!(m.len(), 2),
            other => panic!("{other:?}"),
        }
    }
}
