//! Output files: CSV tables and JSON documents carrying the resolved
//! configuration and its hash, and minimal SVG line charts.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::numerics::fmt_f64;
use crate::risk::{CovarianceReport, RiskReport};

/// The resolved configuration embedded in every output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config: serde_json::Value,
    /// SHA-256 of the canonical (key-sorted, compact) configuration JSON.
    pub input_hash: String,
}

impl Provenance {
    pub fn new<T: Serialize>(config: &T) -> Self {
        let config = serde_json::to_value(config).expect("configuration serializes");
        let canonical = config.to_string();
        Self {
            input_hash: hex::encode(Sha256::digest(canonical.as_bytes())),
            config,
        }
    }

    pub fn comment_lines(&self) -> Vec<String> {
        vec![format!("config: {}", self.config), format!("input_sha256: {}", self.input_hash)]
    }
}

/// Renders a CSV table preceded by `# ` comment lines.
pub fn csv_table(comments: &[String], header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for c in comments {
        writeln!(out, "# {c}").unwrap();
    }
    writeln!(out, "{}", header.join(",")).unwrap();
    for r in rows {
        writeln!(out, "{}", r.join(",")).unwrap();
    }
    out
}

/// `{"schema": 1, "config": ..., "input_sha256": ..., "result": ...}`
pub fn json_document<T: Serialize>(result: &T, prov: &Provenance) -> String {
    let doc = serde_json::json!({
        "schema": crate::risk::SCHEMA,
        "config": prov.config,
        "input_sha256": prov.input_hash,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
    s.push('\n');
    s
}

pub const RISK_CSV_HEADER: [&str; 14] = [
    "n",
    "big_n",
    "theta_n",
    "h_n",
    "psi_p",
    "mean_risk",
    "std_error",
    "replicates",
    "mean_normalized_error",
    "bias_norm",
    "mean_xi_moment",
    "xi_moment_variance",
    "mean_stochastic_norm",
    "tail_flags",
];

pub fn risk_report_csv(report: &RiskReport, prov: &Provenance) -> String {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                fmt_f64(r.big_n),
                fmt_f64(r.theta_n),
                fmt_f64(r.h_n),
                fmt_f64(r.psi_p),
                fmt_f64(r.mean_risk),
                fmt_f64(r.std_error),
                r.replicates.to_string(),
                fmt_f64(r.mean_normalized_error),
                fmt_f64(r.bias_norm),
                fmt_f64(r.mean_xi_moment),
                fmt_f64(r.xi_moment_variance),
                fmt_f64(r.mean_stochastic_norm),
                r.tail_flags.to_string(),
            ]
        })
        .collect();
    let mut comments = vec![format!("schema={}", report.schema)];
    comments.extend(prov.comment_lines());
    csv_table(&comments, &RISK_CSV_HEADER, &rows)
}

pub fn covariance_csv(report: &CovarianceReport, prov: &Provenance) -> String {
    let header = [
        "x", "y", "in_d_n", "cov", "var_x", "var_y", "corr", "exact_cov", "exact_var_x", "exact_var_y", "limit_var_x",
    ];
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![fmt_f64(r.x), fmt_f64(r.y), r.in_d_n.to_string()];
            v.extend(
                [r.cov, r.var_x, r.var_y, r.corr, r.exact_cov, r.exact_var_x, r.exact_var_y, r.limit_var_x]
                    .iter()
                    .map(|&x| fmt_f64(x)),
            );
            v
        })
        .collect();
    let mut comments = vec![format!("schema={}", report.schema)];
    comments.extend(prov.comment_lines());
    csv_table(&comments, &header, &rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// A line chart with optional log axes.
#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// Horizontal reference line, e.g. the limit a curve should approach.
    pub reference: Option<f64>,
    /// Written as an XML comment when set.
    pub timestamp: Option<String>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LineChart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
            reference: None,
            timestamp: None,
        }
    }

    fn tx(&self, v: f64, log: bool) -> Option<f64> {
        if log {
            (v > 0.0).then(|| v.log10())
        } else {
            v.is_finite().then_some(v)
        }
    }

    pub fn to_svg(&self) -> String {
        let pts: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|s| {
                s.points
                    .iter()
                    .filter_map(|&(x, y)| Some((self.tx(x, self.log_x)?, self.tx(y, self.log_y)?)))
                    .collect()
            })
            .collect();
        let mut ys: Vec<f64> = pts.iter().flatten().map(|p| p.1).collect();
        if let Some(r) = self.reference.and_then(|r| self.tx(r, self.log_y)) {
            ys.push(r);
        }
        let xs: Vec<f64> = pts.iter().flatten().map(|p| p.0).collect();
        let range = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            match (lo.is_finite(), hi > lo) {
                (false, _) => (0.0, 1.0),
                (true, true) => (lo, hi),
                (true, false) => (lo - 0.5, lo + 0.5),
            }
        };
        let (x0, x1) = range(&xs);
        let (y0, y1) = range(&ys);
        let (y0, y1) = (y0 - 0.05 * (y1 - y0), y1 + 0.05 * (y1 - y0));
        let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        if let Some(t) = &self.timestamp {
            writeln!(s, "<!-- generated {} -->", escape(t)).unwrap();
        }
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        )
        .unwrap();
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        writeln!(s, r#"<path d="M{l},{t} L{l},{b} L{r},{b}" stroke="black" fill="none"/>"#).unwrap();
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let label = |v: f64, log: bool| if log { format!("1e{v:.2}") } else { format!("{v:.4}") };
            writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                px(xv),
                b + 18.0,
                label(xv, self.log_x)
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                l - 6.0,
                py(yv) + 4.0,
                label(yv, self.log_y)
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        )
        .unwrap();
        if let Some(rv) = self.reference.and_then(|r| self.tx(r, self.log_y)) {
            writeln!(
                s,
                r##"<line x1="{l}" x2="{r}" y1="{y:.2}" y2="{y:.2}" stroke="#888" stroke-dasharray="4 4"/>"##,
                y = py(rv)
            )
            .unwrap();
        }
        for (i, (series, p)) in self.series.iter().zip(&pts).enumerate() {
            let color = COLORS[i % COLORS.len()];
            let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            if !path.is_empty() {
                writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                    path.join(" ")
                )
                .unwrap();
            }
            for &(x, y) in p {
                writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(y)).unwrap();
            }
            writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                r - 150.0,
                t + 16.0 * i as f64,
                escape(&series.name)
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Normalized risk against n on a log axis, with the reference level 1.
pub fn risk_chart(report: &RiskReport) -> LineChart {
    let mut c = LineChart::new(
        &format!("normalized L{} risk, {}", report.p, report.density),
        "n",
        "mean loss of normalized error",
    );
    c.log_x = true;
    c.reference = Some(1.0);
    c.series.push(Series {
        name: report.loss.to_string(),
        points: report.rows.iter().map(|r| (r.n as f64, r.mean_risk)).collect(),
    });
    c
}

/// sup-norm bias against N on a log axis.
pub fn bias_chart(density: &str, points: &[(f64, f64)]) -> LineChart {
    let mut c = LineChart::new(&format!("bias, {density}"), "N", "sup |b_n|");
    c.log_y = true;
    c.series.push(Series {
        name: "sup |b_n|".into(),
        points: points.to_vec(),
    });
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_canonical() {
        let a = Provenance::new(&serde_json::json!({"b": 1, "a": [1.5, 2]}));
        let b = Provenance::new(&serde_json::json!({"a": [1.5, 2], "b": 1}));
        assert_eq!(a.input_hash, b.input_hash);
        assert_eq!(a.input_hash.len(), 64);
        let c = Provenance::new(&serde_json::json!({"a": [1.5, 2], "b": 2}));
        assert_ne!(a.input_hash, c.input_hash);
    }

    #[test]
    fn csv_layout() {
        let t = csv_table(&["hello".into()], &["a", "b"], &[vec!["1".into(), "2".into()]]);
        assert_eq!(t, "# hello\na,b\n1,2\n");
    }

    #[test]
    fn svg_is_deterministic_and_escaped() {
        let mut c = LineChart::new("a<b", "x", "y");
        c.log_x = true;
        c.series.push(Series {
            name: "s".into(),
            points: vec![(10.0, 1.0), (100.0, 0.5), (0.0, 3.0)],
        });
        let s1 = c.to_svg();
        assert_eq!(s1, c.to_svg());
        assert!(s1.contains("a&lt;b"));
        assert!(!s1.contains("<!--"));
        assert_eq!(s1.matches("<circle").count(), 2);
        c.timestamp = Some("now".into());
        assert!(c.to_svg().contains("<!-- generated now -->"));
    }
}
