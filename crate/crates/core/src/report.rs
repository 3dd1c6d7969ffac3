//! Run configuration and record types plus CSV and SVG emission.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::curvature::SpaceKind;
use crate::error::{Error, Result};
use crate::mcf::{FlowConfig, MapKind};
use crate::pinching::SearchOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    #[default]
    Json,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Constants {
        n_pairs: usize,
        search: SearchOptions,
        lambda_grid: Vec<f64>,
        n: u32,
        probe: f64,
    },
    Curvature {
        space: SpaceKind,
        samples: usize,
        seed: u64,
    },
    Appendix,
    Simulate {
        map: MapKind,
        /// Grid file the initial map was read from, replacing `map`.
        initial_grid: Option<String>,
        grid_size: usize,
        flow: FlowConfig,
        /// Track the Riccati comparison using δ at this pinch.
        riccati_lambda1: Option<f64>,
    },
    Sweep {
        eps: Vec<f64>,
        harmonics: usize,
        grid_sizes: Vec<usize>,
        flow: FlowConfig,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub out: Option<String>,
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub tool_version: String,
    pub wall_time_s: f64,
    #[serde(flatten)]
    pub result: Map<String, Value>,
    pub warnings: Vec<String>,
}

impl RunRecord {
    /// Builds a record whose result fields sit at the top level. `result`
    /// must serialize to a JSON object.
    pub fn new<T: Serialize>(config: RunConfig, result: &T, wall_time_s: f64, warnings: Vec<String>) -> Result<Self> {
        let value = serde_json::to_value(result).map_err(|e| Error::Parse(e.to_string()))?;
        let Value::Object(result) = value else {
            return Err(Error::Parse("result payload is not a JSON object".into()));
        };
        Ok(Self { config, tool_version: env!("CARGO_PKG_VERSION").to_string(), wall_time_s, result, warnings })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// 17 significant digits, '.' separator, exponent form.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// CSV text with the config embedded as leading '#' lines.
pub fn write_csv(config: &RunConfig, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# pinchflow {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# config: {}", serde_json::to_string(config).expect("config serializes"));
    let _ = writeln!(s, "{}", header.join(","));
    for r in rows {
        let _ = writeln!(s, "{}", r.join(","));
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub width: u32,
    pub height: u32,
    /// Embedded verbatim (escaped) in a <desc> element.
    pub metadata: Option<String>,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            title: String::new(),
            x_label: "t".into(),
            y_label: String::new(),
            log_y: false,
            width: 720,
            height: 480,
            metadata: None,
        }
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.round() as i64)
    } else if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{:.4}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Standalone SVG line plot. With `log_y`, non-positive values are dropped.
pub fn emit_plot(series: &[Series], spec: &PlotSpec) -> Result<String> {
    let transform = |y: f64| if spec.log_y { y.log10() } else { y };
    let data: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!spec.log_y || *y > 0.0))
                .map(|&(x, y)| (x, transform(y)))
                .collect()
        })
        .collect();
    let all: Vec<(f64, f64)> = data.iter().flatten().copied().collect();
    if all.is_empty() {
        return Err(Error::EmptySeries);
    }
    let (mut x0, mut x1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if x1 - x0 <= 0.0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 <= 0.0 {
        let pad = if y0 == 0.0 { 1.0 } else { 0.1 * y0.abs() };
        y0 -= pad;
        y1 += pad;
    }
    if spec.log_y {
        y0 = y0.floor();
        y1 = y1.ceil();
    }

    let (w, h) = (spec.width as f64, spec.height as f64);
    let (ml, mr, mt, mb) = (80.0, 20.0, 40.0, 50.0);
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        spec.width, spec.height, spec.width, spec.height
    );
    if let Some(m) = &spec.metadata {
        let _ = writeln!(s, "<desc>{}</desc>", escape(m));
    }
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        w / 2.0,
        escape(&spec.title)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2}" fill="none" stroke="black"/>"#,
        ml,
        mt,
        ml,
        h - mb,
        w - mr,
        h - mb
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            px(fx),
            h - mb + 16.0,
            tick_label(fx, false)
        );
        let fy = if spec.log_y {
            let steps = (y1 - y0).max(1.0);
            (y0 + (steps * k as f64 / 4.0).round()).min(y1)
        } else {
            y0 + (y1 - y0) * k as f64 / 4.0
        };
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            ml - 6.0,
            py(fy) + 4.0,
            tick_label(fy, spec.log_y)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        (ml + w - mr) / 2.0,
        h - 10.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {:.2})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(&spec.y_label)
    );
    for (idx, (ser, pts)) in series.iter().zip(&data).enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if !pts.is_empty() {
            let mut d = String::new();
            for (k, &(x, y)) in pts.iter().enumerate() {
                let _ = write!(d, "{}{:.2},{:.2}", if k == 0 { "M" } else { " L" }, px(x), py(y));
            }
            let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        }
        let ly = mt + 16.0 * idx as f64 + 8.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            w - mr - 180.0,
            ly,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
