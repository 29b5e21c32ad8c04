//! SVG scatter plots of embedding CSVs.
//!
//! Coordinates 1 and 2 are normalized to the unit square spanned by their
//! bounding box (y pointing up), point area is proportional to weight, and
//! the fill runs linearly from blue (`#2166ac`, column minimum) to red
//! (`#b2182b`, column maximum) along the color column.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const RAMP_LOW: [u8; 3] = [0x21, 0x66, 0xac];
pub const RAMP_HIGH: [u8; 3] = [0xb2, 0x18, 0x2b];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub label: String,
    pub weight: f64,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    /// Headers of the coordinate columns only.
    pub columns: Vec<String>,
    pub points: Vec<PlotPoint>,
}

/// Reads `id,label,weight,x1,...` as written by the embed command.
pub fn parse_embedding_csv(text: &str) -> Result<EmbeddingTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?.clone();
    let names: Vec<&str> = headers.iter().collect();
    if names.len() < 3 || names[..3] != ["id", "label", "weight"] {
        return Err(Error::Parse { line: 1, message: "expected header id,label,weight,x1,...".into() });
    }
    let columns: Vec<String> = names[3..].iter().map(|s| s.to_string()).collect();
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let number = |field: &str| {
            field.trim().parse::<f64>().map_err(|_| Error::Parse { line, message: format!("not a number: {field:?}") })
        };
        let weight = number(&record[2])?;
        if weight.is_nan() || weight < 0.0 {
            return Err(Error::Parse { line, message: "weight must be non-negative".into() });
        }
        let coords = record.iter().skip(3).map(number).collect::<Result<Vec<f64>>>()?;
        points.push(PlotPoint { label: record[1].to_string(), weight, coords });
    }
    Ok(EmbeddingTable { columns, points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    /// 1-based coordinate column driving the color; defaults to 3 when present.
    pub color_column: Option<usize>,
    pub size: f64,
    pub margin: f64,
    pub max_radius: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self { color_column: None, size: 640.0, margin: 32.0, max_radius: 12.0 }
    }
}

fn normalize(values: impl Iterator<Item = f64> + Clone) -> impl Fn(f64) -> f64 {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    move |v| if span > 0.0 { (v - lo) / span } else { 0.5 }
}

pub fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(RAMP_LOW[0], RAMP_HIGH[0]), mix(RAMP_LOW[1], RAMP_HIGH[1]), mix(RAMP_LOW[2], RAMP_HIGH[2]))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_svg(table: &EmbeddingTable, options: &PlotOptions) -> Result<String> {
    let dims = table.columns.len();
    if dims < 2 {
        return Err(Error::InvalidDimension(format!("a scatter plot needs 2 coordinate columns, found {dims}")));
    }
    let color = match options.color_column {
        Some(c) if c == 0 || c > dims => {
            return Err(Error::InvalidDimension(format!("color column {c} outside 1..{dims}")));
        }
        Some(c) => Some(c - 1),
        None => (dims >= 3).then_some(2),
    };
    if let Some(p) = table.points.iter().find(|p| p.coords.len() != dims) {
        return Err(Error::InvalidDimension(format!("point {:?} has {} coordinates, expected {dims}", p.label, p.coords.len())));
    }
    let pts = &table.points;
    let nx = normalize(pts.iter().map(|p| p.coords[0]));
    let ny = normalize(pts.iter().map(|p| p.coords[1]));
    let nc = color.map(|c| normalize(pts.iter().map(move |p| p.coords[c])));
    let max_weight = pts.iter().map(|p| p.weight).fold(0.0, f64::max);
    let inner = options.size - 2.0 * options.margin;

    // heavier points first so light ones stay visible on top
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| pts[b].weight.total_cmp(&pts[a].weight).then(a.cmp(&b)));

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
        s = options.size
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r##"<rect x="{m}" y="{m}" width="{w}" height="{w}" fill="none" stroke="#cccccc"/>"##,
        m = options.margin,
        w = inner
    );
    let color_name = color.map_or("none".to_string(), |c| table.columns[c].clone());
    let _ = writeln!(
        out,
        r#"<desc>x={} y={} color={} area∝weight</desc>"#,
        escape(&table.columns[0]),
        escape(&table.columns[1]),
        escape(&color_name)
    );
    for &i in &order {
        let p = &pts[i];
        let cx = options.margin + nx(p.coords[0]) * inner;
        let cy = options.margin + (1.0 - ny(p.coords[1])) * inner;
        let r = if max_weight > 0.0 { options.max_radius * (p.weight / max_weight).sqrt() } else { 0.0 };
        let fill = match (&nc, color) {
            (Some(f), Some(c)) => ramp(f(p.coords[c])),
            _ => ramp(0.5),
        };
        let _ = writeln!(
            out,
            r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{r:.3}" fill="{fill}" fill-opacity="0.8"><title>{} ({})</title></circle>"#,
            escape(&p.label),
            p.weight
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
