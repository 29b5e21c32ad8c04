//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes a group kind (`sn`, `c2k` or `cyclic`) and its size
//! parameter, and returns a JSON document. Failures come back as
//! `{"error": "..."}` so the page never has to catch exceptions.

use groupmds::chartheory::character_table_with_cap;
use groupmds::group::{class_count, enumerate_elements, GroupSpec};
use groupmds::mds::{classical_embedding, double_center, eigendecompose};
use groupmds::metric::{build_distance_matrix_with_cap, MetricSpec};
use groupmds::spectral::spectrum_via_characters;
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

/// Keeps exact spectra interactive in a browser tab.
pub const SPECTRUM_CLASS_LIMIT: u128 = 4096;
pub const TABLE_CLASS_LIMIT: usize = 64;
/// Dense eigensolves above this order take too long for a page.
pub const EMBED_ORDER_LIMIT: usize = 720;

type Outcome = Result<Value, String>;

fn group(kind: &str, size: u32) -> Result<GroupSpec, String> {
    let size = size as usize;
    match kind {
        "sn" => GroupSpec::symmetric(size),
        "c2k" => GroupSpec::elementary_abelian_2(size),
        "cyclic" => GroupSpec::cyclic(size),
        other => return Err(format!("unknown group kind {other:?}")),
    }
    .map_err(|e| e.to_string())
}

fn render(outcome: Outcome) -> String {
    outcome.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

pub fn spectrum_doc(kind: &str, size: u32) -> Outcome {
    let spec = group(kind, size)?;
    let classes = class_count(&spec);
    if classes > SPECTRUM_CLASS_LIMIT {
        return Err(format!("{spec} has {classes} classes; the demo stops at {SPECTRUM_CLASS_LIMIT}"));
    }
    let summary = spectrum_via_characters(&spec, &MetricSpec::natural_for(&spec)).map_err(|e| e.to_string())?;
    serde_json::from_str(&summary.to_json()).map_err(|e| e.to_string())
}

pub fn character_table_doc(kind: &str, size: u32) -> Outcome {
    let spec = group(kind, size)?;
    let table = character_table_with_cap(&spec, TABLE_CLASS_LIMIT).map_err(|e| e.to_string())?;
    let classes: Vec<Value> =
        table.classes.iter().map(|c| json!({ "label": c.label.to_string(), "size": c.size.to_string() })).collect();
    let rows: Vec<Value> = table
        .labels
        .iter()
        .zip(&table.entries)
        .map(|(label, row)| {
            json!({
                "irrep": label.to_string(),
                "values": row.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(json!({ "group": spec.to_string(), "classes": classes, "rows": rows }))
}

pub fn embedding_doc(kind: &str, size: u32, dims: u32) -> Outcome {
    let spec = group(kind, size)?;
    let metric = MetricSpec::natural_for(&spec);
    let distances = build_distance_matrix_with_cap(&spec, &metric, EMBED_ORDER_LIMIT).map_err(|e| e.to_string())?;
    let dec = eigendecompose(&double_center(&distances)).map_err(|e| e.to_string())?;
    let embedding = classical_embedding(&dec, dims.max(1) as usize).map_err(|e| e.to_string())?;
    let labels: Vec<String> = enumerate_elements(&spec).map_err(|e| e.to_string())?.iter().map(|g| g.to_string()).collect();
    let points: Vec<Vec<f64>> = (0..embedding.len())
        .map(|i| (0..embedding.dims()).map(|c| embedding.coordinates[(i, c)]).collect())
        .collect();
    Ok(json!({
        "group": spec.to_string(),
        "metric": metric.to_string(),
        "labels": labels,
        "eigenvalues": embedding.eigenvalues,
        "points": points,
    }))
}

/// MDS spectrum predicted from characters, grouped by eigenvalue.
#[wasm_bindgen]
pub fn spectrum(kind: &str, size: u32) -> String {
    render(spectrum_doc(kind, size))
}

/// Character table with exact entries as strings.
#[wasm_bindgen]
pub fn character_table(kind: &str, size: u32) -> String {
    render(character_table_doc(kind, size))
}

/// Classical MDS coordinates of every group element under the natural metric.
#[wasm_bindgen]
pub fn embedding(kind: &str, size: u32, dims: u32) -> String {
    render(embedding_doc(kind, size, dims))
}
