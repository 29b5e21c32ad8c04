//! Full-ranking datasets viewed as permutations.
//!
//! File format: the first line holds comma-separated item labels; each later
//! line lists 1-based item indices in rank order, optionally followed by
//! `;count`. Lines starting with `#` and blank lines are skipped.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{element_index, GroupElement, GroupSpec};
use crate::mds::{classical_embedding, double_center, eigendecompose, EmbeddingResult};
use crate::metric::{build_distance_matrix, MetricSpec};
use crate::spectral::standard_rep_coordinates;

/// Largest `n` for which the dense mode embeds all of `S_n`.
pub const DENSE_MAX_ITEMS: usize = 7;

/// Mallows dispersion of synthetic rankings; 0 concentrates on the mode, 1 is uniform.
pub const DISPERSION: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingRecord {
    /// Item indices (1-based) from first place to last.
    pub ranking: Vec<usize>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingDataset {
    pub items: Vec<String>,
    pub records: Vec<RankingRecord>,
}

impl RankingDataset {
    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn total_count(&self) -> u64 {
        self.records.iter().map(|r| r.count).sum()
    }

    /// Serializes back to the text format. Counts of 1 are left implicit.
    pub fn to_text(&self) -> String {
        let mut out = self.items.join(",");
        out.push('\n');
        for r in &self.records {
            let row: Vec<String> = r.ranking.iter().map(usize::to_string).collect();
            out.push_str(&row.join(","));
            if r.count != 1 {
                let _ = write!(out, ";{}", r.count);
            }
            out.push('\n');
        }
        out
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn parse_rankings(text: &str) -> Result<RankingDataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (header_line, header) = lines.next().ok_or_else(|| parse_error(1, "missing item header"))?;
    let items: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if items.iter().any(String::is_empty) {
        return Err(parse_error(header_line, "empty item label"));
    }
    let n = items.len();
    let mut records = Vec::new();
    for (line, row) in lines {
        let (body, count) = match row.split_once(';') {
            Some((body, count)) => {
                let count: u64 = count
                    .trim()
                    .parse()
                    .map_err(|_| parse_error(line, format!("bad count {:?}", count.trim())))?;
                if count == 0 {
                    return Err(parse_error(line, "count must be positive"));
                }
                (body, count)
            }
            None => (row, 1),
        };
        let ranking = body
            .split(',')
            .map(|f| f.trim().parse::<usize>().map_err(|_| parse_error(line, format!("bad item index {:?}", f.trim()))))
            .collect::<Result<Vec<usize>>>()?;
        if ranking.len() != n {
            return Err(parse_error(line, format!("expected {n} items, found {}", ranking.len())));
        }
        let mut seen = vec![false; n];
        for &i in &ranking {
            if i == 0 || i > n {
                return Err(parse_error(line, format!("item index {i} outside 1..{n}")));
            }
            if std::mem::replace(&mut seen[i - 1], true) {
                return Err(parse_error(line, format!("item {i} ranked twice")));
            }
        }
        records.push(RankingRecord { ranking, count });
    }
    Ok(RankingDataset { items, records })
}

/// The permutation taking the reference order to the ranking: `g(i)` is the
/// rank position of the item at position `i` of `reference`.
pub fn ranking_to_permutation(ranking: &[usize], reference: &[usize]) -> Result<GroupElement> {
    let n = ranking.len();
    if reference.len() != n {
        return Err(Error::InvalidElement(format!("ranking of {n} items against a reference of {}", reference.len())));
    }
    let mut position = vec![0usize; n];
    for (rank, &item) in ranking.iter().enumerate() {
        if item == 0 || item > n || position[item - 1] != 0 {
            return Err(Error::InvalidElement(format!("{ranking:?} is not a full ranking")));
        }
        position[item - 1] = rank + 1;
    }
    let image = reference
        .iter()
        .map(|&item| {
            if item == 0 || item > n {
                return Err(Error::InvalidElement(format!("reference item {item} outside 1..{n}")));
            }
            Ok(position[item - 1])
        })
        .collect::<Result<Vec<usize>>>()?;
    let g = GroupElement::Permutation(image);
    GroupSpec::Symmetric { n }.check(&g)?;
    Ok(g)
}

/// Inverse of [`ranking_to_permutation`] against the identity reference.
pub fn permutation_to_ranking(g: &GroupElement) -> Result<Vec<usize>> {
    let p = g.as_permutation().ok_or_else(|| Error::InvalidElement(format!("{g} is not a permutation")))?;
    let mut ranking = vec![0; p.len()];
    for (i, &rank) in p.iter().enumerate() {
        ranking[rank - 1] = i + 1;
    }
    Ok(ranking)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationSample {
    pub permutation: GroupElement,
    pub weight: u64,
}

/// Distinct permutations (identity reference) with summed counts, in lexicographic order.
pub fn aggregate(dataset: &RankingDataset) -> Result<Vec<PermutationSample>> {
    let reference: Vec<usize> = (1..=dataset.n_items()).collect();
    let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for r in &dataset.records {
        let g = ranking_to_permutation(&r.ranking, &reference)?;
        let GroupElement::Permutation(p) = g else { unreachable!() };
        *counts.entry(p).or_default() += r.count;
    }
    Ok(counts
        .into_iter()
        .map(|(p, weight)| PermutationSample { permutation: GroupElement::Permutation(p), weight })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedMode {
    /// Classical MDS of all of `S_n`, restricted to the observed rows.
    Dense,
    /// Principal axes of the observed points inside the standard-representation block.
    Standard,
}

impl std::str::FromStr for EmbedMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Self::Dense),
            "standard" => Ok(Self::Standard),
            _ => Err(Error::Mode(format!("unknown mode {s:?}"))),
        }
    }
}

fn check_samples(samples: &[PermutationSample], n: usize) -> Result<()> {
    let spec = GroupSpec::Symmetric { n };
    samples.iter().try_for_each(|s| spec.check(&s.permutation))
}

/// Embeds the distinct observed permutations. Weights do not enter the dense
/// mode; the standard mode uses them to pick its principal axes.
pub fn embed_dataset(samples: &[PermutationSample], n: usize, dims: usize, mode: EmbedMode) -> Result<EmbeddingResult> {
    if dims == 0 {
        return Err(Error::InvalidDimension("embedding dimension must be at least 1".into()));
    }
    check_samples(samples, n)?;
    match mode {
        EmbedMode::Dense => {
            if n > DENSE_MAX_ITEMS {
                return Err(Error::Mode(format!(
                    "dense mode enumerates all {n}! permutations and is limited to n <= {DENSE_MAX_ITEMS}; use the standard mode"
                )));
            }
            let spec = GroupSpec::symmetric(n)?;
            let dec = eigendecompose(&double_center(&build_distance_matrix(&spec, &MetricSpec::HammingPermutation)?))?;
            let full = classical_embedding(&dec, dims)?;
            let rows = samples.iter().map(|s| element_index(&spec, &s.permutation)).collect::<Result<Vec<usize>>>()?;
            Ok(full.select_rows(&rows))
        }
        EmbedMode::Standard => standard_embedding(samples, n, dims),
    }
}

/// Raw `n^2` standard-representation coordinates, one row per sample.
pub fn standard_coordinates(samples: &[PermutationSample], n: usize) -> Result<DMatrix<f64>> {
    check_samples(samples, n)?;
    let mut out = DMatrix::zeros(samples.len(), n * n);
    for (r, s) in samples.iter().enumerate() {
        for (c, v) in standard_rep_coordinates(&s.permutation, n)?.into_iter().enumerate() {
            out[(r, c)] = v;
        }
    }
    Ok(out)
}

fn standard_embedding(samples: &[PermutationSample], n: usize, dims: usize) -> Result<EmbeddingResult> {
    let raw = standard_coordinates(samples, n)?;
    let width = raw.ncols();
    let total: f64 = samples.iter().map(|s| s.weight as f64).sum();
    let mut mean = vec![0.0; width];
    if total > 0.0 {
        for (r, s) in samples.iter().enumerate() {
            for (c, m) in mean.iter_mut().enumerate() {
                *m += s.weight as f64 * raw[(r, c)];
            }
        }
        mean.iter_mut().for_each(|m| *m /= total);
    }
    let centered = DMatrix::from_fn(raw.nrows(), width, |r, c| raw[(r, c)] - mean[c]);
    let mut scatter = DMatrix::zeros(width, width);
    for (r, s) in samples.iter().enumerate() {
        let row = centered.row(r);
        scatter += row.transpose() * row * s.weight as f64;
    }
    let eig = SymmetricEigen::new(scatter);
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = scale * 1e-9;
    let available = order.iter().filter(|&&i| eig.eigenvalues[i] > threshold).count();
    // a one-point cloud still yields `dims` columns, all zero
    let used = if available == 0 { dims.min(width) } else { dims.min(available) };
    let mut coordinates = DMatrix::zeros(samples.len(), used);
    let mut eigenvalues = Vec::with_capacity(used);
    for (c, &i) in order.iter().take(used).enumerate() {
        let mut axis = eig.eigenvectors.column(i).into_owned();
        let pivot = axis.iter().copied().fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            axis.neg_mut();
        }
        let projected = &centered * axis;
        coordinates.set_column(c, &projected);
        eigenvalues.push(eig.eigenvalues[i].max(0.0));
    }
    Ok(EmbeddingResult { coordinates, eigenvalues, signature: (used, 0), truncated: used < dims })
}

/// Display label of a permutation as its ranking of item labels, e.g. `C>A>B`.
pub fn ranking_label(g: &GroupElement, items: &[String]) -> Result<String> {
    let ranking = permutation_to_ranking(g)?;
    Ok(ranking.iter().map(|&i| items.get(i - 1).map_or("?", String::as_str)).collect::<Vec<_>>().join(">"))
}

/// Synthetic full rankings from a mixture of three Mallows models (Kendall
/// distance, dispersion [`DISPERSION`]) around random modal rankings.
pub fn synthesize_rankings(n_items: usize, n_rows: usize, seed: u64) -> Result<RankingDataset> {
    if n_items < 2 {
        return Err(Error::InvalidDimension(format!("need at least 2 items, got {n_items}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<Vec<usize>> = (0..3)
        .map(|_| {
            let mut m: Vec<usize> = (1..=n_items).collect();
            m.shuffle(&mut rng);
            m
        })
        .collect();
    let mode_weights = [0.5, 0.3, 0.2];
    let mut records = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let u: f64 = rng.gen();
        let pick = if u < mode_weights[0] {
            0
        } else if u < mode_weights[0] + mode_weights[1] {
            1
        } else {
            2
        };
        let ranking = mallows_sample(&modes[pick], DISPERSION, &mut rng);
        records.push(RankingRecord { ranking, count: 1 });
    }
    let items = (0..n_items).map(item_name).collect();
    Ok(RankingDataset { items, records })
}

/// Repeated insertion: the `i`-th item of `mode` lands `j` slots above the
/// bottom of the current prefix with probability proportional to `phi^j`.
fn mallows_sample<R: Rng>(mode: &[usize], phi: f64, rng: &mut R) -> Vec<usize> {
    let mut ranking: Vec<usize> = Vec::with_capacity(mode.len());
    for (i, &item) in mode.iter().enumerate() {
        let weights: Vec<f64> = (0..=i).map(|j| phi.powi(j as i32)).collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.gen::<f64>() * total;
        let mut j = 0;
        while j < i && u >= weights[j] {
            u -= weights[j];
            j += 1;
        }
        ranking.insert(i - j, item);
    }
    ranking
}

/// `A`..`Z`, then `I27`, `I28`, ...
fn item_name(i: usize) -> String {
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("I{}", i + 1)
    }
}
