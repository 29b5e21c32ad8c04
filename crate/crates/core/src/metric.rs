//! Bi-invariant metrics on the supported groups and the distance matrices they generate.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{
    enumerate_elements_with_cap, fixed_points, inverse_unchecked, multiply_unchecked, random_element,
    GroupElement, GroupSpec, DEFAULT_ENUMERATION_CAP,
};

/// Groups up to this order are checked exhaustively; larger ones are sampled.
pub const EXHAUSTIVE_CHECK_ORDER: u128 = 120;

const SAMPLING_SEED: u64 = 0x5eed_0bad_cafe;

/// An integer-valued metric on a group.
pub trait GroupMetric {
    fn name(&self) -> String;

    fn distance(&self, spec: &GroupSpec, g: &GroupElement, h: &GroupElement) -> Result<u64>;

    fn distance_to_identity(&self, spec: &GroupSpec, g: &GroupElement) -> Result<u64> {
        self.distance(spec, g, &spec.identity())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricSpec {
    HammingPermutation,
    HammingBitvector,
    CircularArc,
}

impl MetricSpec {
    /// The shipped metric for a group kind.
    pub fn natural_for(spec: &GroupSpec) -> Self {
        match spec {
            GroupSpec::Symmetric { .. } => Self::HammingPermutation,
            GroupSpec::ElementaryAbelian2 { .. } => Self::HammingBitvector,
            GroupSpec::Cyclic { .. } => Self::CircularArc,
        }
    }

    pub fn compatible_with(&self, spec: &GroupSpec) -> bool {
        *self == Self::natural_for(spec)
    }

    fn require(&self, spec: &GroupSpec) -> Result<()> {
        if self.compatible_with(spec) {
            Ok(())
        } else {
            Err(Error::MetricMismatch { metric: self.to_string(), group: spec.to_string() })
        }
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::HammingPermutation => "hamming-permutation",
            Self::HammingBitvector => "hamming-bitvector",
            Self::CircularArc => "circular-arc",
        })
    }
}

impl GroupMetric for MetricSpec {
    fn name(&self) -> String {
        self.to_string()
    }

    fn distance(&self, spec: &GroupSpec, g: &GroupElement, h: &GroupElement) -> Result<u64> {
        self.require(spec)?;
        spec.check(g)?;
        spec.check(h)?;
        Ok(match (g, h) {
            (GroupElement::Permutation(a), GroupElement::Permutation(b)) => {
                a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
            }
            (GroupElement::Bits { mask: a, .. }, GroupElement::Bits { mask: b, .. }) => {
                (a ^ b).count_ones() as u64
            }
            (GroupElement::Residue(a), GroupElement::Residue(b)) => {
                let GroupSpec::Cyclic { n } = *spec else { unreachable!() };
                let diff = a.abs_diff(*b);
                diff.min(n as u64 - diff)
            }
            _ => unreachable!("checked above"),
        })
    }

    fn distance_to_identity(&self, spec: &GroupSpec, g: &GroupElement) -> Result<u64> {
        self.require(spec)?;
        spec.check(g)?;
        Ok(match g {
            GroupElement::Permutation(p) => (p.len() - fixed_points(p)) as u64,
            GroupElement::Bits { mask, .. } => mask.count_ones() as u64,
            GroupElement::Residue(r) => {
                let GroupSpec::Cyclic { n } = *spec else { unreachable!() };
                (*r).min(n as u64 - r)
            }
        })
    }
}

/// Exact integer distances, row-major, with one text label per point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    size: usize,
    entries: Vec<u64>,
    labels: Vec<String>,
}

impl DistanceMatrix {
    /// Builds a matrix from arbitrary integer distances, checking symmetry and the zero diagonal.
    pub fn from_entries(labels: Vec<String>, entries: Vec<u64>) -> Result<Self> {
        let size = labels.len();
        if entries.len() != size * size {
            return Err(Error::InvalidDimension(format!(
                "{} entries for {size} labels",
                entries.len()
            )));
        }
        let m = Self { size, entries, labels };
        for i in 0..size {
            if m.get(i, i) != 0 {
                return Err(Error::InvalidDimension(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                if m.get(i, j) != m.get(j, i) {
                    return Err(Error::NotSymmetric((m.get(i, j) as f64 - m.get(j, i) as f64).abs()));
                }
            }
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.size + j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn sum_of_squares(&self) -> u128 {
        self.entries.iter().map(|&d| (d as u128) * (d as u128)).sum()
    }

    /// First violated triangle inequality `(i, j, k)` with `d(i,k) > d(i,j) + d(j,k)`.
    /// Exhaustive up to [`EXHAUSTIVE_CHECK_ORDER`] points, otherwise `samples` random triples.
    pub fn triangle_violation(&self, samples: usize) -> Option<(usize, usize, usize)> {
        let n = self.size;
        let violates = |i: usize, j: usize, k: usize| self.get(i, k) > self.get(i, j) + self.get(j, k);
        if n as u128 <= EXHAUSTIVE_CHECK_ORDER {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        if violates(i, j, k) {
                            return Some((i, j, k));
                        }
                    }
                }
            }
            None
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(SAMPLING_SEED);
            (0..samples)
                .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)))
                .find(|&(i, j, k)| violates(i, j, k))
        }
    }

    /// Row-major CSV with a header row of point labels.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for i in 0..self.size {
            out.push_str(&self.labels[i]);
            for j in 0..self.size {
                out.push(',');
                out.push_str(&self.get(i, j).to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub fn build_distance_matrix(spec: &GroupSpec, metric: &dyn GroupMetric) -> Result<DistanceMatrix> {
    build_distance_matrix_with_cap(spec, metric, DEFAULT_ENUMERATION_CAP)
}

pub fn build_distance_matrix_with_cap(
    spec: &GroupSpec,
    metric: &dyn GroupMetric,
    cap: usize,
) -> Result<DistanceMatrix> {
    let elements = enumerate_elements_with_cap(spec, cap)?;
    let n = elements.len();
    let mut entries = vec![0u64; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = metric.distance(spec, &elements[i], &elements[j])?;
        }
    }
    Ok(DistanceMatrix { size: n, entries, labels: elements.iter().map(|g| g.to_string()).collect() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InvarianceMode {
    Left,
    Right,
    Bi,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub side: InvarianceMode,
    pub f: GroupElement,
    pub g: GroupElement,
    pub h: GroupElement,
    /// `d(g, h)`.
    pub original: u64,
    /// `d(fg, fh)` for the left side, `d(gf, hf)` for the right side.
    pub translated: u64,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (fg, fh) = match self.side {
            InvarianceMode::Right => ("gf", "hf"),
            _ => ("fg", "fh"),
        };
        write!(
            f,
            "f={}, g={}, h={}: d(g,h)={} but d({fg},{fh})={}",
            self.f, self.g, self.h, self.original, self.translated
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvarianceReport {
    pub passed: bool,
    pub exhaustive: bool,
    pub checks: usize,
    pub counterexample: Option<Counterexample>,
}

/// Tests left/right invariance of `metric` on `spec`.
///
/// Up to [`EXHAUSTIVE_CHECK_ORDER`] the test is exhaustive, using the
/// equivalence "left-invariant iff d(g,h) = d(e, g^-1 h) for all g, h" (and
/// the mirrored statement on the right), which is decided in O(|G|^2). Larger
/// groups are checked on `trials` random triples per side.
pub fn check_invariance(
    spec: &GroupSpec,
    metric: &dyn GroupMetric,
    mode: InvarianceMode,
    trials: usize,
) -> Result<InvarianceReport> {
    let sides: &[InvarianceMode] = match mode {
        InvarianceMode::Left => &[InvarianceMode::Left],
        InvarianceMode::Right => &[InvarianceMode::Right],
        InvarianceMode::Bi => &[InvarianceMode::Left, InvarianceMode::Right],
    };
    let translate = |side: InvarianceMode, f: &GroupElement, x: &GroupElement| match side {
        InvarianceMode::Right => multiply_unchecked(spec, x, f),
        _ => multiply_unchecked(spec, f, x),
    };
    let mut checks = 0;
    let test = |side, f: GroupElement, g: GroupElement, h: GroupElement| -> Result<Option<Counterexample>> {
        let original = metric.distance(spec, &g, &h)?;
        let translated = metric.distance(spec, &translate(side, &f, &g), &translate(side, &f, &h))?;
        Ok((original != translated).then_some(Counterexample { side, f, g, h, original, translated }))
    };

    let exhaustive = spec.order() <= EXHAUSTIVE_CHECK_ORDER;
    if exhaustive {
        let elements = enumerate_elements_with_cap(spec, EXHAUSTIVE_CHECK_ORDER as usize)?;
        for &side in sides {
            for g in &elements {
                for h in &elements {
                    checks += 1;
                    // f chosen to move g or h to the identity
                    let f = match side {
                        InvarianceMode::Right => inverse_unchecked(spec, h),
                        _ => inverse_unchecked(spec, g),
                    };
                    if let Some(c) = test(side, f, g.clone(), h.clone())? {
                        return Ok(InvarianceReport { passed: false, exhaustive, checks, counterexample: Some(c) });
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLING_SEED);
        for &side in sides {
            for _ in 0..trials {
                checks += 1;
                let f = random_element(spec, &mut rng);
                let g = random_element(spec, &mut rng);
                let h = random_element(spec, &mut rng);
                if let Some(c) = test(side, f, g, h)? {
                    return Ok(InvarianceReport { passed: false, exhaustive, checks, counterexample: Some(c) });
                }
            }
        }
    }
    Ok(InvarianceReport { passed: true, exhaustive, checks, counterexample: None })
}
