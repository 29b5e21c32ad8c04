//! MDS spectra of bi-invariant metrics, read off from characters.
//!
//! For a bi-invariant metric the uncentered kernel `m(g,h) = -d(g,h)^2 / 2` is
//! convolution with the class function `mu(g) = m(g, e)`. Writing
//! `mu = sum_i sigma_i chi_i`, each irreducible `i` spans an eigenspace of
//! dimension `d_i^2` with eigenvalue `|G| sigma_i / d_i`. Centering kills the
//! trivial character and leaves every other eigenspace alone.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chartheory::{
    character, class_sizes, decompose_class_function, dimension, irreducible_labels, ClassFunction,
    IrreducibleLabel,
};
use crate::cyclotomic::{Cyclotomic, Rational};
use crate::error::{Error, Result};
use crate::group::{
    class_count, class_index, conjugacy_classes, element_index, enumerate_elements_with_cap, factorial,
    inverse_unchecked, multiply_unchecked, partitions_of, random_element, GroupElement, GroupSpec,
    Partition, DEFAULT_ENUMERATION_CAP,
};
use crate::mds::{cluster_eigenvalues, double_center, eigendecompose, MdsKernel, CLUSTER_TOLERANCE_REL};
use crate::metric::{
    build_distance_matrix_with_cap, check_invariance, Counterexample, GroupMetric, InvarianceMode,
};

/// Random conjugates checked per class when building `mu`.
pub const CONJUGATE_SPOT_CHECKS: usize = 25;

/// Random triples per side for invariance checks above the exhaustive threshold.
pub const INVARIANCE_TRIALS: usize = 1000;

/// Largest number of conjugacy classes [`mu_from_metric`] will tabulate.
pub const SPECTRUM_CLASS_CAP: usize = 1 << 20;

/// Closed-form `C_2^k` tables list the zero-eigenvalue labels explicitly only up to this rank.
pub const MAX_LISTED_ZERO_RANK: usize = 16;

/// `mu(g) = -d(g, e)^2 / 2` as an exact class function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuFunction {
    pub function: ClassFunction,
    pub metric: String,
}

pub fn mu_from_metric(spec: &GroupSpec, metric: &dyn GroupMetric) -> Result<MuFunction> {
    let count = class_count(spec);
    if count > SPECTRUM_CLASS_CAP as u128 {
        return Err(Error::TooLarge { order: count, cap: SPECTRUM_CLASS_CAP });
    }
    let report = check_invariance(spec, metric, InvarianceMode::Bi, INVARIANCE_TRIALS)?;
    if let Some(c) = report.counterexample {
        return Err(Error::NotBiInvariant(Box::new(c)));
    }
    let classes = conjugacy_classes(spec)?;
    let e = spec.identity();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d75);
    let mut values = Vec::with_capacity(classes.len());
    for class in &classes {
        let g = &class.representative;
        let d = metric.distance(spec, g, &e)?;
        // conjugation is the identity map in the abelian groups
        if !spec.is_abelian() {
            for _ in 0..CONJUGATE_SPOT_CHECKS {
                let h = random_element(spec, &mut rng);
                let conj = multiply_unchecked(spec, &multiply_unchecked(spec, &h, g), &inverse_unchecked(spec, &h));
                if metric.distance(spec, &conj, &e)? != d {
                    return Err(Error::NotBiInvariant(Box::new(conjugation_witness(spec, metric, &h, g)?)));
                }
            }
        }
        let sq = (d as i128) * (d as i128);
        values.push(Cyclotomic::from_rational(Rational::new(-sq, 2)));
    }
    Ok(MuFunction { function: ClassFunction::new(*spec, values)?, metric: metric.name() })
}

/// Turns `d(h g h^-1, e) != d(g, e)` into a left or right invariance failure.
fn conjugation_witness(
    spec: &GroupSpec,
    metric: &dyn GroupMetric,
    h: &GroupElement,
    g: &GroupElement,
) -> Result<Counterexample> {
    let e = spec.identity();
    let hg = multiply_unchecked(spec, h, g);
    let original = metric.distance(spec, g, &e)?;
    let left = metric.distance(spec, &hg, h)?;
    if left != original {
        return Ok(Counterexample {
            side: InvarianceMode::Left,
            f: h.clone(),
            g: g.clone(),
            h: e,
            original,
            translated: left,
        });
    }
    // d(hg, h) == d(g, e), so the right translation by h^-1 of (hg, h) breaks
    let h_inv = inverse_unchecked(spec, h);
    let translated = metric.distance(spec, &multiply_unchecked(spec, &hg, &h_inv), &e)?;
    Ok(Counterexample { side: InvarianceMode::Right, f: h_inv, g: hg, h: h.clone(), original: left, translated })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumEntry {
    pub eigenvalue: Cyclotomic,
    pub multiplicity: u128,
    pub labels: Vec<IrreducibleLabel>,
    pub sign: Sign,
}

/// The eigenvalue the trivial character would carry before centering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrivialComponent {
    pub label: IrreducibleLabel,
    pub uncentered_eigenvalue: Cyclotomic,
}

/// Predicted spectrum of the centered MDS kernel. The trivial character is
/// reported separately; the zero entry, when present, comes last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralSummary {
    pub group: GroupSpec,
    pub metric: String,
    pub entries: Vec<SpectrumEntry>,
    pub trivial: TrivialComponent,
}

#[derive(Serialize)]
struct EntryJson {
    eigenvalue: String,
    approx: f64,
    multiplicity: u128,
    labels: Vec<String>,
    sign: Sign,
}

#[derive(Serialize)]
struct SummaryJson {
    group: GroupSpec,
    order: u128,
    metric: String,
    entries: Vec<EntryJson>,
    trivial_discarded: bool,
    trivial_uncentered_eigenvalue: String,
}

impl SpectralSummary {
    pub fn order(&self) -> u128 {
        self.group.order()
    }

    pub fn nonzero(&self) -> impl Iterator<Item = &SpectrumEntry> {
        self.entries.iter().filter(|e| e.sign != Sign::Zero)
    }

    pub fn zero_multiplicity(&self) -> u128 {
        self.entries.iter().filter(|e| e.sign == Sign::Zero).map(|e| e.multiplicity).sum()
    }

    pub fn rank(&self) -> u128 {
        self.nonzero().map(|e| e.multiplicity).sum()
    }

    /// `(p, q)`: total multiplicity of positive and negative eigenvalues.
    pub fn signature(&self) -> (u128, u128) {
        let sum = |s| self.entries.iter().filter(|e| e.sign == s).map(|e| e.multiplicity).sum();
        (sum(Sign::Positive), sum(Sign::Negative))
    }

    /// `sum_i lambda_i * mult_i`, the trace of the centered kernel.
    pub fn trace(&self) -> Cyclotomic {
        let mut acc = Cyclotomic::zero();
        for e in self.nonzero() {
            acc += &e.eigenvalue.scale(Rational::from_integer(e.multiplicity as i128));
        }
        acc.simplified()
    }

    pub fn entry_for(&self, label: &IrreducibleLabel) -> Option<&SpectrumEntry> {
        self.entries.iter().find(|e| e.labels.contains(label))
    }

    /// The full eigenvalue multiset of the centered kernel (trivial direction as 0), descending.
    pub fn predicted_eigenvalues(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.order() as usize);
        for e in &self.entries {
            let v = if e.sign == Sign::Zero { 0.0 } else { e.eigenvalue.to_f64() };
            out.extend(std::iter::repeat_n(v, e.multiplicity as usize));
        }
        out.push(0.0);
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }

    pub fn to_json(&self) -> String {
        let doc = SummaryJson {
            group: self.group,
            order: self.order(),
            metric: self.metric.clone(),
            entries: self
                .entries
                .iter()
                .map(|e| EntryJson {
                    eigenvalue: e.eigenvalue.to_exact_string(),
                    approx: e.eigenvalue.to_f64(),
                    multiplicity: e.multiplicity,
                    labels: e.labels.iter().map(|l| l.to_string()).collect(),
                    sign: e.sign,
                })
                .collect(),
            trivial_discarded: true,
            trivial_uncentered_eigenvalue: self.trivial.uncentered_eigenvalue.to_exact_string(),
        };
        serde_json::to_string_pretty(&doc).expect("summary serializes")
    }
}

fn sign_of(v: &Cyclotomic) -> Sign {
    if v.is_zero() {
        Sign::Zero
    } else if v.to_f64() > 0.0 {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

fn sort_descending(entries: &mut Vec<SpectrumEntry>) {
    let mut keyed: Vec<(f64, SpectrumEntry)> = entries.drain(..).map(|e| (e.eigenvalue.to_f64(), e)).collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0));
    entries.extend(keyed.into_iter().map(|(_, e)| e));
}

/// Merges per-label eigenvalues into summary entries: equal exact values share
/// an entry, nonzero entries sorted descending, the zero entry last.
fn assemble(
    group: GroupSpec,
    metric: String,
    per_label: Vec<(IrreducibleLabel, Cyclotomic, u128)>,
    trivial: TrivialComponent,
) -> SpectralSummary {
    let mut entries: Vec<SpectrumEntry> = Vec::new();
    let mut zero = SpectrumEntry {
        eigenvalue: Cyclotomic::zero(),
        multiplicity: 0,
        labels: Vec::new(),
        sign: Sign::Zero,
    };
    // equal values share a canonical form once lifted to a common order
    let common = per_label.iter().fold(1usize, |acc, (_, l, _)| acc.lcm(&l.order()));
    // keyed on reduced (numerator, denominator) pairs; hashing `Ratio` itself is slow
    let mut index: HashMap<Vec<(i128, i128)>, usize> = HashMap::new();
    for (label, lambda, dim) in per_label {
        let mult = dim * dim;
        let canonical = lambda.lift(common).canonical();
        if canonical.iter().all(Zero::is_zero) {
            zero.multiplicity += mult;
            zero.labels.push(label);
            continue;
        }
        let key: Vec<(i128, i128)> = canonical.iter().map(|c| (*c.numer(), *c.denom())).collect();
        match index.get(&key) {
            Some(&i) => {
                entries[i].multiplicity += mult;
                entries[i].labels.push(label);
            }
            None => {
                index.insert(key, entries.len());
                entries.push(SpectrumEntry { sign: sign_of(&lambda), eigenvalue: lambda, multiplicity: mult, labels: vec![label] });
            }
        }
    }
    sort_descending(&mut entries);
    if zero.multiplicity > 0 {
        entries.push(zero);
    }
    SpectralSummary { group, metric, entries, trivial }
}

/// Exact spectrum from `sigma_i = <mu, chi_i>` and `lambda_i = |G| sigma_i / d_i`.
pub fn spectrum_via_characters(spec: &GroupSpec, metric: &dyn GroupMetric) -> Result<SpectralSummary> {
    let mu = mu_from_metric(spec, metric)?;
    spectrum_from_mu(&mu)
}

pub fn spectrum_from_mu(mu: &MuFunction) -> Result<SpectralSummary> {
    let group = *mu.function.group();
    let order = group.order() as i128;
    let decomposition = decompose_class_function(&mu.function)?;
    let mut trivial = None;
    let mut per_label = Vec::new();
    for (label, sigma) in decomposition.coefficients {
        let d = dimension(&group, &label)?;
        let lambda = sigma.scale(Rational::new(order, d as i128)).simplified();
        if label.is_trivial() {
            trivial = Some(TrivialComponent { label, uncentered_eigenvalue: lambda });
        } else {
            per_label.push((label, lambda, d));
        }
    }
    let trivial = trivial.expect("every group has a trivial character");
    Ok(assemble(group, mu.metric.clone(), per_label, trivial))
}

fn binomial2(k: u128) -> u128 {
    k * k.saturating_sub(1) / 2
}

/// Hamming distance on `C_2^k` without enumerating the group:
/// `2^(k-2) k` on the `k` singletons, `-2^(k-2)` on the `C(k,2)` pairs, zero elsewhere.
pub fn closed_form_c2k(k: usize) -> Result<SpectralSummary> {
    let group = GroupSpec::elementary_abelian_2(k)?;
    let kk = k as i128;
    let quarter_order = Rational::new(1i128 << k, 4);
    let singles: Vec<IrreducibleLabel> =
        (0..k).map(|b| IrreducibleLabel::Subset { k, mask: 1 << b }).collect();
    let mut pairs = Vec::new();
    for hi in 1..k {
        for lo in 0..hi {
            pairs.push(IrreducibleLabel::Subset { k, mask: (1 << hi) | (1 << lo) });
        }
    }
    pairs.sort();
    let mut entries = vec![SpectrumEntry {
        eigenvalue: Cyclotomic::from_rational(quarter_order * kk),
        multiplicity: k as u128,
        labels: singles,
        sign: Sign::Positive,
    }];
    if k >= 2 {
        entries.push(SpectrumEntry {
            eigenvalue: Cyclotomic::from_rational(-quarter_order),
            multiplicity: binomial2(k as u128),
            labels: pairs,
            sign: Sign::Negative,
        });
    }
    let zero_mult = group.order() - 1 - k as u128 - binomial2(k as u128);
    if zero_mult > 0 {
        let labels = if k <= MAX_LISTED_ZERO_RANK {
            irreducible_labels(&group)
                .into_iter()
                .filter(|l| matches!(l, IrreducibleLabel::Subset { mask, .. } if mask.count_ones() >= 3))
                .collect()
        } else {
            Vec::new()
        };
        entries.push(SpectrumEntry { eigenvalue: Cyclotomic::zero(), multiplicity: zero_mult, labels, sign: Sign::Zero });
    }
    // sigma_trivial = -(k^2 + k) / 8
    let trivial = TrivialComponent {
        label: IrreducibleLabel::trivial(&group),
        uncentered_eigenvalue: Cyclotomic::from_rational(Rational::new(-(kk * kk + kk) * (1i128 << k), 8)),
    };
    Ok(SpectralSummary { group, metric: "hamming-bitvector".into(), entries, trivial })
}

/// Hamming distance on `S_n`, `n >= 4`: three nonzero eigenspaces, on the
/// standard representation `[n-1,1]` and on `[n-2,1,1]` and `[n-2,2]`.
pub fn closed_form_sn(n: usize) -> Result<SpectralSummary> {
    if n < 4 {
        return Err(Error::UnsupportedClosedForm(format!(
            "the S_n table needs n >= 4 (got {n}); use spectrum_via_characters"
        )));
    }
    let group = GroupSpec::symmetric(n)?;
    let fact = factorial(n) as i128;
    let ni = n as i128;
    let label = |parts: Vec<usize>| IrreducibleLabel::Partition(Partition::new(parts).expect("valid shape"));
    let standard = label(vec![n - 1, 1]);
    let hook = label(vec![n - 2, 1, 1]);
    let two_row = label(vec![n - 2, 2]);
    let dims = [(ni - 1), (ni - 1) * (ni - 2) / 2, ni * (ni - 3) / 2];
    let lambdas = [
        Rational::new((2 * ni - 3) * fact, 2 * ni - 2),
        Rational::new(-fact, (ni - 1) * (ni - 2)),
        Rational::new(-fact, ni * (ni - 3)),
    ];
    let mut entries: Vec<SpectrumEntry> = [standard.clone(), hook.clone(), two_row.clone()]
        .into_iter()
        .zip(lambdas)
        .zip(dims)
        .map(|((l, lambda), d)| SpectrumEntry {
            sign: if lambda > Rational::zero() { Sign::Positive } else { Sign::Negative },
            eigenvalue: Cyclotomic::from_rational(lambda),
            multiplicity: (d * d) as u128,
            labels: vec![l],
        })
        .collect();
    sort_descending(&mut entries);
    let nonzero: u128 = entries.iter().map(|e| e.multiplicity).sum();
    let zero_labels: Vec<IrreducibleLabel> = partitions_of(n)
        .into_iter()
        .map(IrreducibleLabel::Partition)
        .filter(|l| !l.is_trivial() && *l != standard && *l != hook && *l != two_row)
        .collect();
    let zero_mult = factorial(n) - 1 - nonzero;
    if zero_mult > 0 {
        entries.push(SpectrumEntry { eigenvalue: Cyclotomic::zero(), multiplicity: zero_mult, labels: zero_labels, sign: Sign::Zero });
    }
    // sigma_trivial = -((n-1)^2 + 1) / 2
    let trivial = TrivialComponent {
        label: IrreducibleLabel::trivial(&group),
        uncentered_eigenvalue: Cyclotomic::from_rational(Rational::new(-((ni - 1) * (ni - 1) + 1) * fact, 2)),
    };
    Ok(SpectralSummary { group, metric: "hamming-permutation".into(), entries, trivial })
}

/// Uncentered kernel with entry `(h, g) = mu(h g^-1)` in enumeration order.
pub fn convolution_matrix(spec: &GroupSpec, mu: &MuFunction) -> Result<MdsKernel> {
    convolution_matrix_with_cap(spec, mu, DEFAULT_ENUMERATION_CAP)
}

pub fn convolution_matrix_with_cap(spec: &GroupSpec, mu: &MuFunction, cap: usize) -> Result<MdsKernel> {
    if mu.function.group() != spec {
        return Err(Error::GroupMismatch);
    }
    let elements = enumerate_elements_with_cap(spec, cap)?;
    let inverses: Vec<GroupElement> = elements.iter().map(|g| inverse_unchecked(spec, g)).collect();
    let values: Vec<f64> = mu.function.values().iter().map(Cyclotomic::to_f64).collect();
    let n = elements.len();
    let mut m = DMatrix::zeros(n, n);
    for (r, h) in elements.iter().enumerate() {
        for (c, g_inv) in inverses.iter().enumerate() {
            m[(r, c)] = values[class_index(spec, &multiply_unchecked(spec, h, g_inv))?];
        }
    }
    MdsKernel::new(m, false)
}

/// Orthogonal projector of `L^2(G)` onto the isotypic component of one irreducible,
/// `P = (d/|G|) sum_g conj(chi(g)) L_g`, so `P[h][x] = (d/|G|) conj(chi(h x^-1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotypicProjector {
    pub label: IrreducibleLabel,
    pub real: DMatrix<f64>,
    /// Present only for characters that are not real-valued.
    pub imag: Option<DMatrix<f64>>,
    pub rank: u128,
}

impl IsotypicProjector {
    pub fn trace(&self) -> f64 {
        self.real.trace()
    }

    /// `max |P^2 - P|`.
    pub fn idempotence_error(&self) -> f64 {
        let (re, im) = self.product(self);
        let mut err = (re - &self.real).amax();
        if let (Some(im), Some(own)) = (im, &self.imag) {
            err = err.max((im - own).amax());
        }
        err
    }

    /// `max |P - P^H|`.
    pub fn hermitian_error(&self) -> f64 {
        let mut err = (&self.real - self.real.transpose()).amax();
        if let Some(im) = &self.imag {
            err = err.max((im + im.transpose()).amax());
        }
        err
    }

    /// `max |P Q|` entrywise.
    pub fn product_max(&self, other: &Self) -> f64 {
        let (re, im) = self.product(other);
        im.map_or(re.amax(), |im| re.amax().max(im.amax()))
    }

    fn product(&self, other: &Self) -> (DMatrix<f64>, Option<DMatrix<f64>>) {
        let mut re = &self.real * &other.real;
        let mut im = None;
        match (&self.imag, &other.imag) {
            (Some(a), Some(b)) => {
                re -= a * b;
                im = Some(&self.real * b + a * &other.real);
            }
            (Some(a), None) => im = Some(a * &other.real),
            (None, Some(b)) => im = Some(&self.real * b),
            (None, None) => {}
        }
        (re, im)
    }

    /// `max |P M - lambda P|` for a real kernel `M`.
    pub fn eigen_residual(&self, kernel: &DMatrix<f64>, lambda: f64) -> f64 {
        let mut err = (&self.real * kernel - &self.real * lambda).amax();
        if let Some(im) = &self.imag {
            err = err.max((im * kernel - im * lambda).amax());
        }
        err
    }
}

pub fn isotypic_projector(spec: &GroupSpec, label: &IrreducibleLabel) -> Result<IsotypicProjector> {
    isotypic_projector_with_cap(spec, label, DEFAULT_ENUMERATION_CAP)
}

pub fn isotypic_projector_with_cap(
    spec: &GroupSpec,
    label: &IrreducibleLabel,
    cap: usize,
) -> Result<IsotypicProjector> {
    let classes = quotient_class_table(spec, cap)?;
    projector_from_table(spec, label, &classes)
}

/// One projector per irreducible, in [`irreducible_labels`] order.
pub fn isotypic_projectors(spec: &GroupSpec, cap: usize) -> Result<Vec<IsotypicProjector>> {
    let classes = quotient_class_table(spec, cap)?;
    irreducible_labels(spec).iter().map(|l| projector_from_table(spec, l, &classes)).collect()
}

/// `n x n` table of class indices of `h x^-1`, row-major.
fn quotient_class_table(spec: &GroupSpec, cap: usize) -> Result<DMatrix<usize>> {
    let elements = enumerate_elements_with_cap(spec, cap)?;
    let inverses: Vec<GroupElement> = elements.iter().map(|g| inverse_unchecked(spec, g)).collect();
    let n = elements.len();
    let mut table = DMatrix::zeros(n, n);
    for (r, h) in elements.iter().enumerate() {
        for (c, x_inv) in inverses.iter().enumerate() {
            table[(r, c)] = class_index(spec, &multiply_unchecked(spec, h, x_inv))?;
        }
    }
    Ok(table)
}

fn projector_from_table(spec: &GroupSpec, label: &IrreducibleLabel, classes: &DMatrix<usize>) -> Result<IsotypicProjector> {
    let d = dimension(spec, label)?;
    let chi: Vec<Complex64> = character(spec, label)?.values().iter().map(Cyclotomic::to_complex).collect();
    let real_valued = chi.iter().all(|c| c.im.abs() < 1e-15);
    let n = classes.nrows();
    let scale = d as f64 / n as f64;
    let real = classes.map(|i| chi[i].re * scale);
    // conj(chi) flips the imaginary part
    let imag = (!real_valued).then(|| classes.map(|i| -chi[i].im * scale));
    Ok(IsotypicProjector { label: label.clone(), real, imag, rank: d * d })
}

/// Coordinates of a permutation in the standard-representation block, `n^2` entries
/// indexed `i * n + j`: `sqrt((2n-3)/2) * ([g(j) = i] - 1/n)`.
///
/// Squared distances between these vectors are `(2n - 3) d_H(g, h)`, the
/// positive-block squared distances of the full Hamming MDS embedding of `S_n`.
pub fn standard_rep_coordinates(g: &GroupElement, n: usize) -> Result<Vec<f64>> {
    if n < 4 {
        return Err(Error::InvalidDimension(format!("standard coordinates need n >= 4, got {n}")));
    }
    GroupSpec::Symmetric { n }.check(g)?;
    let p = g.as_permutation().expect("checked");
    let scale = ((2 * n - 3) as f64 / 2.0).sqrt();
    let mut out = vec![-scale / n as f64; n * n];
    for (j, &image) in p.iter().enumerate() {
        out[(image - 1) * n + j] += scale;
    }
    Ok(out)
}

/// Comparison of a predicted spectrum with the dense eigensolver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub max_abs_deviation: f64,
    /// `max_abs_deviation / max|lambda|`.
    pub max_rel_deviation: f64,
    /// Clustered oracle eigenvalues have the predicted values and multiplicities.
    pub multiplicities_match: bool,
    pub oracle_clusters: Vec<(f64, usize)>,
}

impl OracleComparison {
    pub fn passed(&self, rel_tol: f64) -> bool {
        self.multiplicities_match && self.max_rel_deviation < rel_tol
    }
}

pub fn compare_with_eigenvalues(summary: &SpectralSummary, oracle: &[f64]) -> OracleComparison {
    let predicted = summary.predicted_eigenvalues();
    let mut observed = oracle.to_vec();
    observed.sort_by(|a, b| b.total_cmp(a));
    let scale = observed.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let max_abs = if predicted.len() == observed.len() {
        predicted.iter().zip(&observed).fold(0.0f64, |m, (p, o)| m.max((p - o).abs()))
    } else {
        f64::INFINITY
    };
    let oracle_clusters = cluster_eigenvalues(&observed, CLUSTER_TOLERANCE_REL);
    let predicted_clusters = cluster_eigenvalues(&predicted, CLUSTER_TOLERANCE_REL);
    let multiplicities_match = oracle_clusters.len() == predicted_clusters.len()
        && oracle_clusters
            .iter()
            .zip(&predicted_clusters)
            .all(|(o, p)| o.1 == p.1 && (o.0 - p.0).abs() <= CLUSTER_TOLERANCE_REL * scale);
    OracleComparison { max_abs_deviation: max_abs, max_rel_deviation: max_abs / scale, multiplicities_match, oracle_clusters }
}

/// Builds the dense kernel of `(spec, metric)` and compares its spectrum with `summary`.
pub fn compare_with_dense(
    spec: &GroupSpec,
    metric: &dyn GroupMetric,
    summary: &SpectralSummary,
    cap: usize,
) -> Result<OracleComparison> {
    let d = build_distance_matrix_with_cap(spec, metric, cap)?;
    let dec = eigendecompose(&double_center(&d))?;
    Ok(compare_with_eigenvalues(summary, &dec.eigenvalues))
}

/// `(1 / (2|G|)) sum_{g,h} d(g,h)^2`, using only left-invariance to sum over one row.
pub fn trace_from_distances(spec: &GroupSpec, metric: &dyn GroupMetric, cap: usize) -> Result<Rational> {
    let elements = enumerate_elements_with_cap(spec, cap)?;
    let e = spec.identity();
    let mut row_sum = 0i128;
    for g in &elements {
        let d = metric.distance(spec, g, &e)? as i128;
        row_sum += d * d;
    }
    Ok(Rational::new(row_sum, 2))
}

/// Squared-distance sum weighted by class sizes, from `mu` alone.
pub fn mu_total(mu: &MuFunction) -> Rational {
    let sizes = class_sizes(mu.function.group());
    mu.function
        .values()
        .iter()
        .zip(sizes)
        .map(|(v, s)| v.to_rational().expect("mu is rational") * Rational::from_integer(s as i128))
        .fold(Rational::zero(), |a, b| a + b)
}

/// Index of `g` in the dense enumeration, for callers mapping elements onto kernel rows.
pub fn row_of(spec: &GroupSpec, g: &GroupElement) -> Result<usize> {
    element_index(spec, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::enumerate_elements;
    use crate::metric::{build_distance_matrix, MetricSpec};

    fn rat(n: i128, d: i128) -> Cyclotomic {
        Cyclotomic::from_rational(Rational::new(n, d))
    }

    fn table(summary: &SpectralSummary) -> Vec<(Cyclotomic, u128)> {
        summary.nonzero().map(|e| (e.eigenvalue.clone(), e.multiplicity)).collect()
    }

    /// Word metric on S_3 for generators {(1 2), (1 2 3), (1 3 2)}: left-invariant only.
    struct WordMetric;

    impl GroupMetric for WordMetric {
        fn name(&self) -> String {
            "word".into()
        }
        fn distance(&self, spec: &GroupSpec, g: &GroupElement, h: &GroupElement) -> Result<u64> {
            let x = multiply_unchecked(spec, &inverse_unchecked(spec, g), h);
            let p = x.as_permutation().unwrap();
            Ok(match p {
                [1, 2, 3] => 0,
                [2, 1, 3] | [2, 3, 1] | [3, 1, 2] => 1,
                _ => 2,
            })
        }
    }

    #[test]
    fn mu_examples() {
        let s4 = GroupSpec::symmetric(4).unwrap();
        let mu = mu_from_metric(&s4, &MetricSpec::HammingPermutation).unwrap();
        let t = GroupElement::Permutation(vec![2, 1, 3, 4]);
        assert_eq!(*mu.function.value_at(&t).unwrap(), rat(-2, 1));
        assert_eq!(*mu.function.value_at(&s4.identity()).unwrap(), rat(0, 1));
        let c23 = GroupSpec::elementary_abelian_2(3).unwrap();
        let mu = mu_from_metric(&c23, &MetricSpec::HammingBitvector).unwrap();
        assert_eq!(*mu.function.value_at(&c23.parse_element("111").unwrap()).unwrap(), rat(-9, 2));
    }

    #[test]
    fn left_invariant_word_metric_is_rejected() {
        let s3 = GroupSpec::symmetric(3).unwrap();
        let left = check_invariance(&s3, &WordMetric, InvarianceMode::Left, 0).unwrap();
        assert!(left.passed);
        let err = mu_from_metric(&s3, &WordMetric).unwrap_err();
        let Error::NotBiInvariant(c) = err else { panic!("wrong error {err:?}") };
        assert_eq!(c.side, InvarianceMode::Right);
        let gf = multiply_unchecked(&s3, &c.g, &c.f);
        let hf = multiply_unchecked(&s3, &c.h, &c.f);
        assert_ne!(WordMetric.distance(&s3, &c.g, &c.h).unwrap(), WordMetric.distance(&s3, &gf, &hf).unwrap());
    }

    #[test]
    fn c2k_spectrum_matches_table() {
        let c23 = GroupSpec::elementary_abelian_2(3).unwrap();
        let s = spectrum_via_characters(&c23, &MetricSpec::HammingBitvector).unwrap();
        assert_eq!(table(&s), vec![(rat(6, 1), 3), (rat(-2, 1), 3)]);
        assert_eq!(s.zero_multiplicity(), 1);
        assert_eq!(s.entries[0].labels.len(), 3);
        assert!(s.entries[1].labels.iter().all(|l| matches!(l, IrreducibleLabel::Subset { mask, .. } if mask.count_ones() == 2)));
    }

    #[test]
    fn s4_spectrum_matches_table() {
        let s4 = GroupSpec::symmetric(4).unwrap();
        let s = spectrum_via_characters(&s4, &MetricSpec::HammingPermutation).unwrap();
        assert_eq!(table(&s), vec![(rat(20, 1), 9), (rat(-4, 1), 9), (rat(-6, 1), 4)]);
        assert_eq!(s.entries[0].labels, vec![IrreducibleLabel::partition(&[3, 1]).unwrap()]);
        assert_eq!(s.entries[1].labels, vec![IrreducibleLabel::partition(&[2, 1, 1]).unwrap()]);
        assert_eq!(s.entries[2].labels, vec![IrreducibleLabel::partition(&[2, 2]).unwrap()]);
        assert_eq!(s.trace(), rat(120, 1));
        assert_eq!(s.signature(), (9, 13));
    }

    #[test]
    fn c4_arc_spectrum() {
        let c4 = GroupSpec::cyclic(4).unwrap();
        let s = spectrum_via_characters(&c4, &MetricSpec::CircularArc).unwrap();
        assert_eq!(table(&s), vec![(rat(2, 1), 2), (rat(-1, 1), 1)]);
        let f = |j| IrreducibleLabel::Frequency { n: 4, j };
        assert_eq!(s.entries[0].labels, vec![f(1), f(3)]);
        assert_eq!(s.entries[1].labels, vec![f(2)]);
    }

    #[test]
    fn c12_arc_has_irrational_eigenvalues_that_merge_in_pairs() {
        let c12 = GroupSpec::cyclic(12).unwrap();
        let s = spectrum_via_characters(&c12, &MetricSpec::CircularArc).unwrap();
        assert!(s.entries.iter().any(|e| e.eigenvalue.to_rational().is_none()));
        for e in s.nonzero() {
            if e.labels.len() == 2 {
                let (IrreducibleLabel::Frequency { j: a, .. }, IrreducibleLabel::Frequency { j: b, .. }) =
                    (&e.labels[0], &e.labels[1])
                else {
                    panic!()
                };
                assert_eq!(a + b, 12);
            }
        }
        let cmp = compare_with_dense(&c12, &MetricSpec::CircularArc, &s, 1000).unwrap();
        assert!(cmp.passed(1e-8), "{cmp:?}");
    }

    #[test]
    fn closed_form_examples() {
        let k2 = closed_form_c2k(2).unwrap();
        assert_eq!(table(&k2), vec![(rat(2, 1), 2), (rat(-1, 1), 1)]);
        assert_eq!(k2.zero_multiplicity(), 0);
        let k10 = closed_form_c2k(10).unwrap();
        assert_eq!(table(&k10), vec![(rat(2560, 1), 10), (rat(-256, 1), 45)]);
        assert_eq!(k10.zero_multiplicity(), 1024 - 56);
        let k1 = closed_form_c2k(1).unwrap();
        assert_eq!(table(&k1), vec![(rat(1, 2), 1)]);
        assert_eq!(k1, spectrum_via_characters(&GroupSpec::elementary_abelian_2(1).unwrap(), &MetricSpec::HammingBitvector).unwrap());
        assert!(closed_form_c2k(0).is_err());
        let big = closed_form_c2k(40).unwrap();
        assert!(big.entries.last().unwrap().labels.is_empty());

        let n4 = closed_form_sn(4).unwrap();
        assert_eq!(table(&n4), vec![(rat(20, 1), 9), (rat(-4, 1), 9), (rat(-6, 1), 4)]);
        let n5 = closed_form_sn(5).unwrap();
        assert_eq!(table(&n5), vec![(rat(105, 1), 16), (rat(-10, 1), 36), (rat(-12, 1), 25)]);
        assert!(matches!(closed_form_sn(3), Err(Error::UnsupportedClosedForm(_))));
    }

    #[test]
    fn c2_oracle_agrees_with_half() {
        let c2 = GroupSpec::elementary_abelian_2(1).unwrap();
        let d = build_distance_matrix(&c2, &MetricSpec::HammingBitvector).unwrap();
        let dec = eigendecompose(&double_center(&d)).unwrap();
        assert!((dec.eigenvalues[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn closed_forms_agree_with_characters() {
        for k in 1..=8 {
            let spec = GroupSpec::elementary_abelian_2(k).unwrap();
            assert_eq!(closed_form_c2k(k).unwrap(), spectrum_via_characters(&spec, &MetricSpec::HammingBitvector).unwrap(), "k={k}");
        }
        for n in 4..=6 {
            let spec = GroupSpec::symmetric(n).unwrap();
            assert_eq!(closed_form_sn(n).unwrap(), spectrum_via_characters(&spec, &MetricSpec::HammingPermutation).unwrap(), "n={n}");
        }
    }

    #[test]
    fn convolution_matrix_examples() {
        let c22 = GroupSpec::elementary_abelian_2(2).unwrap();
        let mu = mu_from_metric(&c22, &MetricSpec::HammingBitvector).unwrap();
        let m = convolution_matrix(&c22, &mu).unwrap();
        assert_eq!(m.matrix()[(1, 3)], -0.5);
        assert!((0..4).all(|i| m.matrix()[(i, i)] == 0.0));
        assert!(!m.is_centered());

        let s3 = GroupSpec::symmetric(3).unwrap();
        let mu = mu_from_metric(&s3, &MetricSpec::HammingPermutation).unwrap();
        let m = convolution_matrix(&s3, &mu).unwrap();
        let d = build_distance_matrix(&s3, &MetricSpec::HammingPermutation).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let dij = d.get(i, j) as f64;
                assert_eq!(m.matrix()[(i, j)], -0.5 * dij * dij);
            }
        }
    }

    #[test]
    fn projector_examples() {
        let s4 = GroupSpec::symmetric(4).unwrap();
        let p = isotypic_projector(&s4, &IrreducibleLabel::partition(&[3, 1]).unwrap()).unwrap();
        assert!((p.trace() - 9.0).abs() < 1e-6);
        assert!(p.idempotence_error() < 1e-8);
        assert!(p.hermitian_error() < 1e-12);

        let c23 = GroupSpec::elementary_abelian_2(3).unwrap();
        let kernel = double_center(&build_distance_matrix(&c23, &MetricSpec::HammingBitvector).unwrap());
        let p = isotypic_projector(&c23, &IrreducibleLabel::subset(3, &[1, 2]).unwrap()).unwrap();
        assert!(p.eigen_residual(kernel.matrix(), -2.0) < 1e-8 * 2.0);
    }

    #[test]
    fn projector_families_resolve_identity() {
        for spec in [GroupSpec::symmetric(4).unwrap(), GroupSpec::cyclic(6).unwrap(), GroupSpec::elementary_abelian_2(3).unwrap()] {
            let n = spec.order() as usize;
            let projectors: Vec<IsotypicProjector> =
                irreducible_labels(&spec).iter().map(|l| isotypic_projector(&spec, l).unwrap()).collect();
            let mut sum = DMatrix::zeros(n, n);
            let mut sum_im = DMatrix::zeros(n, n);
            for p in &projectors {
                sum += &p.real;
                if let Some(im) = &p.imag {
                    sum_im += im;
                }
                assert!(p.idempotence_error() < 1e-8);
                assert!(p.hermitian_error() < 1e-12);
                assert!((p.trace() - p.rank as f64).abs() < 1e-6);
            }
            assert!((sum - DMatrix::identity(n, n)).amax() < 1e-8);
            assert!(sum_im.amax() < 1e-8);
            for (i, a) in projectors.iter().enumerate() {
                for b in &projectors[i + 1..] {
                    assert!(a.product_max(b) < 1e-8);
                }
            }
        }
    }

    #[test]
    fn standard_coordinates() {
        let s5 = GroupSpec::symmetric(5).unwrap();
        let g = s5.parse_element("2,1,3,4,5").unwrap();
        let e = s5.identity();
        let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        let cg = standard_rep_coordinates(&g, 5).unwrap();
        let ce = standard_rep_coordinates(&e, 5).unwrap();
        assert!((sq(&cg, &ce) - 14.0).abs() < 1e-12);
        assert_eq!(sq(&cg, &cg), 0.0);
        assert!(standard_rep_coordinates(&GroupElement::Permutation(vec![2, 1, 3]), 3).is_err());

        let s10 = GroupSpec::symmetric(10).unwrap();
        let a = s10.parse_element("1,2,3,4,5,6,7,8,9,10").unwrap();
        let b = s10.parse_element("1,2,3,5,4,6,7,8,9,10").unwrap();
        let d = sq(&standard_rep_coordinates(&a, 10).unwrap(), &standard_rep_coordinates(&b, 10).unwrap());
        assert!((d - 34.0).abs() < 1e-10);
    }

    #[test]
    fn trace_identity_small() {
        let c22 = GroupSpec::elementary_abelian_2(2).unwrap();
        let s = spectrum_via_characters(&c22, &MetricSpec::HammingBitvector).unwrap();
        assert_eq!(s.trace(), rat(3, 1));
        assert_eq!(trace_from_distances(&c22, &MetricSpec::HammingBitvector, 100).unwrap(), Rational::new(3, 1));
        let mu = mu_from_metric(&c22, &MetricSpec::HammingBitvector).unwrap();
        assert_eq!(mu_total(&mu), Rational::new(-3, 1));
    }

    #[test]
    fn summary_json_shape() {
        let s = spectrum_via_characters(&GroupSpec::symmetric(4).unwrap(), &MetricSpec::HammingPermutation).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["trivial_discarded"], true);
        assert_eq!(v["entries"][0]["eigenvalue"], "20/1");
        assert_eq!(v["entries"][0]["multiplicity"], 9);
        assert_eq!(v["entries"][0]["sign"], "positive");
        assert_eq!(v["entries"][0]["labels"][0], "[3,1]");
        assert_eq!(v["entries"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn predicted_multiset_has_group_order() {
        let s = closed_form_sn(5).unwrap();
        let p = s.predicted_eigenvalues();
        assert_eq!(p.len(), 120);
        assert_eq!(p.iter().filter(|&&v| v == 105.0).count(), 16);
        let _ = enumerate_elements(&GroupSpec::symmetric(3).unwrap()).unwrap();
    }
}
