//! Exact character theory for the supported groups.
//!
//! Symmetric-group characters come from the Murnaghan–Nakayama rule, the
//! characters of `C_2^k` are the Walsh functions, and those of `C_n` are the
//! discrete Fourier exponentials. Everything is exact: integers for `S_n`,
//! `+-1` for `C_2^k`, and cyclotomic numbers for `C_n`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{ratio, Cyclotomic, Rational};
use crate::error::{Error, Result};
use crate::group::{
    class_count, class_index, class_partitions, conjugacy_classes, factorial, partitions_of,
    ClassLabel, ConjugacyClass, GroupElement, GroupSpec, Partition,
};

/// Largest number of conjugacy classes [`character_table`] will tabulate.
pub const DEFAULT_CLASS_CAP: usize = 4096;

/// Index of an irreducible character.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IrreducibleLabel {
    Partition(Partition),
    /// Subset of `{1..k}`; position `s` lives in bit `k - s` of `mask`, like bit-string elements.
    Subset { k: usize, mask: u64 },
    Frequency { n: usize, j: usize },
}

impl IrreducibleLabel {
    pub fn partition(parts: &[usize]) -> Result<Self> {
        Ok(Self::Partition(Partition::new(parts.to_vec())?))
    }

    /// Subset label from 1-based positions.
    pub fn subset(k: usize, positions: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &s in positions {
            if s == 0 || s > k {
                return Err(Error::InvalidLabel(format!("position {s} outside 1..{k}")));
            }
            mask |= 1 << (k - s);
        }
        Ok(Self::Subset { k, mask })
    }

    pub fn trivial(group: &GroupSpec) -> Self {
        match *group {
            GroupSpec::Symmetric { n } => Self::Partition(Partition::new(vec![n]).expect("n >= 1")),
            GroupSpec::ElementaryAbelian2 { k } => Self::Subset { k, mask: 0 },
            GroupSpec::Cyclic { n } => Self::Frequency { n, j: 0 },
        }
    }

    pub fn is_trivial(&self) -> bool {
        match self {
            Self::Partition(p) => p.len() == 1,
            Self::Subset { mask, .. } => *mask == 0,
            Self::Frequency { j, .. } => *j == 0,
        }
    }

    pub fn belongs_to(&self, group: &GroupSpec) -> bool {
        match (self, *group) {
            (Self::Partition(p), GroupSpec::Symmetric { n }) => p.n() == n,
            (Self::Subset { k, mask }, GroupSpec::ElementaryAbelian2 { k: gk }) => {
                *k == gk && (gk >= 64 || mask >> gk == 0)
            }
            (Self::Frequency { n, j }, GroupSpec::Cyclic { n: gn }) => *n == gn && j < n,
            _ => false,
        }
    }

    fn check(&self, group: &GroupSpec) -> Result<()> {
        if self.belongs_to(group) {
            Ok(())
        } else {
            Err(Error::InvalidLabel(format!("{self} is not an irreducible of {group}")))
        }
    }
}

impl fmt::Display for IrreducibleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Partition(p) => write!(f, "{p}"),
            Self::Subset { k, mask } => {
                let members: Vec<String> =
                    (1..=*k).filter(|s| mask >> (k - s) & 1 == 1).map(|s| s.to_string()).collect();
                write!(f, "{{{}}}", members.join(","))
            }
            Self::Frequency { j, .. } => write!(f, "f{j}"),
        }
    }
}

/// Irreducible labels in table order: partitions reverse-lexicographic,
/// subsets by (size, mask), frequencies ascending.
pub fn irreducible_labels(group: &GroupSpec) -> Vec<IrreducibleLabel> {
    match *group {
        GroupSpec::Symmetric { n } => {
            partitions_of(n).into_iter().map(IrreducibleLabel::Partition).collect()
        }
        GroupSpec::ElementaryAbelian2 { k } => {
            let mut masks: Vec<u64> = (0..1u64 << k).collect();
            masks.sort_by_key(|m| (m.count_ones(), *m));
            masks.into_iter().map(|mask| IrreducibleLabel::Subset { k, mask }).collect()
        }
        GroupSpec::Cyclic { n } => (0..n).map(|j| IrreducibleLabel::Frequency { n, j }).collect(),
    }
}

/// Class sizes in [`conjugacy_classes`] order.
pub fn class_sizes(group: &GroupSpec) -> Vec<u128> {
    match *group {
        GroupSpec::Symmetric { n } => class_partitions(n).iter().map(Partition::class_size).collect(),
        _ => vec![1; group.order() as usize],
    }
}

/// A function on conjugacy classes, stored in [`conjugacy_classes`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassFunction {
    group: GroupSpec,
    values: Vec<Cyclotomic>,
}

impl ClassFunction {
    pub fn new(group: GroupSpec, values: Vec<Cyclotomic>) -> Result<Self> {
        let expected = class_count(&group);
        if values.len() as u128 != expected {
            return Err(Error::InvalidDimension(format!(
                "{} values for {expected} conjugacy classes of {group}",
                values.len()
            )));
        }
        Ok(Self { group, values })
    }

    pub fn from_rationals(group: GroupSpec, values: Vec<Rational>) -> Result<Self> {
        Self::new(group, values.into_iter().map(Cyclotomic::from_rational).collect())
    }

    pub fn zero(group: GroupSpec) -> Self {
        Self { group, values: vec![Cyclotomic::zero(); class_count(&group) as usize] }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn values(&self) -> &[Cyclotomic] {
        &self.values
    }

    pub fn value_at(&self, g: &GroupElement) -> Result<&Cyclotomic> {
        Ok(&self.values[class_index(&self.group, g)?])
    }

    /// Pointwise product.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Self { group: self.group, values })
    }

    pub fn add_scaled(&mut self, other: &Self, scale: &Cyclotomic) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += &(b * scale);
        }
        Ok(())
    }
}

/// Murnaghan–Nakayama: the character of `shape` on the class of cycle type `cycles`.
pub fn symmetric_character(shape: &Partition, cycles: &Partition) -> Result<i128> {
    if shape.n() != cycles.n() {
        return Err(Error::InvalidLabel(format!("{shape} and class {cycles} have different sizes")));
    }
    Ok(mn(shape.parts(), cycles.parts()))
}

type MnKey = (Vec<usize>, Vec<usize>);

fn mn(shape: &[usize], cycles: &[usize]) -> i128 {
    static MEMO: OnceLock<RwLock<HashMap<MnKey, i128>>> = OnceLock::new();
    if cycles.is_empty() {
        return i128::from(shape.is_empty());
    }
    let memo = MEMO.get_or_init(Default::default);
    let key = (shape.to_vec(), cycles.to_vec());
    if let Some(&v) = memo.read().expect("character memo poisoned").get(&key) {
        return v;
    }

    // Rim hooks of length r correspond to moving one bead of the beta-set down by r.
    let r = cycles[0];
    let len = shape.len();
    let beta: Vec<usize> = shape.iter().enumerate().map(|(i, &p)| p + len - 1 - i).collect();
    let mut total = 0i128;
    for (idx, &b) in beta.iter().enumerate() {
        if b < r || beta.contains(&(b - r)) {
            continue;
        }
        let crossed = beta.iter().filter(|&&c| c > b - r && c < b).count();
        let mut moved = beta.clone();
        moved[idx] = b - r;
        moved.sort_unstable_by(|x, y| y.cmp(x));
        let reduced: Vec<usize> = moved
            .iter()
            .enumerate()
            .map(|(i, &v)| v - (len - 1 - i))
            .filter(|&p| p > 0)
            .collect();
        let sign = if crossed % 2 == 0 { 1 } else { -1 };
        total += sign * mn(&reduced, &cycles[1..]);
    }
    memo.write().expect("character memo poisoned").insert(key, total);
    total
}

/// Number of standard Young tableaux of the given shape, by the hook length formula.
pub fn hook_length_dimension(shape: &Partition) -> u128 {
    let parts = shape.parts();
    let mut hooks: u128 = 1;
    for (i, &row) in parts.iter().enumerate() {
        for j in 0..row {
            let below = parts[i + 1..].iter().filter(|&&p| p > j).count();
            hooks *= (row - j + below) as u128;
        }
    }
    factorial(shape.n()) / hooks
}

pub fn dimension(group: &GroupSpec, label: &IrreducibleLabel) -> Result<u128> {
    label.check(group)?;
    Ok(match label {
        IrreducibleLabel::Partition(p) => hook_length_dimension(p),
        _ => 1,
    })
}

pub fn character_value(
    group: &GroupSpec,
    label: &IrreducibleLabel,
    class: &ConjugacyClass,
) -> Result<Cyclotomic> {
    label.check(group)?;
    group.check(&class.representative)?;
    character_at(group, label, &class.representative, &class.label)
}

/// Character value at an arbitrary element.
pub fn character_value_at(
    group: &GroupSpec,
    label: &IrreducibleLabel,
    g: &GroupElement,
) -> Result<Cyclotomic> {
    label.check(group)?;
    group.check(g)?;
    let class_label = match g {
        GroupElement::Permutation(_) => ClassLabel::CycleType(crate::group::cycle_type(g)?),
        _ => ClassLabel::Element(g.clone()),
    };
    character_at(group, label, g, &class_label)
}

fn character_at(
    group: &GroupSpec,
    label: &IrreducibleLabel,
    rep: &GroupElement,
    class_label: &ClassLabel,
) -> Result<Cyclotomic> {
    Ok(match (label, rep, class_label) {
        (IrreducibleLabel::Partition(shape), _, ClassLabel::CycleType(cycles)) => {
            Cyclotomic::from_integer(symmetric_character(shape, cycles)?)
        }
        (IrreducibleLabel::Subset { mask: s, .. }, GroupElement::Bits { mask: g, .. }, _) => {
            Cyclotomic::from_integer(if (s & g).count_ones() % 2 == 0 { 1 } else { -1 })
        }
        (IrreducibleLabel::Frequency { n, j }, GroupElement::Residue(m), _) => {
            let power = ((*j as u128 * *m as u128) % *n as u128) as i64;
            Cyclotomic::root_of_unity(*n, power).simplified()
        }
        _ => return Err(Error::InvalidLabel(format!("{label} cannot be evaluated on {group}"))),
    })
}

/// The character of `label` as a class function.
pub fn character(group: &GroupSpec, label: &IrreducibleLabel) -> Result<ClassFunction> {
    label.check(group)?;
    let values = conjugacy_classes(group)?
        .iter()
        .map(|c| character_at(group, label, &c.representative, &c.label))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassFunction { group: *group, values })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterTable {
    pub group: GroupSpec,
    pub labels: Vec<IrreducibleLabel>,
    pub classes: Vec<ConjugacyClass>,
    /// `entries[row][column]`, rows by label, columns by class.
    pub entries: Vec<Vec<Cyclotomic>>,
}

impl CharacterTable {
    pub fn row(&self, i: usize) -> ClassFunction {
        ClassFunction { group: self.group, values: self.entries[i].clone() }
    }

    pub fn row_of(&self, label: &IrreducibleLabel) -> Option<ClassFunction> {
        self.labels.iter().position(|l| l == label).map(|i| self.row(i))
    }
}

pub fn character_table(group: &GroupSpec) -> Result<CharacterTable> {
    character_table_with_cap(group, DEFAULT_CLASS_CAP)
}

pub fn character_table_with_cap(group: &GroupSpec, cap: usize) -> Result<CharacterTable> {
    let count = class_count(group);
    if count > cap as u128 {
        return Err(Error::TooLarge { order: count, cap });
    }
    let classes = conjugacy_classes(group)?;
    let labels = irreducible_labels(group);
    let entries = labels
        .iter()
        .map(|l| {
            classes
                .iter()
                .map(|c| character_at(group, l, &c.representative, &c.label))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CharacterTable { group: *group, labels, classes, entries })
}

/// `(1/|G|) sum_g f1(g) conj(f2(g))`, exact.
pub fn inner_product(f1: &ClassFunction, f2: &ClassFunction) -> Result<Cyclotomic> {
    if f1.group != f2.group {
        return Err(Error::GroupMismatch);
    }
    let sizes = class_sizes(&f1.group);
    let order = Rational::from_integer(f1.group.order() as i128);
    let all_rational = f1.values.iter().chain(&f2.values).all(Cyclotomic::is_rational_form);
    if all_rational {
        let mut acc = Rational::zero();
        for ((a, b), &s) in f1.values.iter().zip(&f2.values).zip(&sizes) {
            let (a, b) = (a.to_rational().expect("rational"), b.to_rational().expect("rational"));
            acc += a * b * Rational::from_integer(s as i128);
        }
        return Ok(Cyclotomic::from_rational(acc / order));
    }
    let mut acc = Cyclotomic::zero();
    for ((a, b), &s) in f1.values.iter().zip(&f2.values).zip(&sizes) {
        acc += &(a * &b.conj()).scale(Rational::from_integer(s as i128));
    }
    Ok(acc.scale(order.recip()).simplified())
}

/// Coefficients of a class function in the basis of irreducible characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionResult {
    pub group: GroupSpec,
    pub coefficients: Vec<(IrreducibleLabel, Cyclotomic)>,
}

impl DecompositionResult {
    pub fn coefficient(&self, label: &IrreducibleLabel) -> Option<&Cyclotomic> {
        self.coefficients.iter().find(|(l, _)| l == label).map(|(_, c)| c)
    }

    /// Labels with a nonzero coefficient.
    pub fn support(&self) -> Vec<&IrreducibleLabel> {
        self.coefficients.iter().filter(|(_, c)| !c.is_zero()).map(|(l, _)| l).collect()
    }

    /// `sum_i sigma_i chi_i`.
    pub fn reconstruct(&self) -> Result<ClassFunction> {
        let mut out = ClassFunction::zero(self.group);
        for (label, c) in &self.coefficients {
            if c.is_zero() {
                continue;
            }
            out.add_scaled(&character(&self.group, label)?, c)?;
        }
        Ok(out)
    }
}

/// `sigma_i = <f, chi_i>` for every irreducible, in [`irreducible_labels`] order.
///
/// `C_2^k` uses a fast Walsh–Hadamard transform; `C_n` a direct exact DFT;
/// `S_n` explicit inner products against Murnaghan–Nakayama characters.
pub fn decompose_class_function(f: &ClassFunction) -> Result<DecompositionResult> {
    let group = f.group;
    let coefficients = match group {
        GroupSpec::ElementaryAbelian2 { k } => {
            let mut w = walsh_hadamard(f.values.clone());
            let inv = Rational::new(1, 1i128 << k);
            for v in &mut w {
                *v = v.scale(inv).simplified();
            }
            irreducible_labels(&group)
                .into_iter()
                .map(|l| {
                    let IrreducibleLabel::Subset { mask, .. } = l else { unreachable!() };
                    let c = w[mask as usize].clone();
                    (l, c)
                })
                .collect()
        }
        GroupSpec::Cyclic { n } => {
            let inv = Rational::new(1, n as i128);
            // work over z_L with L a common multiple of n and every value's order;
            // multiplying by z_n^-jm is then a rotation of coefficients
            let order = f.values.iter().fold(n, |acc, v| acc.lcm(&v.order()));
            let step = order / n;
            let terms: Vec<Vec<(usize, Rational)>> = f
                .values
                .iter()
                .map(|v| {
                    let lifted = v.lift(order);
                    lifted.coefficients().iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (k, *c)).collect()
                })
                .collect();
            let denom = terms.iter().flatten().fold(1i128, |acc, (_, c)| acc.lcm(c.denom()));
            let integer: Option<Vec<Vec<(usize, i128)>>> = terms
                .iter()
                .map(|t| t.iter().map(|(k, c)| c.numer().checked_mul(denom / c.denom()).map(|v| (*k, v))).collect())
                .collect();
            (0..n)
                .map(|j| {
                    let shift = |m: usize| (order - (j * m % n) * step) % order;
                    let label = IrreducibleLabel::Frequency { n, j };
                    if let (Some(integer), Some(scaled)) = (&integer, denom.checked_mul(n as i128)) {
                        let mut acc = vec![0i128; order];
                        let fits = integer.iter().enumerate().all(|(m, value)| {
                            value.iter().all(|&(k, c)| {
                                let slot = &mut acc[(k + shift(m)) % order];
                                slot.checked_add(c).map(|v| *slot = v).is_some()
                            })
                        });
                        if fits {
                            let coeffs = acc.into_iter().map(|v| ratio(v, scaled)).collect();
                            return (label, Cyclotomic::from_coefficients(order, coeffs).simplified());
                        }
                    }
                    let mut coeffs = vec![Rational::zero(); order];
                    for (m, value) in terms.iter().enumerate() {
                        for &(k, c) in value {
                            coeffs[(k + shift(m)) % order] += c;
                        }
                    }
                    (label, Cyclotomic::from_coefficients(order, coeffs).scale(inv).simplified())
                })
                .collect()
        }
        GroupSpec::Symmetric { .. } => irreducible_labels(&group)
            .into_iter()
            .map(|l| {
                let chi = character(&group, &l)?;
                Ok((l, inner_product(f, &chi)?))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(DecompositionResult { group, coefficients })
}

/// Unnormalized Walsh–Hadamard transform: `out[s] = sum_g v[g] (-1)^popcount(s & g)`.
pub fn walsh_hadamard(mut v: Vec<Cyclotomic>) -> Vec<Cyclotomic> {
    let n = v.len();
    assert!(n.is_power_of_two(), "length {n} is not a power of two");
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let a = &v[i] + &v[i + h];
                let b = &v[i] - &v[i + h];
                v[i] = a;
                v[i + h] = b;
            }
        }
        h *= 2;
    }
    v
}

/// Decomposes the pointwise square of an irreducible character; the coefficients
/// are the multiplicities of each irreducible in the tensor square.
pub fn tensor_square_decomposition(
    group: &GroupSpec,
    label: &IrreducibleLabel,
) -> Result<DecompositionResult> {
    let chi = character(group, label)?;
    decompose_class_function(&chi.pointwise_mul(&chi)?)
}
